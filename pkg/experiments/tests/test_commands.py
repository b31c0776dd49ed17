"""Tests for the generate, fit, verify and experiment management commands."""
import csv
import json
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from experiments.datasets import load_dataset, save_dataset
from experiments.management.commands._base import int_list
from splines.tests.utils import dip_dataset


def run(*args, **options):
    out = StringIO()
    call_command(*args, stdout=out, stderr=StringIO(), **options)
    return out.getvalue()


def exit_code(*args, **options):
    with pytest.raises(CommandError) as excinfo:
        run(*args, **options)
    return excinfo.value.returncode


@pytest.fixture
def dip_csv(tmp_path):
    return save_dataset(dip_dataset(), tmp_path / 'dip.csv')


class TestIntList:
    """Integer list arguments."""

    def test_ranges(self):
        assert int_list('0-3,7') == [0, 1, 2, 3, 7]

    def test_invalid(self):
        with pytest.raises(CommandError) as excinfo:
            int_list('a,b')
        assert excinfo.value.returncode == 1


class TestGenerate:
    """generate"""

    def test_writes_csv(self, tmp_path):
        output = run('generate', '--n', '20', '--seed', '3', '--output', str(tmp_path / 'data.csv'))
        assert 'wrote 21 samples' in output
        assert load_dataset(tmp_path / 'data.csv').n == 20

    def test_missing_output(self):
        assert exit_code('generate', '--n', '5') == 1

    def test_invalid_n(self, tmp_path):
        assert exit_code('generate', '--n', '0', '--output', str(tmp_path / 'data.csv')) == 2


class TestFit:
    """fit"""

    def test_all_outputs(self, dip_csv, tmp_path):
        output = run('fit', '--input', str(dip_csv), '--method', 'standard,cutting_plane',
                     '--grid', '500', '--output', str(tmp_path / 'fit.json'),
                     '--plot', str(tmp_path / 'fit.svg'), '--magnify', '3,6')
        assert 'cutting_plane' in output
        payload = json.loads((tmp_path / 'fit.json').read_text(encoding='utf-8'))
        assert set(payload) == {'standard', 'cutting_plane'}
        assert payload['cutting_plane']['grid_min'] >= -1e-9
        assert payload['standard']['grid_min'] < 0.0
        assert (tmp_path / 'fit.svg').exists()

    def test_generated_data(self):
        assert 'sufficient_qp' in run('fit', '--n', '10', '--seed', '1', '--method', 'sufficient_qp')

    def test_unknown_method(self, dip_csv):
        assert exit_code('fit', '--input', str(dip_csv), '--method', 'lrsqp') == 1

    def test_invalid_degree(self, dip_csv):
        assert exit_code('fit', '--input', str(dip_csv), '--degree', '2') == 1

    def test_no_data_source(self):
        assert exit_code('fit') == 1

    def test_malformed_file(self, tmp_path):
        path = tmp_path / 'bad.csv'
        path.write_text('x,y\n0,1\n1,abc\n', encoding='utf-8')
        assert exit_code('fit', '--input', str(path)) == 2

    def test_negative_data_needs_flag(self, tmp_path):
        path = tmp_path / 'negative.csv'
        path.write_text('x,y\n0,1\n1,-1\n2,1\n3,1\n', encoding='utf-8')
        assert exit_code('fit', '--input', str(path), '--method', 'standard') == 2
        assert 'standard' in run('fit', '--input', str(path), '--method', 'standard', '--allow-negative')

    def test_solver_failure(self, dip_csv, settings):
        settings.NNSPLINE = {**settings.NNSPLINE, 'QP_MAX_ITERATIONS': 1}
        assert exit_code('fit', '--input', str(dip_csv), '--method', 'cutting_plane') == 3


class TestVerify:
    """verify"""

    def test_passes_on_dense_grid(self, dip_csv, tmp_path):
        output = run('verify', '--input', str(dip_csv), '--grid', '10000', '--output', str(tmp_path / 'v.json'))
        assert 'verification passed' in output
        report = json.loads((tmp_path / 'v.json').read_text(encoding='utf-8'))
        assert report['passed']
        assert report['relative_gap'] <= 1e-6

    def test_coarse_oracle_fails(self, dip_csv):
        assert exit_code('verify', '--input', str(dip_csv), '--grid', '2') == 3


class TestExperiment:
    """experiment"""

    def test_grid_from_flags(self, tmp_path):
        output = run('experiment', '--n', '5,10', '--seed', '0-1', '--degree', '3',
                     '--method', 'sufficient_qp,cutting_plane', '--grid', '200',
                     '--output', str(tmp_path))
        assert '8 cells, 0 failed' in output
        with (tmp_path / 'report.csv').open(encoding='utf-8', newline='') as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 8
        assert (tmp_path / 'summary.json').exists()

    def test_spec_file_with_override(self, tmp_path):
        spec = tmp_path / 'spec.json'
        spec.write_text(json.dumps({
            'n_values': [5], 'degrees': [3, 4], 'seeds': [2], 'methods': ['standard'], 'grid_points': 200,
        }), encoding='utf-8')
        output = run('experiment', '--spec', str(spec), '--output', str(tmp_path / 'out'), '--plot')
        assert '2 cells, 0 failed' in output
        assert (tmp_path / 'out' / 'fit_n5_d4_seed2.svg').exists()

    def test_empty_method_list(self, tmp_path):
        output = run('experiment', '--method', '', '--output', str(tmp_path))
        assert '0 cells' in output
        assert (tmp_path / 'report.csv').read_text(encoding='utf-8').count('\n') == 1

    def test_invalid_degree(self, tmp_path):
        assert exit_code('experiment', '--degree', '2', '--output', str(tmp_path)) == 1

    def test_unreadable_spec(self, tmp_path):
        assert exit_code('experiment', '--spec', str(tmp_path / 'absent.json')) == 1

    def test_solver_failure(self, tmp_path, settings):
        settings.NNSPLINE = {**settings.NNSPLINE, 'QP_MAX_ITERATIONS': 1}
        assert exit_code('experiment', '--n', '10', '--method', 'sufficient_qp', '--grid', '200',
                         '--output', str(tmp_path)) == 3
        assert (tmp_path / 'report.csv').exists()
