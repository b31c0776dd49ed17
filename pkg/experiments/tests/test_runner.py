"""Tests for the experiment runner and its report files."""
import csv
import json

import pytest

from experiments.runner import CellKey, ExperimentSpec, run_cell, run_experiment
from experiments.serializers import REPORT_COLUMNS
from splines.qpsolve import QpSettings
from splines.smoothers import FitConfig, Method

CONFIG = FitConfig(grid_points=200)


def make_spec(output_dir, **changes):
    values = {
        'n_values': (5, 10),
        'degrees': (3,),
        'seeds': (0, 1),
        'methods': (Method.SUFFICIENT_QP, Method.CUTTING_PLANE),
        'config': CONFIG,
        'output_dir': output_dir,
    }
    values.update(changes)
    return ExperimentSpec(**values)


def read_rows(path):
    with path.open(encoding='utf-8', newline='') as handle:
        return list(csv.DictReader(handle))


class TestRunCell:
    """A single (n, d, seed, method) fit."""

    def test_success(self):
        outcome = run_cell(CellKey(10, 4, 0, 'cutting_plane'), CONFIG)
        assert outcome.ok
        assert outcome.termination == 'converged'
        assert outcome.coefficients.size == 4 * 10 + 1
        assert outcome.grid_min >= -1e-9

    def test_solver_failure_is_recorded(self):
        config = FitConfig(grid_points=200, qp=QpSettings(max_iterations=1))
        outcome = run_cell(CellKey(10, 3, 0, 'sufficient_qp'), config)
        assert not outcome.ok
        assert outcome.solver_failed
        assert outcome.cost is None

    def test_unexpected_error_is_recorded(self, monkeypatch, caplog):
        def broken_fit(*args, **kwargs):
            raise RuntimeError('matrix went missing')

        monkeypatch.setattr('experiments.runner.fit', broken_fit)
        with caplog.at_level('ERROR', logger='experiments.runner'):
            outcome = run_cell(CellKey(5, 3, 0, 'standard'), CONFIG)
        assert not outcome.ok
        assert not outcome.solver_failed
        assert outcome.error == 'RuntimeError: matrix went missing'
        assert 'unexpected error' in caplog.text


class TestRunExperiment:
    """Report files of a small grid."""

    @pytest.fixture
    def report(self, tmp_path):
        return run_experiment(make_spec(tmp_path / 'first'))

    def test_csv_layout(self, report):
        lines = report.csv_path.read_text(encoding='utf-8').splitlines()
        assert lines[0] == ','.join(REPORT_COLUMNS)
        assert len(lines) == 1 + 8

    def test_rows_sorted_by_cell(self, report):
        keys = [(int(row['n']), int(row['d']), int(row['seed']), row['method'])
                for row in read_rows(report.csv_path)]
        assert keys == sorted(keys)

    def test_exact_never_costs_more(self, report):
        costs = {}
        for row in read_rows(report.csv_path):
            costs[(row['n'], row['seed'], row['method'])] = float(row['cost'])
        for (n, seed, method), cost in costs.items():
            if method == 'cutting_plane':
                assert cost <= costs[(n, seed, 'sufficient_qp')] + 1e-8

    def test_summary(self, report):
        summary = json.loads(report.json_path.read_text(encoding='utf-8'))
        assert summary['config']['lambda'] == pytest.approx(1 / 250)
        assert summary['config']['methods'] == ['sufficient_qp', 'cutting_plane']
        assert len(summary['cells']) == 8
        assert all(cell['error'] is None for cell in summary['cells'])
        assert not report.failed
        assert not report.solver_failed

    def test_reproducible_apart_from_timing(self, report, tmp_path):
        again = run_experiment(make_spec(tmp_path / 'second'))
        first, second = read_rows(report.csv_path), read_rows(again.csv_path)
        for row in first + second:
            del row['time_ms']
        assert first == second

    def test_no_methods_writes_header_only(self, tmp_path):
        report = run_experiment(make_spec(tmp_path, methods=()))
        assert report.outcomes == ()
        assert report.csv_path.read_text(encoding='utf-8') == ','.join(REPORT_COLUMNS) + '\n'

    def test_plots(self, tmp_path):
        report = run_experiment(make_spec(tmp_path, n_values=(5,), seeds=(3,), plot=True, magnify=(1.0, 4.0)))
        assert [path.name for path in report.plot_paths] == ['fit_n5_d3_seed3.svg']
        assert report.plot_paths[0].read_text(encoding='utf-8').lstrip().startswith('<?xml')
