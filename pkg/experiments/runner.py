"""
Experiment execution: every (n, d, seed, method) cell is fitted on its own,
then results are sorted by cell key and written as CSV, JSON and SVG
"""
import csv
import dataclasses
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

import splines
from splines.bezier import SplineCoefficients
from splines.exceptions import SolverFailure, SplineError
from splines.smoothers import FitConfig, fit

from .datasets import generate_data
from .plots import plot_fits
from .serializers import REPORT_COLUMNS, ReportRowSerializer

logger = logging.getLogger(__name__)

REPORT_CSV = 'report.csv'
SUMMARY_JSON = 'summary.json'


@dataclass(frozen=True)
class ExperimentSpec:
    n_values: tuple
    degrees: tuple
    seeds: tuple
    methods: tuple
    config: FitConfig
    output_dir: Path
    plot: bool = False
    magnify: Optional[tuple] = None
    workers: int = 1

    def cells(self):
        return sorted(
            CellKey(n, d, seed, method.value)
            for n in self.n_values
            for d in self.degrees
            for seed in self.seeds
            for method in self.methods
        )


@dataclass(frozen=True, order=True)
class CellKey:
    n: int
    d: int
    seed: int
    method: str


@dataclass(frozen=True, eq=False)
class CellOutcome:
    key: CellKey
    cost: Optional[float] = None
    time_ms: Optional[float] = None
    cp_iterations: Optional[int] = None
    total_cuts: Optional[int] = None
    grid_min: Optional[float] = None
    termination: Optional[str] = None
    error: Optional[str] = None
    solver_failed: bool = False
    coefficients: Optional[np.ndarray] = None

    @property
    def ok(self):
        return self.error is None


def run_cell(key, config):
    """
    Fits one cell; failures are recorded in the outcome, never raised
    """
    dataset = generate_data(key.n, key.seed)
    cell_config = dataclasses.replace(config, degree=key.d)
    try:
        result = fit(key.method, dataset, config=cell_config)
    except SolverFailure as exc:
        logger.warning('cell %s failed in the solver: %s', key, exc)
        return CellOutcome(key=key, error=str(exc), solver_failed=True)
    except SplineError as exc:
        logger.warning('cell %s failed: %s', key, exc)
        return CellOutcome(key=key, error=str(exc))
    except Exception as exc:
        logger.exception('cell %s raised an unexpected error', key)
        return CellOutcome(key=key, error=f'{type(exc).__name__}: {exc}')
    logger.info('cell n=%d d=%d seed=%d %s: cost=%.10g in %.1f ms',
                key.n, key.d, key.seed, key.method, result.cost, 1e3 * result.wall_time)
    return CellOutcome(
        key=key,
        cost=result.cost,
        time_ms=1e3 * result.wall_time,
        cp_iterations=result.cp_iterations,
        total_cuts=result.total_cuts,
        grid_min=result.grid_min,
        termination=result.termination.value,
        coefficients=np.array(result.coefficients.b),
    )


def _run_cell(args):
    return run_cell(*args)


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    spec: ExperimentSpec
    outcomes: tuple
    csv_path: Path
    json_path: Path
    plot_paths: tuple = ()

    @property
    def failed(self):
        return tuple(outcome for outcome in self.outcomes if not outcome.ok)

    @property
    def solver_failed(self):
        return any(outcome.solver_failed for outcome in self.outcomes)


def _config_echo(spec):
    config = spec.config
    return {
        'n_values': list(spec.n_values),
        'degrees': list(spec.degrees),
        'seeds': list(spec.seeds),
        'methods': [method.value for method in spec.methods],
        'lambda': config.lam,
        'epsilon': config.epsilon,
        'max_cp_iterations': config.max_cp_iterations,
        'grid_points': config.grid_points,
        'root_strategy': config.root_strategy.value,
        'shift_negative': config.shift_negative,
        'qp_tolerance': config.qp.tol,
        'qp_max_iterations': config.qp.max_iterations,
    }


def write_report(spec, outcomes):
    """
    Writes report.csv and summary.json into the spec's output directory
    """
    output = Path(spec.output_dir)
    output.mkdir(parents=True, exist_ok=True)
    rows = ReportRowSerializer(outcomes, many=True).data

    csv_path = output / REPORT_CSV
    with csv_path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: '' if value is None else value for key, value in row.items()})

    json_path = output / SUMMARY_JSON
    summary = {
        'version': splines.__version__,
        'config': _config_echo(spec),
        'cells': [dict(row) for row in rows],
    }
    json_path.write_text(json.dumps(summary, indent=2) + '\n', encoding='utf-8')
    return csv_path, json_path


def _write_plots(spec, outcomes):
    paths = []
    groups = {}
    for outcome in outcomes:
        if outcome.ok:
            groups.setdefault((outcome.key.n, outcome.key.d, outcome.key.seed), []).append(outcome)
    for (n, d, seed), group in sorted(groups.items()):
        dataset = generate_data(n, seed)
        fits = {
            outcome.key.method: SplineCoefficients(d, dataset.partition(), outcome.coefficients)
            for outcome in group
        }
        path = Path(spec.output_dir) / f'fit_n{n}_d{d}_seed{seed}.svg'
        paths.append(plot_fits(dataset, fits, path, magnify=spec.magnify,
                               title=f'n={n}, d={d}, seed={seed}'))
    return tuple(paths)


def run_experiment(spec):
    """
    Runs every cell of the spec; a failing cell is recorded and the run goes on
    """
    keys = spec.cells()
    started = time.perf_counter()
    logger.info('running %d cells with %d worker(s)', len(keys), spec.workers)
    if spec.workers > 1 and len(keys) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            outcomes = list(pool.map(_run_cell, [(key, spec.config) for key in keys]))
    else:
        outcomes = [run_cell(key, spec.config) for key in keys]
    outcomes = tuple(sorted(outcomes, key=lambda outcome: outcome.key))

    csv_path, json_path = write_report(spec, outcomes)
    plot_paths = _write_plots(spec, outcomes) if spec.plot else ()
    logger.info('experiment finished in %.2f s, %d failed cell(s)',
                time.perf_counter() - started, sum(not outcome.ok for outcome in outcomes))
    return ExperimentReport(spec, outcomes, csv_path, json_path, plot_paths)

