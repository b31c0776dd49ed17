"""
Spline smoothing methods:

  standard            min ||y - Ab||^2 + lam b'Qb  s.t. Hb = 0
  sufficient_qp       the same with b >= 0 (nonnegative coefficients)
  cutting_plane       exact nonnegativity on [xi_0, xi_m] by adding one cut
                      per violating piece until every piece minimum >= -eps
  discretized_oracle  nonnegativity imposed on a fixed dense tau grid

plus the coefficient-distance bound and KKT certificate checks used to
verify cutting-plane results.
"""
import dataclasses
import enum
import logging
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from .assembly import CutSet, build_G, build_problem, g_tau
from .bezier import MIN_SPLINE_DEGREE, SplineCoefficients, grid_minimum
from .exceptions import ConfigError, SolverFailure
from .polyroots import RootMethod, minimize_piece
from .qpsolve import KktResiduals, QpSettings, QpSolution, QpStatus, solve_qp

logger = logging.getLogger(__name__)

MAX_SPLINE_DEGREE = 10
# Violations this far past -eps that only re-propose existing cuts are a stall.
STALL_MARGIN = 1e-12


class Method(str, enum.Enum):
    STANDARD = 'standard'
    SUFFICIENT_QP = 'sufficient_qp'
    CUTTING_PLANE = 'cutting_plane'
    DISCRETIZED_ORACLE = 'discretized_oracle'


class Termination(str, enum.Enum):
    CONVERGED = 'converged'
    MAX_ITERS = 'max_iters'
    STALLED = 'stalled'


@dataclass(frozen=True)
class FitConfig:
    degree: int = 3
    lam: float = 1.0 / 250.0
    epsilon: float = 0.0
    max_cp_iterations: int = 500
    grid_points: int = 10000
    root_strategy: RootMethod = RootMethod.CLOSED_FORM
    shift_negative: bool = False
    qp: QpSettings = QpSettings()

    def __post_init__(self):
        if int(self.degree) != self.degree or not MIN_SPLINE_DEGREE <= self.degree <= MAX_SPLINE_DEGREE:
            raise ConfigError(f'degree must be an integer in [{MIN_SPLINE_DEGREE}, {MAX_SPLINE_DEGREE}]')
        if not np.isfinite(self.lam) or self.lam <= 0.0:
            raise ConfigError('the smoothing parameter lambda must be positive')
        if not np.isfinite(self.epsilon) or self.epsilon < 0.0:
            raise ConfigError('epsilon must be nonnegative')
        if self.max_cp_iterations < 1:
            raise ConfigError('max_cp_iterations must be at least 1')
        if self.grid_points < 2:
            raise ConfigError('grid_points must be at least 2')
        try:
            strategy = RootMethod(self.root_strategy)
        except ValueError:
            raise ConfigError(f'unknown root strategy {self.root_strategy!r}') from None
        if strategy is RootMethod.CONSTANT_PIECE:
            raise ConfigError('constant_piece is not a root strategy')
        object.__setattr__(self, 'degree', int(self.degree))
        object.__setattr__(self, 'root_strategy', strategy)


@dataclass(frozen=True)
class CpIteration:
    """
    One cutting-plane round: the relaxed solve at cut set r and the
    lower-level minima found at its solution
    """
    r: int
    cost: float
    coefficients: np.ndarray
    cuts_added: int
    cuts_rejected: int
    worst_minimum: float
    violations: int
    qp_iterations: int
    qp_status: QpStatus
    qp_time: float


@dataclass(frozen=True, eq=False)
class FitResult:
    coefficients: SplineCoefficients
    cost: float
    method: Method
    cp_trace: tuple
    cuts: Optional[CutSet]
    wall_time: float
    assembly_time: float
    termination: Termination
    qp_solution: QpSolution
    minimizers: tuple
    grid_min: float
    shift: float = 0.0

    @property
    def cp_iterations(self):
        return len(self.cp_trace)

    @property
    def total_cuts(self):
        return self.cuts.total if self.cuts is not None else 0

    @property
    def worst_minimum(self):
        return min(mz.min_value for mz in self.minimizers)


def _prepare(dataset, partition, config):
    partition = partition if partition is not None else dataset.partition()
    started = time.perf_counter()
    matrices = build_problem(dataset.x, dataset.y, partition, config.degree)
    return matrices, time.perf_counter() - started


def _piece_minima(coefficients, strategy):
    return tuple(minimize_piece(coefficients.piece(i), strategy) for i in range(coefficients.m))


def _require_optimal(solution, method, trace=()):
    if not solution.optimal:
        raise SolverFailure(
            f'{method.value}: QP ended with status {solution.status.value} '
            f'(KKT residual {solution.kkt_residuals.max():.3e})',
            trace,
        )


def _warn_negative(dataset, method):
    if not dataset.nonnegative:
        logger.warning('%s: data contain negative y values; the fit is still well-posed', method.value)


def _result(method, matrices, config, solution, started, assembly_time,
            cuts, trace=(), termination=Termination.CONVERGED, shift=0.0):
    coefficients = SplineCoefficients(config.degree, matrices.partition, solution.b + shift)
    return FitResult(
        coefficients=coefficients,
        cost=matrices.cost(coefficients.b, config.lam),
        method=method,
        cp_trace=tuple(trace),
        cuts=cuts,
        wall_time=time.perf_counter() - started,
        assembly_time=assembly_time,
        termination=termination,
        qp_solution=solution,
        minimizers=_piece_minima(coefficients, config.root_strategy),
        grid_min=grid_minimum(coefficients, config.grid_points),
        shift=shift,
    )


def fit_standard(dataset, partition=None, config=None):
    """
    Unconstrained smoothing spline (only the C2 continuity rows)
    """
    config = config or FitConfig()
    matrices, assembly_time = _prepare(dataset, partition, config)
    started = time.perf_counter()
    solution = solve_qp(matrices.to_qp(config.lam), config.qp)
    _require_optimal(solution, Method.STANDARD)
    return _result(Method.STANDARD, matrices, config, solution, started, assembly_time,
                   CutSet.empty(matrices.partition.m))


def fit_sufficient_qp(dataset, partition=None, config=None):
    """
    Smoothing with every Bernstein coefficient >= 0, which is sufficient
    but not necessary for a nonnegative spline
    """
    config = config or FitConfig()
    _warn_negative(dataset, Method.SUFFICIENT_QP)
    matrices, assembly_time = _prepare(dataset, partition, config)
    started = time.perf_counter()
    n = matrices.n_coeffs
    problem = matrices.to_qp(config.lam, C=sparse.identity(n, format='csc'), c=np.zeros(n))
    solution = solve_qp(problem, config.qp)
    _require_optimal(solution, Method.SUFFICIENT_QP)
    return _result(Method.SUFFICIENT_QP, matrices, config, solution, started, assembly_time, None)


def fit_cutting_plane(dataset, partition=None, config=None):
    """
    Exact nonnegative smoothing by the cutting-plane method.

    Round r solves the QP relaxed to the current cut set, minimizes every
    piece of the solution over [0, 1] and, for each piece whose minimum is
    below -eps, adds that piece's minimizer as a new cut. The loop ends when
    no piece violates (converged), when only duplicate cuts are proposed
    (stalled) or after max_cp_iterations rounds (max_iters).
    """
    config = config or FitConfig()
    _warn_negative(dataset, Method.CUTTING_PLANE)
    matrices, assembly_time = _prepare(dataset, partition, config)
    started = time.perf_counter()
    degree, m = config.degree, matrices.partition.m
    base = matrices.to_qp(config.lam)

    cuts = CutSet.empty(m)
    trace = []
    termination = Termination.MAX_ITERS
    for r in range(config.max_cp_iterations):
        solved_cuts = cuts
        G = build_G(cuts, degree, m)
        solution = solve_qp(dataclasses.replace(base, C=G, c=np.zeros(G.shape[0])), config.qp)
        _require_optimal(solution, Method.CUTTING_PLANE, trace)

        coefficients = SplineCoefficients(degree, matrices.partition, solution.b)
        minimizers = _piece_minima(coefficients, config.root_strategy)
        worst = min(mz.min_value for mz in minimizers)
        violating = {i: mz.tau_star for i, mz in enumerate(minimizers) if mz.min_value < -config.epsilon}
        accepted = {i: tau for i, tau in violating.items() if not cuts.contains_near(i, tau)}
        rejected = len(violating) - len(accepted)

        cost = matrices.cost(solution.b, config.lam)
        trace.append(CpIteration(
            r=r,
            cost=cost,
            coefficients=coefficients.b,
            cuts_added=len(accepted),
            cuts_rejected=rejected,
            worst_minimum=worst,
            violations=len(violating),
            qp_iterations=solution.iterations,
            qp_status=solution.status,
            qp_time=solution.wall_time,
        ))
        logger.debug('cp r=%d cost=%.12g cuts_added=%d rejected=%d worst_min=%.3e',
                     r, cost, len(accepted), rejected, worst)

        if not violating:
            termination = Termination.CONVERGED
            break
        if not accepted:
            if worst < -config.epsilon - STALL_MARGIN:
                logger.warning('cutting plane stalled at r=%d: %d violating pieces re-proposed existing cuts '
                               '(worst minimum %.3e)', r, rejected, worst)
                termination = Termination.STALLED
            else:
                termination = Termination.CONVERGED
            break
        cuts = cuts.with_points(accepted)

    if termination is Termination.MAX_ITERS:
        logger.warning('cutting plane hit max_cp_iterations=%d with worst piece minimum %.3e',
                       config.max_cp_iterations, trace[-1].worst_minimum)

    shift = 0.0
    if config.shift_negative and trace[-1].worst_minimum < 0.0:
        shift = -trace[-1].worst_minimum
        logger.info('shifting the fitted spline up by %.3e', shift)

    result = _result(Method.CUTTING_PLANE, matrices, config, solution, started, assembly_time,
                     solved_cuts, trace, termination, shift)
    logger.info('cutting plane %s after %d iterations: cost=%.12g cuts=%d worst_min=%.3e',
                termination.value, result.cp_iterations, result.cost, result.total_cuts,
                result.worst_minimum)
    return result


def fit_discretized_oracle(dataset, partition=None, config=None, grid_points_per_interval=None):
    """
    One QP with nonnegativity on a uniform tau grid in every interval.
    Converges to the exact optimum from below as the grid densifies.
    """
    config = config or FitConfig()
    points = config.grid_points if grid_points_per_interval is None else int(grid_points_per_interval)
    if points < 2:
        raise ConfigError('the oracle grid needs at least two points per interval')
    matrices, assembly_time = _prepare(dataset, partition, config)
    started = time.perf_counter()
    m = matrices.partition.m
    cuts = CutSet.from_grid(m, np.linspace(0.0, 1.0, points))
    G = build_G(cuts, config.degree, m)
    solution = solve_qp(matrices.to_qp(config.lam, C=G, c=np.zeros(G.shape[0])), config.qp)
    _require_optimal(solution, Method.DISCRETIZED_ORACLE)
    return _result(Method.DISCRETIZED_ORACLE, matrices, config, solution, started, assembly_time, cuts)


_FITTERS = {
    Method.STANDARD: fit_standard,
    Method.SUFFICIENT_QP: fit_sufficient_qp,
    Method.CUTTING_PLANE: fit_cutting_plane,
    Method.DISCRETIZED_ORACLE: fit_discretized_oracle,
}


def fit(method, dataset, partition=None, config=None):
    try:
        method = Method(method)
    except ValueError:
        raise ConfigError(f'unknown method {method!r}') from None
    return _FITTERS[method](dataset, partition, config)


def check_coefficient_bound(trace, reference, gamma):
    """
    For each recorded iterate b_r check

        ||b_ref - b_r||^2 <= (2 / gamma) (f(b_ref) - f(b_r)) + slack,
        slack = 1e-6 (1 + ||b_ref||^2)

    where the reference is a strictly more accurate solve.
    """
    b_ref = reference.coefficients.b
    slack = 1e-6 * (1.0 + float(b_ref @ b_ref))
    outcome = []
    for step in trace:
        distance = float(np.sum((b_ref - step.coefficients) ** 2))
        outcome.append(distance <= 2.0 / gamma * (reference.cost - step.cost) + slack)
    return tuple(outcome)


def _constraint_rows(result, n):
    if result.cuts is None:
        return sparse.identity(n, format='csr')
    return build_G(result.cuts, result.coefficients.degree, result.coefficients.m).tocsr()


def _minimizer_rows(result, n):
    degree = result.coefficients.degree
    rows = sparse.lil_matrix((len(result.minimizers), n))
    for i, mz in enumerate(result.minimizers):
        rows[i, degree * i:degree * i + degree + 1] = g_tau(mz.tau_star, degree)
    return rows.tocsr()


def verify_kkt_certificate(result, matrices, lam, multipliers=None):
    """
    Residuals of the finite KKT system

        grad f(b) - G'mu + H'nu = 0,  Hb = 0,  Gb >= 0,  mu o Gb = 0

    where G stacks the constraint rows of the last solve and one row per
    final piece minimizer (whose multipliers are zero). multipliers
    overrides the solver's mu for the first block.
    """
    b = result.coefficients.b
    n = b.size
    rows = _constraint_rows(result, n)
    G = sparse.vstack([rows, _minimizer_rows(result, n)], format='csr')
    mu = result.qp_solution.mu if multipliers is None else np.asarray(multipliers, dtype=float)
    mu = np.concatenate([mu, np.zeros(G.shape[0] - mu.size)])
    nu = result.qp_solution.nu
    values = G @ b

    def norm(v):
        return float(np.max(np.abs(v))) if v.size else 0.0

    return KktResiduals(
        stationarity=norm(matrices.gradient(b, lam) - G.T @ mu + matrices.H.T @ nu),
        primal_eq=norm(matrices.H @ b),
        primal_ineq=norm(np.minimum(values, 0.0)),
        complementarity=norm(mu * values),
    )
