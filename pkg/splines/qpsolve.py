"""
Primal-dual interior-point solver for convex quadratic programs

    minimize    1/2 b'Pb + q'b
    subject to  Eb = e,  Cb >= c

with Mehrotra predictor-corrector steps on the augmented KKT system.
Multipliers follow the sign convention  Pb + q - C'mu + E'nu = 0, mu >= 0.
"""
import enum
import logging
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import splu

from .exceptions import ConfigError, DegenerateProblemError, QpConstructionError

logger = logging.getLogger(__name__)

GAMMA_FLOOR = 1e-10


class QpStatus(str, enum.Enum):
    OPTIMAL = 'optimal'
    MAX_ITERS = 'max_iters'
    NUMERICAL_FAILURE = 'numerical_failure'


@dataclass(frozen=True)
class QpSettings:
    tol: float = 1e-9
    max_iterations: int = 100
    step_fraction: float = 0.99

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ConfigError('QP tolerance must be positive')
        if self.max_iterations < 1:
            raise ConfigError('QP max_iterations must be at least 1')
        if not 0.0 < self.step_fraction < 1.0:
            raise ConfigError('step_fraction must lie in (0, 1)')


class KktResiduals(NamedTuple):
    """
    Max-norms of the four KKT conditions
    """
    stationarity: float
    primal_eq: float
    primal_ineq: float
    complementarity: float

    def max(self):
        return max(self)


def _as_csc(matrix, shape=None):
    if sparse.issparse(matrix):
        result = matrix.tocsc().astype(float)
    else:
        result = sparse.csc_matrix(np.atleast_2d(np.asarray(matrix, dtype=float)))
    if shape is not None and result.shape != shape:
        raise QpConstructionError(f'expected a {shape} matrix, got {result.shape}')
    return result


def _as_vector(values, size, name):
    vector = np.zeros(size) if values is None else np.asarray(values, dtype=float).ravel()
    if vector.size != size:
        raise QpConstructionError(f'{name} must have {size} entries, got {vector.size}')
    return vector


@dataclass(frozen=True, eq=False)
class QpProblem:
    P: sparse.csc_matrix
    q: np.ndarray
    E: sparse.csc_matrix = None
    e: np.ndarray = None
    C: sparse.csc_matrix = None
    c: np.ndarray = None

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        n = q.size
        P = _as_csc(self.P, (n, n))
        asymmetry = abs(P - P.T).max() if P.nnz else 0.0
        if asymmetry > 1e-12 * (1.0 + abs(P).max()):
            raise QpConstructionError('P must be symmetric')
        E = sparse.csc_matrix((0, n)) if self.E is None else _as_csc(self.E)
        C = sparse.csc_matrix((0, n)) if self.C is None else _as_csc(self.C)
        for name, matrix in (('E', E), ('C', C)):
            if matrix.shape[1] != n:
                raise QpConstructionError(f'{name} must have {n} columns, got {matrix.shape[1]}')
        object.__setattr__(self, 'P', P)
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'E', E)
        object.__setattr__(self, 'e', _as_vector(self.e, E.shape[0], 'e'))
        object.__setattr__(self, 'C', C)
        object.__setattr__(self, 'c', _as_vector(self.c, C.shape[0], 'c'))

    @property
    def n(self):
        return self.q.size

    @property
    def n_eq(self):
        return self.E.shape[0]

    @property
    def n_ineq(self):
        return self.C.shape[0]

    def objective(self, b):
        return float(0.5 * b @ (self.P @ b) + self.q @ b)


@dataclass(frozen=True, eq=False)
class QpSolution:
    b: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    status: QpStatus
    kkt_residuals: KktResiduals
    iterations: int
    wall_time: float

    @property
    def optimal(self):
        return self.status is QpStatus.OPTIMAL


def _residuals(problem, b, mu, nu):
    stationarity = problem.P @ b + problem.q - problem.C.T @ mu + problem.E.T @ nu
    slack = problem.C @ b - problem.c
    primal_eq = problem.E @ b - problem.e

    def norm(v):
        return float(np.max(np.abs(v))) if v.size else 0.0

    return KktResiduals(
        stationarity=norm(stationarity),
        primal_eq=norm(primal_eq),
        primal_ineq=norm(np.minimum(slack, 0.0)),
        complementarity=norm(mu * slack),
    )


def kkt_residuals(problem, solution):
    """
    Stationarity, equality, inequality-violation and complementarity
    residuals of a solution, as max-norms
    """
    return _residuals(problem, solution.b, solution.mu, solution.nu)


class _KktSystem:
    """
    Factorized augmented system [[K, E'], [E, 0]]
    """

    def __init__(self, K, E):
        self.n = K.shape[0]
        if E.shape[0]:
            matrix = sparse.bmat([[K, E.T], [E, None]], format='csc')
        else:
            matrix = sparse.csc_matrix(K)
        self.matrix = matrix
        self.lu = splu(matrix)

    def solve(self, top, bottom):
        rhs = np.concatenate([top, bottom])
        x = self.lu.solve(rhs)
        # one step of iterative refinement
        x = x + self.lu.solve(rhs - self.matrix @ x)
        if not np.all(np.isfinite(x)):
            raise np.linalg.LinAlgError('non-finite solution of the KKT system')
        return x[:self.n], x[self.n:]


def _max_step(v, dv):
    falling = dv < 0.0
    if not np.any(falling):
        return np.inf
    return float(np.min(-v[falling] / dv[falling]))


def _solve_equality(problem, settings):
    system = _KktSystem(problem.P, problem.E)
    b, nu = system.solve(-problem.q, problem.e)
    mu = np.zeros(0)
    iterations = 1
    residuals = _residuals(problem, b, mu, nu)
    while residuals.max() > settings.tol and iterations < 4:
        db, dnu = system.solve(
            -(problem.P @ b + problem.q + problem.E.T @ nu),
            -(problem.E @ b - problem.e),
        )
        b, nu = b + db, nu + dnu
        iterations += 1
        residuals = _residuals(problem, b, mu, nu)
    status = QpStatus.OPTIMAL if residuals.max() <= settings.tol else QpStatus.NUMERICAL_FAILURE
    return b, mu, nu, status, iterations


def _interior_point(problem, settings):
    P, q, E, e, C, c = problem.P, problem.q, problem.E, problem.e, problem.C, problem.c
    count = problem.n_ineq

    # Mehrotra-style start: regularized equality solve, slacks pushed to >= 1
    start = _KktSystem((P + C.T @ C).tocsc(), E)
    b, nu = start.solve(-q + C.T @ c, e)
    s = np.maximum(C @ b - c, 1.0)
    mu = np.ones(count)

    for iteration in range(settings.max_iterations + 1):
        if _residuals(problem, b, mu, nu).max() <= settings.tol:
            return b, mu, nu, QpStatus.OPTIMAL, iteration
        if iteration == settings.max_iterations:
            break

        r_dual = P @ b + q - C.T @ mu + E.T @ nu
        r_eq = E @ b - e
        r_ineq = C @ b - s - c
        gap = float(s @ mu) / count
        scaling = mu / s
        system = _KktSystem((P + C.T @ sparse.diags(scaling) @ C).tocsc(), E)

        def direction(r_comp):
            db, dnu = system.solve(-r_dual + C.T @ ((r_comp - mu * r_ineq) / s), -r_eq)
            ds = C @ db + r_ineq
            dmu = (r_comp - mu * ds) / s
            return db, dnu, ds, dmu

        # predictor
        _, _, ds_aff, dmu_aff = direction(-s * mu)
        alpha = min(1.0, _max_step(s, ds_aff), _max_step(mu, dmu_aff))
        gap_aff = float((s + alpha * ds_aff) @ (mu + alpha * dmu_aff)) / count
        sigma = (gap_aff / gap) ** 3 if gap > 0.0 else 0.0

        # corrector
        db, dnu, ds, dmu = direction(-s * mu - ds_aff * dmu_aff + sigma * gap)
        alpha = min(1.0, settings.step_fraction * min(_max_step(s, ds), _max_step(mu, dmu)))
        b = b + alpha * db
        nu = nu + alpha * dnu
        s = s + alpha * ds
        mu = mu + alpha * dmu
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(mu))):
            return b, mu, nu, QpStatus.NUMERICAL_FAILURE, iteration + 1

    return b, mu, nu, QpStatus.MAX_ITERS, settings.max_iterations


def solve_qp(problem, settings=None):
    """
    Solve a convex QP; never raises on numerical trouble, the status
    field reports it instead
    """
    settings = settings or QpSettings()
    started = time.perf_counter()
    try:
        if problem.n_ineq == 0:
            b, mu, nu, status, iterations = _solve_equality(problem, settings)
        else:
            b, mu, nu, status, iterations = _interior_point(problem, settings)
    except (RuntimeError, np.linalg.LinAlgError, FloatingPointError) as exc:
        logger.warning('QP factorization broke down: %s', exc)
        b = np.full(problem.n, np.nan)
        mu = np.full(problem.n_ineq, np.nan)
        nu = np.full(problem.n_eq, np.nan)
        status, iterations = QpStatus.NUMERICAL_FAILURE, 0

    residuals = _residuals(problem, b, mu, nu)
    if status is not QpStatus.OPTIMAL:
        logger.warning('QP finished with status %s after %d iterations (residual %.3e)',
                       status.value, iterations, residuals.max())
    return QpSolution(
        b=b,
        mu=mu,
        nu=nu,
        status=status,
        kkt_residuals=residuals,
        iterations=iterations,
        wall_time=time.perf_counter() - started,
    )


@dataclass(frozen=True, eq=False)
class NullSpace:
    basis: np.ndarray
    rank: int
    rank_deficient: bool


def _dense(matrix):
    return matrix.toarray() if sparse.issparse(matrix) else np.atleast_2d(np.asarray(matrix, dtype=float))


def null_space_basis(E):
    """
    Orthonormal basis of {b : Eb = 0} from the SVD of E
    """
    dense = _dense(E)
    rows, cols = dense.shape
    if rows == 0:
        return NullSpace(np.eye(cols), 0, False)
    basis = scipy.linalg.null_space(dense)
    rank = cols - basis.shape[1]
    deficient = rank < rows
    if deficient:
        logger.warning('constraint matrix has numerical rank %d < %d rows', rank, rows)
    return NullSpace(basis, rank, deficient)


def strong_convexity_gamma(A, Q, lam, H):
    """
    Strong convexity constant of ||y - Ab||^2 + lam b'Qb on null(H):
    twice the smallest eigenvalue of V'(A'A + lam Q)V
    """
    if lam <= 0.0:
        raise ConfigError('the smoothing parameter must be positive')
    V = null_space_basis(H).basis
    A = _dense(A)
    hessian_half = A.T @ A + lam * _dense(Q)
    reduced = V.T @ hessian_half @ V
    reduced = 0.5 * (reduced + reduced.T)
    smallest = scipy.linalg.eigh(reduced, eigvals_only=True, subset_by_index=[0, 0])[0]
    gamma = 2.0 * float(smallest)
    if gamma <= GAMMA_FLOOR:
        raise DegenerateProblemError(f'cost is not strongly convex on null(H): gamma = {gamma:.3e}')
    return gamma
