"""
Spline functions in Bernstein-Bezier form.

A spline of degree d on knots xi_0 < ... < xi_m is stored as one coefficient
vector b of length d*m + 1. Piece i (0-based) uses b[d*i : d*i + d + 1] over
the normalized variable tau = (x - xi_i) / width_i in [0, 1]; adjacent pieces
share their boundary coefficient, so s(xi_i) = b[d*i].
"""
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

logger = logging.getLogger(__name__)

MIN_SPLINE_DEGREE = 3


def frozen_array(values):
    """
    Read-only float copy of values
    """
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def _check_unit_interval(tau):
    if np.any(np.isnan(tau)) or np.any(tau < 0.0) or np.any(tau > 1.0):
        raise DomainError('tau must lie in [0, 1]')


@functools.lru_cache(maxsize=None)
def binomial_row(degree):
    """
    Binomial coefficients C(degree, k) for k = 0..degree
    """
    if degree < 0:
        raise DomainError(f'degree must be non-negative, got {degree}')
    return frozen_array([math.comb(degree, k) for k in range(degree + 1)])


def bernstein_basis(tau, degree):
    """
    Bernstein basis values C(d, k) (1 - tau)^(d - k) tau^k.

    Returns shape (degree + 1,) for a scalar tau and (N, degree + 1) for an
    array of N values.
    """
    t = np.asarray(tau, dtype=float)
    _check_unit_interval(t)
    k = np.arange(degree + 1)
    flat = t.reshape(-1, 1)
    basis = binomial_row(degree) * flat ** k * (1.0 - flat) ** (degree - k)
    if t.ndim == 0:
        return basis[0]
    return basis


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Strictly increasing knot sequence xi_0 < xi_1 < ... < xi_m
    """
    knots: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        if knots.ndim != 1 or knots.size < 2:
            raise DomainError('a partition needs at least two knots')
        if not np.all(np.isfinite(knots)):
            raise DomainError('knots must be finite')
        if np.any(np.diff(knots) <= 0.0):
            raise DomainError('knots must be strictly increasing')
        object.__setattr__(self, 'knots', frozen_array(knots))
        object.__setattr__(self, '_widths', frozen_array(np.diff(knots)))

    @property
    def m(self):
        return self.knots.size - 1

    @property
    def widths(self):
        return self._widths

    @property
    def start(self):
        return float(self.knots[0])

    @property
    def end(self):
        return float(self.knots[-1])

    def locate(self, x):
        """
        Interval index and normalized tau for each abscissa.

        Interior knots go to the right-hand piece at tau = 0; the last knot
        goes to the last piece at tau = 1.
        """
        values = np.asarray(x, dtype=float)
        if np.any(np.isnan(values)) or np.any(values < self.knots[0]) or np.any(values > self.knots[-1]):
            raise DomainError(f'x must lie in [{self.start}, {self.end}]')
        index = np.searchsorted(self.knots, values, side='right') - 1
        index = np.minimum(index, self.m - 1)
        tau = (values - self.knots[index]) / self._widths[index]
        return index, np.clip(tau, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class LocalPolynomial:
    """
    One polynomial piece: d + 1 Bernstein coefficients over tau in [0, 1]
    """
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise DomainError('a polynomial piece needs at least one coefficient')
        object.__setattr__(self, 'coeffs', frozen_array(coeffs))

    @property
    def degree(self):
        return self.coeffs.size - 1


@dataclass(frozen=True, eq=False)
class SplineCoefficients:
    """
    Coefficient vector b of a degree-d spline on a partition
    """
    degree: int
    partition: Partition
    b: np.ndarray

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < MIN_SPLINE_DEGREE:
            raise DomainError(f'spline degree must be an integer >= {MIN_SPLINE_DEGREE}')
        b = np.asarray(self.b, dtype=float)
        expected = self.degree * self.partition.m + 1
        if b.shape != (expected,):
            raise DomainError(f'expected {expected} coefficients, got shape {b.shape}')
        object.__setattr__(self, 'degree', int(self.degree))
        object.__setattr__(self, 'b', frozen_array(b))

    @property
    def m(self):
        return self.partition.m

    def piece(self, i):
        d = self.degree
        return LocalPolynomial(self.b[d * i:d * i + d + 1])

    def piece_matrix(self):
        """
        All piece coefficient vectors as an (m, d + 1) array
        """
        d = self.degree
        windows = np.lib.stride_tricks.sliding_window_view(self.b, d + 1)
        return np.array(windows[::d])

    def __call__(self, x):
        return evaluate_spline(self, x)


def _de_casteljau(columns, tau):
    # columns: (d + 1, N) coefficients, one column per evaluation point
    beta = np.array(columns, dtype=float)
    s = 1.0 - tau
    for _ in range(beta.shape[0] - 1):
        beta = s * beta[:-1] + tau * beta[1:]
    return beta[0]


def evaluate_piece(p, tau):
    """
    Value of a piece at tau via de Casteljau recursion
    """
    t = np.asarray(tau, dtype=float)
    _check_unit_interval(t)
    flat = t.ravel()
    columns = np.repeat(p.coeffs[:, None], flat.size, axis=1)
    values = _de_casteljau(columns, flat)
    if t.ndim == 0:
        return float(values[0])
    return values.reshape(t.shape)


def evaluate_spline(s, x):
    """
    Value of the spline at x in [xi_0, xi_m]
    """
    values = np.asarray(x, dtype=float)
    index, tau = s.partition.locate(values.ravel())
    columns = s.piece_matrix()[index].T
    result = _de_casteljau(columns, tau)
    if values.ndim == 0:
        return float(result[0])
    return result.reshape(values.shape)


@functools.lru_cache(maxsize=None)
def _derivative_matrix(degree):
    # M[l, k] = d! (-1)^(l-k) / ((d-l-1)! (l-k)! k!), exact in integers
    matrix = np.zeros((degree, degree))
    d_fact = math.factorial(degree)
    for l in range(degree):
        for k in range(l + 1):
            den = math.factorial(degree - l - 1) * math.factorial(l - k) * math.factorial(k)
            matrix[l, k] = (-1) ** (l - k) * (d_fact // den)
    matrix.setflags(write=False)
    return matrix


def derivative_monomial_coeffs(p):
    """
    Monomial coefficients (ascending powers of tau) of dp/dtau
    """
    if p.degree < 1:
        raise DomainError('derivative coefficients need degree >= 1')
    return _derivative_matrix(p.degree) @ np.diff(p.coeffs)


def grid_minimum(s, points_per_interval):
    """
    Minimum of the spline over a uniform tau grid in every interval
    """
    if points_per_interval < 2:
        raise DomainError('the grid needs at least two points per interval')
    basis = bernstein_basis(np.linspace(0.0, 1.0, int(points_per_interval)), s.degree)
    return float(np.min(basis @ s.piece_matrix().T))


def elevate_degree(s):
    """
    The same spline written with degree d + 1 pieces.

    Used to check that the degree-d spline space sits inside the
    degree-(d + 1) space with identical costs.
    """
    d = s.degree
    pieces = s.piece_matrix()
    j = np.arange(1, d + 1) / (d + 1)
    raised = np.empty((s.m, d + 2))
    raised[:, 0] = pieces[:, 0]
    raised[:, -1] = pieces[:, -1]
    raised[:, 1:-1] = j * pieces[:, :-1] + (1.0 - j) * pieces[:, 1:]
    b = np.empty((d + 1) * s.m + 1)
    for i in range(s.m):
        b[(d + 1) * i:(d + 1) * (i + 1) + 1] = raised[i]
    return SplineCoefficients(d + 1, s.partition, b)
