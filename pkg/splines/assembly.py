"""
Problem matrices for spline smoothing: fidelity A, roughness Q,
C2 continuity H, nonnegativity rows g_tau and the cut matrix G
"""
import functools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import sparse

from .bezier import Partition, bernstein_basis, frozen_array
from .exceptions import DomainError
from .qpsolve import QpProblem

logger = logging.getLogger(__name__)

# A new cut closer than this to an existing one in the same interval is a duplicate.
DUPLICATE_TOLERANCE = 1e-12

# second-difference weights e_0, e_1, e_2
_SECOND_DIFFERENCE = (1, -2, 1)


@dataclass(frozen=True, eq=False)
class CutSet:
    """
    Per-interval sorted tau points where nonnegativity is enforced
    """
    points: tuple

    def __post_init__(self):
        cleaned = []
        for taus in self.points:
            values = tuple(sorted(float(t) for t in taus))
            if any(not 0.0 <= t <= 1.0 for t in values):
                raise DomainError('cut points must lie in [0, 1]')
            cleaned.append(values)
        object.__setattr__(self, 'points', tuple(cleaned))

    @classmethod
    def empty(cls, m):
        return cls(tuple(() for _ in range(m)))

    @classmethod
    def from_grid(cls, m, taus):
        grid = tuple(sorted(float(t) for t in taus))
        return cls((grid,) * m)

    @property
    def m(self):
        return len(self.points)

    @property
    def total(self):
        return sum(len(taus) for taus in self.points)

    def pairs(self):
        for i, taus in enumerate(self.points):
            for tau in taus:
                yield i, tau

    def contains_near(self, i, tau, tol=DUPLICATE_TOLERANCE):
        return any(abs(existing - tau) <= tol for existing in self.points[i])

    def with_points(self, additions):
        """
        Union with {interval: tau}; the original set is left unchanged
        """
        points = [list(taus) for taus in self.points]
        for i, tau in additions.items():
            points[i].append(tau)
        return CutSet(tuple(tuple(taus) for taus in points))

    def issubset(self, other):
        if self.m != other.m:
            return False
        return all(set(mine) <= set(theirs) for mine, theirs in zip(self.points, other.points))


def _coo(rows, cols, values, shape):
    return sparse.coo_matrix((values, (rows, cols)), shape=shape).tocsc()


def build_A(x, partition, degree):
    """
    Row i holds the Bernstein basis at x_i in the columns of its piece
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError('sample abscissae must be one-dimensional')
    if np.any(np.diff(x) <= 0.0):
        raise DomainError('sample abscissae must be strictly increasing')
    index, tau = partition.locate(x)
    basis = bernstein_basis(tau, degree)
    width = degree + 1
    rows = np.repeat(np.arange(x.size), width)
    cols = (degree * index[:, None] + np.arange(width)).ravel()
    A = _coo(rows, cols, basis.ravel(), (x.size, degree * partition.m + 1))
    A.eliminate_zeros()
    return A


@functools.lru_cache(maxsize=None)
def roughness_block(degree):
    """
    Unscaled (d + 1) x (d + 1) block of the second-derivative energy on a
    unit interval, accumulated exactly in rational arithmetic
    """
    if degree < 2:
        raise DomainError('the roughness penalty needs degree >= 2')
    d = degree
    fact = math.factorial
    block = np.zeros((d + 1, d + 1))
    for k in range(d + 1):
        for l in range(d + 1):
            total = Fraction(0)
            for v, e_v in enumerate(_SECOND_DIFFERENCE):
                if not v <= k <= d + v - 2:
                    continue
                for w, e_w in enumerate(_SECOND_DIFFERENCE):
                    if not w <= l <= d + w - 2:
                        continue
                    numerator = fact(d) ** 2 * fact(2 * d - k - l + v + w - 4) * fact(k + l - v - w)
                    denominator = (fact(2 * d - 3) * fact(d - k + v - 2) * fact(k - v)
                                   * fact(d - l + w - 2) * fact(l - w))
                    total += e_v * e_w * Fraction(numerator, denominator)
            block[k, l] = float(total)
    return frozen_array(block)


def build_Q(partition, degree):
    """
    Block-accumulated roughness matrix, block i scaled by 1 / width_i^3
    """
    block = roughness_block(degree)
    width = degree + 1
    local = np.arange(width)
    offsets = degree * np.arange(partition.m)
    rows = (offsets[:, None, None] + local[None, :, None]).repeat(width, axis=2)
    cols = (offsets[:, None, None] + local[None, None, :]).repeat(width, axis=1)
    values = block[None, :, :] / partition.widths[:, None, None] ** 3
    size = degree * partition.m + 1
    return _coo(rows.ravel(), cols.ravel(), values.ravel(), (size, size))


def build_H(partition, degree):
    """
    First and second derivative continuity at the interior knots.
    Rows are ordered (knot 1, l=1), (knot 1, l=2), (knot 2, l=1), ...
    """
    m, widths = partition.m, partition.widths
    rows, cols, values = [], [], []
    for i in range(1, m):
        center = degree * i
        for l in (1, 2):
            row = 2 * (i - 1) + (l - 1)
            for k in range(l + 1):
                weight = (-1) ** (l - k) * math.comb(l, k)
                rows.extend([row, row])
                cols.extend([center + k - l, center + k])
                values.extend([weight / widths[i - 1] ** l, -weight / widths[i] ** l])
    return _coo(rows, cols, values, (2 * (m - 1), degree * m + 1))


def g_tau(tau, degree):
    """
    Bernstein row g_tau with g_tau' b_i = p_i(tau)
    """
    if np.ndim(tau) != 0:
        raise DomainError('g_tau takes a single tau')
    return bernstein_basis(float(tau), degree)


def build_G(cuts, degree, m):
    """
    One row per cut point, grouped by interval and sorted by tau
    """
    if cuts.m != m:
        raise DomainError(f'cut set has {cuts.m} intervals, expected {m}')
    width = degree + 1
    row_blocks, col_blocks, value_blocks = [], [], []
    offset = 0
    for i, taus in enumerate(cuts.points):
        if not taus:
            continue
        basis = bernstein_basis(np.asarray(taus), degree)
        count = len(taus)
        row_blocks.append(np.repeat(np.arange(offset, offset + count), width))
        col_blocks.append(np.tile(degree * i + np.arange(width), count))
        value_blocks.append(basis.ravel())
        offset += count
    shape = (offset, degree * m + 1)
    if not offset:
        return sparse.csc_matrix(shape)
    return _coo(np.concatenate(row_blocks), np.concatenate(col_blocks),
                np.concatenate(value_blocks), shape)


@dataclass(frozen=True, eq=False)
class ProblemMatrices:
    A: sparse.csc_matrix
    Q: sparse.csc_matrix
    H: sparse.csc_matrix
    x: np.ndarray
    y: np.ndarray
    partition: Partition
    degree: int

    @property
    def n_coeffs(self):
        return self.degree * self.partition.m + 1

    def cost(self, b, lam):
        """
        f(b) = ||y - Ab||^2 + lam b'Qb
        """
        residual = self.y - self.A @ b
        return float(residual @ residual + lam * b @ (self.Q @ b))

    def gradient(self, b, lam):
        return 2.0 * (self.A.T @ (self.A @ b - self.y)) + 2.0 * lam * (self.Q @ b)

    def to_qp(self, lam, C=None, c=None):
        """
        QP with objective f(b) - y'y, equality Hb = 0 and optional Cb >= c
        """
        P = (2.0 * (self.A.T @ self.A + lam * self.Q)).tocsc()
        P = 0.5 * (P + P.T)
        return QpProblem(P=P, q=-2.0 * (self.A.T @ self.y), E=self.H, C=C, c=c)


def build_problem(x, y, partition, degree):
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape != x.shape:
        raise DomainError('x and y must have the same length')
    return ProblemMatrices(
        A=build_A(x, partition, degree),
        Q=build_Q(partition, degree),
        H=build_H(partition, degree),
        x=frozen_array(x),
        y=frozen_array(y),
        partition=partition,
        degree=degree,
    )
