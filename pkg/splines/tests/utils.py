"""Helpers shared by the library tests."""
import math

import numpy as np
from numpy.polynomial import Polynomial

from splines.bezier import Partition, SplineCoefficients
from splines.data import Dataset


def bernstein_from_monomial(c, degree):
    """Bernstein coefficients of sum_j c_j tau^j (len(c) <= degree + 1)."""
    c = np.concatenate([np.asarray(c, dtype=float), np.zeros(degree + 1 - len(c))])
    return np.array([
        sum(math.comb(k, j) / math.comb(degree, j) * c[j] for j in range(k + 1))
        for k in range(degree + 1)
    ])


def spline_from_polynomial(coef, knots, degree):
    """Piecewise Bernstein form of one global polynomial (ascending coefficients)."""
    partition = Partition(knots)
    global_poly = Polynomial(coef)
    b = np.empty(degree * partition.m + 1)
    for i in range(partition.m):
        local = global_poly(Polynomial([partition.knots[i], partition.widths[i]]))
        b[degree * i:degree * i + degree + 1] = bernstein_from_monomial(local.coef, degree)
    return SplineCoefficients(degree, partition, b)


def random_partition(rng, m, low=0.3, high=1.5):
    return Partition(np.concatenate([[0.0], np.cumsum(rng.uniform(low, high, m))]))


def rule_dataset(n, seed):
    """x = 0..n, y = |z| with indices 2, 3 (mod 5) scaled by 1/100."""
    rng = np.random.default_rng(seed)
    x = np.arange(n + 1, dtype=float)
    y = np.abs(rng.standard_normal(n + 1))
    y[np.isin(np.arange(n + 1) % 5, (2, 3))] /= 100.0
    return Dataset(x, y, seed=seed)


def dip_dataset():
    """A step down to zero and back; interpolating splines undershoot below 0."""
    x = np.arange(10, dtype=float)
    y = np.array([1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0])
    return Dataset(x, y)
