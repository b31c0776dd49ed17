"""
Real roots of univariate polynomials and exact minimization of one
Bernstein piece over [0, 1].

Coefficient vectors are in ascending powers: c[0] + c[1] t + c[2] t^2 + ...
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as poly
import scipy.linalg

from .bezier import derivative_monomial_coeffs, evaluate_piece
from .exceptions import DegenerateInputError

logger = logging.getLogger(__name__)

# Eigenvalues with |imag| below this are accepted as real roots.
IMAG_TOLERANCE = 1e-8
# Pieces whose derivative coefficients are all below this are flat.
FLAT_TOLERANCE = 1e-14
# Roots within this band outside [0, 1] are clamped, the rest dropped.
UNIT_BAND = 1e-12
# Candidate values this close to the minimum count as ties.
TIE_TOLERANCE = 1e-12

NEWTON_STEPS = 2
NEWTON_STOP = 1e-14
_LEADING_TOLERANCE = 1e-14
_DISCRIMINANT_TOLERANCE = 1e-12
# Quadratic discriminants this small relative to their terms are a double root.
_DOUBLE_ROOT_TOLERANCE = 1e-10
# Cubic discriminants within this many rounding-error estimates are zero.
_CUBIC_ERROR_FACTOR = 64.0
# Polished roots closer than this (relative) are one root; double roots
# polish to pairs about sqrt(eps) apart.
_MERGE_TOLERANCE = 1e-6
_EPS = float(np.finfo(float).eps)


class RootMethod(str, enum.Enum):
    """
    How the lower-level minimizer was obtained
    """
    CLOSED_FORM = 'closed_form'
    COMPANION_MATRIX = 'companion_matrix'
    CONSTANT_PIECE = 'constant_piece'


@dataclass(frozen=True)
class PieceMinimizer:
    tau_star: float
    min_value: float
    method: RootMethod


def _coefficients(c, size):
    array = np.asarray(c, dtype=float).ravel()
    if array.size != size:
        raise ValueError(f'expected {size} coefficients, got {array.size}')
    return array


def _degenerate(leading, c):
    return abs(leading) <= _LEADING_TOLERANCE * float(np.max(np.abs(c)))


def _polish(c, root):
    derivative = poly.polyder(c)
    for _ in range(NEWTON_STEPS):
        value = poly.polyval(root, c)
        slope = poly.polyval(root, derivative)
        if value == 0.0 or slope == 0.0:
            break
        step = value / slope
        candidate = root - step
        if abs(poly.polyval(candidate, c)) > abs(value):
            break
        root = candidate
        if abs(step) < NEWTON_STOP:
            break
    return root


def _finish(c, roots):
    """
    Newton-polish, sort and merge coincident roots
    """
    polished = sorted(float(_polish(c, r)) + 0.0 for r in roots if np.isfinite(r))
    clusters = []
    for root in polished:
        if clusters and root - clusters[-1][-1] <= _MERGE_TOLERANCE * (1.0 + abs(root)):
            clusters[-1].append(root)
        else:
            clusters.append([root])
    return [cluster[0] if len(cluster) == 1 else float(np.mean(cluster)) for cluster in clusters]


def roots_quadratic(c):
    """
    Real roots of c0 + c1 t + c2 t^2; a zero c2 degrades to the linear case
    """
    c = _coefficients(c, 3)
    c0, c1, c2 = c
    if not np.any(c):
        return []
    if c2 == 0.0 or _degenerate(c2, c):
        if c1 == 0.0:
            return []
        return _finish(c[:2], [-c0 / c1])
    disc = c1 * c1 - 4.0 * c2 * c0
    if abs(disc) <= _DOUBLE_ROOT_TOLERANCE * (c1 * c1 + abs(4.0 * c2 * c0)):
        return _finish(c, [-c1 / (2.0 * c2)])
    if disc < 0.0:
        return []
    # Sign-aware form avoids cancellation between -c1 and sqrt(disc)
    q = -0.5 * (c1 + math.copysign(math.sqrt(disc), c1))
    return _finish(c, [q / c2, c0 / q])


def roots_cubic(c):
    """
    Real roots of a cubic by Cardano / trigonometric branches
    """
    c = _coefficients(c, 4)
    if not np.any(c):
        return []
    if _degenerate(c[3], c):
        return roots_quadratic(c[:3])
    a2, a1, a0 = c[2] / c[3], c[1] / c[3], c[0] / c[3]
    shift = a2 / 3.0
    # depressed cubic t^3 + p t + q
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2 ** 3 / 27.0 - a2 * a1 / 3.0 + a0
    # rounding scale of p and q from the size of the roots
    size = max(abs(a2), math.sqrt(abs(a1)), abs(a0) ** (1.0 / 3.0))
    error_p = _CUBIC_ERROR_FACTOR * _EPS * size ** 2
    error_q = _CUBIC_ERROR_FACTOR * _EPS * size ** 3
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if p == 0.0 and q == 0.0:
        depressed = [0.0]
    elif abs(disc) <= abs(q) * error_q + p * p * error_p:
        # double root u and simple root -2u
        u = float(np.cbrt(q / 2.0))
        depressed = [u, -2.0 * u]
    else:
        if disc > 0.0:
            u = float(np.cbrt(-q / 2.0 - math.copysign(math.sqrt(disc), q)))
            v = -p / (3.0 * u) if u != 0.0 else 0.0
            depressed = [u + v]
        else:
            radius = 2.0 * math.sqrt(-p / 3.0)
            cos3 = -q / (2.0 * (-p / 3.0) ** 1.5)
            theta = math.acos(min(1.0, max(-1.0, cos3))) / 3.0
            depressed = [radius * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    return _finish(c, [t - shift for t in depressed])


def roots_quartic(c):
    """
    Real roots of a quartic by Ferrari's resolvent cubic
    """
    c = _coefficients(c, 5)
    if not np.any(c):
        return []
    if _degenerate(c[4], c):
        return roots_cubic(c[:4])
    a3, a2, a1, a0 = c[3] / c[4], c[2] / c[4], c[1] / c[4], c[0] / c[4]
    shift = a3 / 4.0
    # depressed quartic y^4 + p y^2 + q y + r
    p = a2 - 3.0 * a3 * a3 / 8.0
    q = a1 - a3 * a2 / 2.0 + a3 ** 3 / 8.0
    r = a0 - a3 * a1 / 4.0 + a3 * a3 * a2 / 16.0 - 3.0 * a3 ** 4 / 256.0
    scale = max(abs(p) ** 1.5, abs(r) ** 0.75, np.finfo(float).tiny)
    depressed = []
    if abs(q) <= _DISCRIMINANT_TOLERANCE * scale:
        # biquadratic: z = y^2
        for z in roots_quadratic([r, p, 1.0]):
            if z > 0.0:
                depressed.extend([math.sqrt(z), -math.sqrt(z)])
            elif z >= -_DISCRIMINANT_TOLERANCE * max(1.0, abs(p)):
                depressed.append(0.0)
    else:
        resolvent = roots_cubic([-q * q, 2.0 * p * p - 8.0 * r, 8.0 * p, 8.0])
        m = max(resolvent) if resolvent else 0.0
        if m <= 0.0:
            logger.debug('resolvent cubic gave no positive root, using companion matrix')
            return roots_numeric(c)
        s2 = math.sqrt(2.0 * m)
        half = p / 2.0 + m
        depressed.extend(roots_quadratic([half + q / (2.0 * s2), -s2, 1.0]))
        depressed.extend(roots_quadratic([half - q / (2.0 * s2), s2, 1.0]))
    return _finish(c, [y - shift for y in depressed])


def roots_numeric(c):
    """
    Real roots from the eigenvalues of the companion matrix
    """
    full = np.trim_zeros(np.asarray(c, dtype=float).ravel(), 'b')
    if full.size == 0:
        raise DegenerateInputError('all-zero coefficient vector has no finite root set')
    roots = []
    # exact zero roots are factored out; the companion of t^k is defective
    zeros = int(np.flatnonzero(full)[0])
    if zeros:
        roots.append(0.0)
    reduced = full[zeros:]
    if reduced.size >= 2:
        eigenvalues = scipy.linalg.eigvals(poly.polycompanion(reduced))
        real = eigenvalues.real[np.abs(eigenvalues.imag) < IMAG_TOLERANCE]
        roots.extend(real.tolist())
    return _finish(full, roots)


_CLOSED_FORM = {
    1: lambda c: roots_quadratic([c[0], c[1], 0.0]),
    2: roots_quadratic,
    3: roots_cubic,
    4: roots_quartic,
}


def minimize_piece(p, method=RootMethod.CLOSED_FORM):
    """
    Global minimizer of a piece over [0, 1].

    Candidates are tau = 0, tau = 1 and the real roots of dp/dtau in [0, 1].
    Closed-form roots are used up to derivative degree 4 unless the
    companion-matrix method is requested. Ties go to the smallest tau; a
    flat piece returns tau = 0.
    """
    method = RootMethod(method)
    if p.degree == 0:
        return PieceMinimizer(0.0, evaluate_piece(p, 0.0), RootMethod.CONSTANT_PIECE)
    derivative = derivative_monomial_coeffs(p)
    biggest = float(np.max(np.abs(derivative)))
    if biggest < FLAT_TOLERANCE:
        return PieceMinimizer(0.0, evaluate_piece(p, 0.0), RootMethod.CONSTANT_PIECE)

    significant = np.flatnonzero(np.abs(derivative) > _LEADING_TOLERANCE * biggest)
    trimmed = derivative[:significant[-1] + 1]
    degree = trimmed.size - 1
    if degree == 0:
        roots, used = [], method
    elif method is RootMethod.CLOSED_FORM and degree in _CLOSED_FORM:
        roots, used = _CLOSED_FORM[degree](trimmed), RootMethod.CLOSED_FORM
    else:
        roots, used = roots_numeric(trimmed), RootMethod.COMPANION_MATRIX

    candidates = {0.0, 1.0}
    for root in roots:
        if -UNIT_BAND <= root <= 1.0 + UNIT_BAND:
            candidates.add(min(1.0, max(0.0, root)))
    taus = np.array(sorted(candidates))
    values = evaluate_piece(p, taus)
    best = int(np.flatnonzero(values <= values.min() + TIE_TOLERANCE)[0])
    return PieceMinimizer(float(taus[best]), float(values[best]), used)
