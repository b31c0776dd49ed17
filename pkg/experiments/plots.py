"""
SVG overlays of fitted splines with their data
"""
import logging
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from splines.bezier import bernstein_basis
from splines.polyroots import minimize_piece

logger = logging.getLogger(__name__)

MIN_POINTS_PER_INTERVAL = 200


def sample_spline(coefficients, points_per_interval=MIN_POINTS_PER_INTERVAL):
    """
    Dense (x, s(x)) samples, at least 200 per interval
    """
    points = max(int(points_per_interval), MIN_POINTS_PER_INTERVAL)
    tau = np.linspace(0.0, 1.0, points)
    partition = coefficients.partition
    values = bernstein_basis(tau, coefficients.degree) @ coefficients.piece_matrix().T
    x = partition.knots[:-1][None, :] + tau[:, None] * partition.widths[None, :]
    return x.T.ravel(), values.T.ravel()


def global_minimum(coefficients):
    """
    Location and value of the smallest piece minimum
    """
    partition = coefficients.partition
    best = None
    for i in range(coefficients.m):
        found = minimize_piece(coefficients.piece(i))
        if best is None or found.min_value < best[1]:
            best = (partition.knots[i] + found.tau_star * partition.widths[i], found.min_value)
    return best


def _draw(ax, dataset, fits):
    ax.scatter(dataset.x, dataset.y, color='black', s=12, zorder=3, label='data')
    for label, coefficients in fits.items():
        x, y = sample_spline(coefficients)
        line, = ax.plot(x, y, lw=1.2, label=label)
        min_x, min_value = global_minimum(coefficients)
        ax.plot([min_x], [min_value], marker='v', color=line.get_color(), ms=5)
    ax.axhline(0.0, color='grey', lw=0.6, ls='--')
    ax.set_xlabel('x')
    ax.set_ylabel('y')
    ax.grid(True, alpha=0.3)


def plot_fits(dataset, fits, path, magnify=None, title=None):
    """
    Writes an SVG with the data, one curve per fit and a marker at each
    curve's minimum. With magnify=(lower, upper) a second panel zooms
    into that x range.
    """
    figure = Figure(figsize=(12, 5) if magnify else (8, 5))
    axes = figure.subplots(1, 2 if magnify else 1, squeeze=False)[0]
    _draw(axes[0], dataset, fits)
    axes[0].legend(loc='best', fontsize='small')
    if title:
        axes[0].set_title(title)

    if magnify:
        lower, upper = magnify
        zoom = axes[1]
        _draw(zoom, dataset, fits)
        zoom.set_xlim(lower, upper)
        inside = [dataset.y[(dataset.x >= lower) & (dataset.x <= upper)]]
        for coefficients in fits.values():
            x, y = sample_spline(coefficients)
            inside.append(y[(x >= lower) & (x <= upper)])
        visible = np.concatenate(inside)
        if visible.size:
            low, high = float(visible.min()), float(visible.max())
            pad = 0.05 * (high - low) or 1e-3
            zoom.set_ylim(low - pad, high + pad)
        zoom.set_title(f'x in [{lower:g}, {upper:g}]')

    figure.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(path, format='svg')
    logger.info('wrote %s', path)
    return path
