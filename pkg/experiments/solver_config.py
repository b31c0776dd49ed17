"""
Solver configuration for the experiment harness
Turns the NNSPLINE settings group into library config values
"""
from django.conf import settings

from splines.qpsolve import QpSettings
from splines.smoothers import FitConfig


def get_qp_settings():
    """
    Returns interior-point settings from NNSPLINE
    """
    return QpSettings(
        tol=settings.NNSPLINE.get('QP_TOLERANCE', 1e-9),
        max_iterations=settings.NNSPLINE.get('QP_MAX_ITERATIONS', 100),
    )


def get_fit_config(**overrides):
    """
    Returns a FitConfig from NNSPLINE; keyword arguments that are not None
    replace the configured values
    """
    values = {
        'degree': settings.NNSPLINE.get('DEGREE', 3),
        'lam': settings.NNSPLINE.get('LAMBDA', 1.0 / 250.0),
        'epsilon': settings.NNSPLINE.get('EPSILON', 0.0),
        'max_cp_iterations': settings.NNSPLINE.get('MAX_CP_ITERATIONS', 500),
        'grid_points': settings.NNSPLINE.get('GRID_POINTS', 10000),
        'root_strategy': settings.NNSPLINE.get('ROOT_STRATEGY', 'closed_form'),
        'shift_negative': settings.NNSPLINE.get('SHIFT_NEGATIVE', False),
        'qp': get_qp_settings(),
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    return FitConfig(**values)


def get_default_methods():
    """
    Returns the configured method names as a list
    """
    raw = settings.NNSPLINE.get('METHODS', 'sufficient_qp,cutting_plane')
    return [name.strip() for name in raw.split(',') if name.strip()]
