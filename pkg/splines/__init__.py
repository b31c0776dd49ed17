"""
Nonnegative spline smoothing in Bernstein-Bezier form
"""

__version__ = '0.1.0'
