"""
Exceptions raised by the spline smoothing library
"""


class SplineError(Exception):
    """
    Base class for all library errors
    """


class DomainError(SplineError, ValueError):
    """
    An argument lies outside the domain of an operation
    (tau outside [0, 1], x outside the partition, bad knots)
    """


class ConfigError(SplineError, ValueError):
    """
    Invalid fitting or solver configuration
    """


class DegenerateInputError(SplineError, ValueError):
    """
    Input carries no information, e.g. an all-zero polynomial
    """


class DegenerateProblemError(SplineError):
    """
    The cost is not strongly convex on the constraint null space
    """


class QpConstructionError(SplineError, ValueError):
    """
    Inconsistent dimensions or structure in a QP problem
    """


class SolverFailure(SplineError):
    """
    A quadratic program inside a fit did not reach optimality.
    Carries the cutting-plane trace recorded up to the failure.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)
