"""Exception taxonomy for the solver.

Every failure mode that callers are expected to branch on gets its own
class; anything else surfaces as a plain ValueError from validation code.
"""

from __future__ import annotations


class ChordflowError(Exception):
    """Base class for all solver-specific errors."""


class InvalidShape(ChordflowError):
    """A body specification or support-function array is malformed."""


class ShapeMismatch(ChordflowError):
    """An array does not match the angular grid it is paired with."""


class ConvexityViolation(ChordflowError):
    """The principal radius h'' + h is non-positive somewhere.

    Carries the offending node index (or perturbation parameter, for
    finite-difference paths) so callers can report where it happened.
    """

    def __init__(self, message: str, node: int | None = None, t: float | None = None):
        super().__init__(message)
        self.node = node
        self.t = t


class InterpolationError(ChordflowError):
    """Boundary polar angles are not cyclically monotone."""


class PointOutsideBody(ChordflowError):
    """A query point violates the containment precondition."""


class QuadratureUnderflow(ChordflowError):
    """A quadrature produced a non-positive value for a positive quantity."""


class UnsupportedExponent(ChordflowError):
    """The requested kernel exponent is outside the routine's valid range."""


class DegenerateDenominator(ChordflowError):
    """A normalization denominator is non-positive (corrupted state)."""


class StepSizeUnderflow(ChordflowError):
    """Adaptive time step fell below its floor before a valid step was found."""

    def __init__(self, message: str, state=None, series=None):
        super().__init__(message)
        self.state = state
        self.series = series if series is not None else []


class NonConvergence(ChordflowError):
    """The flow hit its step budget before reaching stationarity."""

    def __init__(self, message: str, state=None, series=None):
        super().__init__(message)
        self.state = state
        self.series = series if series is not None else []


class ConfigError(ChordflowError):
    """A run configuration file is invalid; message names the field."""
