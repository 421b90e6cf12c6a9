"""
Exception hierarchy for optimal quadrature construction.
"""

from typing import Any, Optional


class QuadratureError(Exception):
    """Base exception for quadrature construction failures."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class InvalidParameterError(QuadratureError, ValueError):
    """Problem parameters outside the supported range."""

    exit_code = 2


class SolvabilityError(InvalidParameterError):
    """Too few nodes for the exactness conditions (N + 1 < m)."""
    pass


class DimensionError(InvalidParameterError):
    """Vector length does not match the space order."""
    pass


class DegeneracyError(QuadratureError):
    """Numerical degeneracy in a solver."""

    exit_code = 3


class SingularSystemError(DegeneracyError):
    """Linear system is singular or too badly conditioned to trust."""

    def __init__(self, message: str, condition: Optional[float] = None, details: Optional[dict[str, Any]] = None):
        super().__init__(message, details)
        self.condition = condition


class DegenerateStepError(DegeneracyError):
    """Operator root lies on the unit circle."""
    pass


class RootPairingError(DegeneracyError):
    """Operator roots do not split m-1 inside / m-1 outside the unit disk."""
    pass


class StabilityError(DegeneracyError):
    """Closed-form root is complex or not strictly inside the unit disk."""
    pass


class OperatorIntegrityError(QuadratureError):
    """Convolution tail does not converge."""

    exit_code = 3


class PreconditionError(QuadratureError, ValueError):
    """Operation requested on weights that violate the exactness conditions."""

    exit_code = 2


class VerificationError(QuadratureError):
    """A verification check failed."""

    exit_code = 4
