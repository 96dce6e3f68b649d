"""
Exception hierarchy for the broadcast simulator.

The CLI maps these onto exit codes (see interfaces/cli.py).
"""

from typing import Optional


class BroadcastSimError(Exception):
    """Base class for all simulator errors."""
    pass


class InvalidParameterError(BroadcastSimError, ValueError):
    """Raised when a parameter, window or input file is invalid."""
    pass


class TheoremInapplicableError(InvalidParameterError):
    """Raised when a bound is requested outside the regime where it holds."""
    pass


class InvariantViolationError(BroadcastSimError, RuntimeError):
    """Raised when an internal invariant fails (indicates a bug, not bad input)."""
    pass


class QuadratureError(BroadcastSimError, RuntimeError):
    """Raised when adaptive quadrature misses its tolerance."""

    def __init__(self, message: str, achieved_error: Optional[float] = None):
        super().__init__(message)
        self.achieved_error = achieved_error


class StorageError(BroadcastSimError, OSError):
    """Raised when reading or writing an artifact file fails."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path
