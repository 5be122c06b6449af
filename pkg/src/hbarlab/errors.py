"""Exception types raised across hbarlab."""

from __future__ import annotations


class HbarlabError(Exception):
    """Base class for every error raised by the package."""


class DomainError(HbarlabError, ValueError):
    """A point lies outside the open box of a chart (or its explosion)."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class DerivativeOracleError(HbarlabError):
    """A derivative oracle could not deliver a trustworthy partial."""


class ConvergenceError(HbarlabError):
    """An extrapolated limit failed to settle."""


class QuadratureOrderError(HbarlabError, ValueError):
    """The sphere quadrature is too coarse for the requested identity."""

    def __init__(self, message: str, required: tuple[int, int]):
        super().__init__(message)
        self.required = required


class GridError(HbarlabError, ValueError):
    """Lattice functions live on incompatible or under-resolved grids."""


class PositivityError(HbarlabError, ValueError):
    """The Kahler polarization is only positive for hbar >= 0."""


class ProfileError(HbarlabError, ValueError):
    """An area profile violates the selector's preconditions."""


class FieldValidationError(HbarlabError, ValueError):
    """A field backend and its hbar index do not fit together."""


class ConfigError(HbarlabError, ValueError):
    """A run configuration failed validation."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer


class InsufficientDataError(HbarlabError, ValueError):
    """Too few samples to fit a decay order."""
