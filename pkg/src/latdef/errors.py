"""Typed exceptions shared across the package."""


class LatdefError(Exception):
    """Base class for all latdef errors."""


class SingularBasis(LatdefError):
    """Basis matrix is (numerically) singular."""


class CapExceeded(LatdefError):
    """A point enumeration or sum would exceed the configured point cap."""


class NoDensity(LatdefError):
    """Potential has no inverse-Laplace density function (point-mass measure)."""


class WrongRegime(LatdefError):
    """Parameters violate the regime precondition of a threshold formula."""


class ShiftConditionViolated(LatdefError):
    """Defect shift does not satisfy the half-cell congruence condition."""


class ObjectiveFailure(LatdefError):
    """Objective evaluation failed during optimization; carries the (x, y) point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class StepTooLarge(LatdefError):
    """Finite-difference step too large: Richardson levels disagree."""


class ValidationError(LatdefError):
    """Config or input file failed validation; message names the field."""
