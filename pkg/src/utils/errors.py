"""
Exception hierarchy for the persistent-current simulator.

Every error carries the process exit code the CLI maps it to.
"""

from typing import Optional


class SimulationError(Exception):
    """Base class for all simulator errors."""

    exit_code = 2


class ValidationError(SimulationError):
    """Invalid input: model specs, reservoir specs or run configuration."""

    exit_code = 1


class SpecError(ValidationError):
    """Inconsistent model specification (segment sizes, bonds, hoppings)."""


class BandError(ValidationError):
    """Energy or reservoir potential outside the reservoir band."""


class ConfigValidationError(ValidationError):
    """Run configuration failed schema validation."""

    def __init__(self, message: str, field: Optional[str] = None, source: Optional[str] = None):
        self.reason = message
        self.field = field
        self.source = source
        location = ""
        if source:
            location += f"{source}: "
        if field:
            location += f"field '{field}': "
        super().__init__(f"{location}{message}")


class NumericalError(SimulationError):
    """A numerical kernel could not produce a valid result."""

    exit_code = 2


class DomainError(NumericalError):
    """Argument outside the domain of a special function (e.g. log of zero)."""


class PassivityError(NumericalError):
    """Eigenvalue with positive imaginary part beyond the clamp tolerance."""


class PoleError(NumericalError):
    """Gamma-family function evaluated at a nonpositive integer."""


class DefectiveError(NumericalError):
    """Matrix is numerically defective (exceptional point); biorthogonal basis is invalid."""

    def __init__(self, message: str, phi: Optional[float] = None, min_overlap: Optional[float] = None):
        self.phi = phi
        self.min_overlap = min_overlap
        super().__init__(message)


class DimCapError(NumericalError):
    """Total Hermitian dimension exceeds the exact-diagonalization cap."""


class VerificationFailure(SimulationError):
    """One or more invariant checks failed."""

    exit_code = 3


class AmbiguityWarning(UserWarning):
    """Two branch assignments are indistinguishable in cost."""
