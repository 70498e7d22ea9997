"""Exception types shared across the package."""

from __future__ import annotations


class SpecbeamError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SpecbeamError):
    """Invalid or inconsistent configuration input."""


class NonPositiveDensity(SpecbeamError):
    """Density scale must be strictly positive."""


class A2Violation(SpecbeamError):
    """Strict coefficient assumptions (rho > 1 or gauge integral) violated."""


class CalibrationFailed(SpecbeamError):
    """No calibration constant found inside the bracketing interval."""


class DiscretizationTooCoarse(SpecbeamError):
    """Requested mode count exceeds the safe fraction of the grid resolution."""


class EigensolveFailure(SpecbeamError):
    """Discrete pencil is not positive definite or the backend failed."""


class InsufficientModes(SpecbeamError):
    """Not enough eigenvalues in the requested asymptotic fit range."""


class DegenerateTolerance(SpecbeamError):
    """Null tolerance would swallow genuine non-resonant lattice entries."""


class ShapeMismatch(SpecbeamError):
    """Field or table shapes are incompatible."""


class NotInRange(SpecbeamError):
    """Inverse requested for a field with non-negligible null-mode content."""


class SymmetryViolation(SpecbeamError):
    """Coefficients of a real field lost their Hermitian symmetry."""


class AliasRisk(SpecbeamError):
    """Too few time samples to resolve the temporal truncation."""


class A3Unverified(SpecbeamError):
    """Forcing decomposition check failed and no waiver was given."""


class NonConvergence(SpecbeamError):
    """Iteration budget exhausted; carries the best iterate seen."""

    def __init__(self, message, best_residual=None, trace=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.trace = trace


class MonitorBlowup(SpecbeamError):
    """A monitored a-priori bound grew past its budget along the schedule."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class BoundViolation(SpecbeamError):
    """A verified operator bound failed; indicates corrupted inputs."""
