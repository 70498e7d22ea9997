"""Spectral solver and analysis toolkit for time-periodic beam vibrations."""

from .coefficients import (
    CoefficientProfile,
    SpatialGrid,
    build_profiles,
    calibrate_normalization,
    normalization_integral,
    preset_samples,
    resample_profile,
)
from .eigensolver import (
    AsymptoticFit,
    BeamSpectrum,
    check_orthonormality,
    fit_asymptotics,
    rayleigh_residuals,
    solve_eigenproblem,
)
from .errors import (
    A2Violation,
    A3Unverified,
    AliasRisk,
    BoundViolation,
    CalibrationFailed,
    ConfigError,
    DegenerateTolerance,
    DiscretizationTooCoarse,
    EigensolveFailure,
    InsufficientModes,
    MonitorBlowup,
    NonConvergence,
    NonPositiveDensity,
    NotInRange,
    ShapeMismatch,
    SpecbeamError,
    SymmetryViolation,
)
from .nonlinear_solver import (
    ForcingSpec,
    Nonlinearity,
    SolveContext,
    SolverConfig,
    SolveTrace,
    check_A3,
    continuation_solve,
    decompose_forcing,
    forcing_from_physical,
    residual,
    solve_regularized,
    tanh_nonlinearity,
    weak_residual,
    zero_nonlinearity,
)
from .spectral_operator import (
    LambdaLattice,
    TailSum,
    apply_L,
    apply_L_inverse,
    assemble_lattice,
    project_null,
    project_range,
    tail_sum,
)
from .transforms import (
    FourierField,
    FrequencySpec,
    PhysicalField,
    analyze,
    inner_product,
    l1_norm,
    l2_norm,
    mode_field,
    sup_norm,
    synthesize,
    zero_field,
)

__version__ = "0.1.0"

__all__ = [
    "A2Violation", "A3Unverified", "AliasRisk", "AsymptoticFit", "BeamSpectrum",
    "BoundViolation", "CalibrationFailed", "CoefficientProfile", "ConfigError",
    "DegenerateTolerance", "DiscretizationTooCoarse", "EigensolveFailure",
    "ForcingSpec", "FourierField", "FrequencySpec", "InsufficientModes",
    "LambdaLattice", "MonitorBlowup", "NonConvergence", "NonPositiveDensity",
    "Nonlinearity", "NotInRange", "PhysicalField", "ShapeMismatch",
    "SolveContext", "SolveTrace", "SolverConfig", "SpatialGrid", "SpecbeamError",
    "SymmetryViolation", "TailSum", "analyze", "apply_L", "apply_L_inverse",
    "assemble_lattice", "build_profiles", "calibrate_normalization", "check_A3",
    "check_orthonormality", "continuation_solve", "decompose_forcing",
    "fit_asymptotics", "forcing_from_physical", "inner_product", "l1_norm",
    "l2_norm", "mode_field", "normalization_integral", "preset_samples",
    "project_null", "project_range", "rayleigh_residuals", "resample_profile",
    "residual", "solve_eigenproblem", "solve_regularized", "sup_norm",
    "synthesize", "tail_sum", "tanh_nonlinearity", "weak_residual",
    "zero_field", "zero_nonlinearity",
]
