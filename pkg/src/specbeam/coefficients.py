"""Variable coefficient construction for the beam model.

The mass density rho and bending stiffness eta are generated from two sampled
functions alpha, beta through exponential cumulative integrals

    rho(x) = rho0 * exp(4 * int_0^x beta(s) ds),
    eta(x) = exp(4 * int_0^x alpha(s) ds),

on a grid spanning [0, pi].  A profile is "strict" when rho stays above 1
everywhere and the gauge integral int_0^pi (rho/eta)^(1/4) dx equals pi; the
calibration routine enforces the gauge by shifting alpha with a single
constant, which multiplies eta by exp(4*c*x) and leaves eta(0) = 1 intact.

Cumulative integrals use the trapezoid rule on the stored grid so that the
construction and all later rho-weighted inner products share one discrete
measure.  Smoothness of the supplied alpha, beta samples is the caller's
responsibility and is not checked.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import A2Violation, CalibrationFailed, ConfigError, NonPositiveDensity, ShapeMismatch

GRID_SUM_RTOL = 1e-12
CALIBRATION_TOL = 1e-10
CALIBRATION_BRACKET = (-10.0, 10.0)

PRESET_NAMES = ("constant", "exp-linear", "sine-perturbed")


@dataclass(frozen=True)
class SpatialGrid:
    """Ordered nodes on [0, pi] with positive quadrature weights summing to pi."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or nodes.size < 3 or nodes.shape != weights.shape:
            raise ValueError("grid needs matching one-dimensional nodes and weights")
        if abs(nodes[0]) > 1e-12 or abs(nodes[-1] - np.pi) > 1e-12:
            raise ValueError("grid must start at 0 and end at pi")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("grid nodes must be strictly increasing")
        if np.any(weights <= 0.0):
            raise ValueError("quadrature weights must be positive")
        if abs(float(weights.sum()) - np.pi) > GRID_SUM_RTOL * np.pi:
            raise ValueError("quadrature weights must sum to pi")

    @classmethod
    def uniform(cls, resolution: int) -> "SpatialGrid":
        """Uniform grid with `resolution` intervals and trapezoid weights."""
        if resolution < 2:
            raise ValueError("resolution must be at least 2")
        nodes = np.linspace(0.0, np.pi, resolution + 1)
        h = np.pi / resolution
        weights = np.full(resolution + 1, h)
        weights[0] = weights[-1] = 0.5 * h
        return cls(nodes=nodes, weights=weights)

    @property
    def resolution(self) -> int:
        return self.nodes.size - 1

    def spacing(self) -> float:
        """Uniform node spacing; raises when the grid is graded."""
        steps = np.diff(self.nodes)
        h = float(steps[0])
        if float(np.max(np.abs(steps - h))) > 1e-12:
            raise ValueError("grid is not uniform")
        return h

    def integrate(self, samples: np.ndarray) -> float:
        return float(np.dot(self.weights, samples))


@dataclass(frozen=True)
class CoefficientProfile:
    """Sampled rho, eta together with their generating data."""

    grid: SpatialGrid
    alpha: np.ndarray
    beta: np.ndarray
    rho0: float
    rho: np.ndarray
    eta: np.ndarray
    strict_a2: bool
    calibration_shift: float = 0.0

    @property
    def profile_id(self) -> str:
        payload = np.concatenate([self.alpha, self.beta, [self.rho0]])
        return hashlib.sha256(payload.tobytes()).hexdigest()[:12]


def _cumulative_trapezoid(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    increments = 0.5 * (values[1:] + values[:-1]) * np.diff(nodes)
    out = np.empty(values.size, dtype=float)
    out[0] = 0.0
    np.cumsum(increments, out=out[1:])
    return out


def normalization_integral(profile: CoefficientProfile) -> float:
    """Gauge integral int_0^pi (rho/eta)^(1/4) dx on the profile grid."""
    return profile.grid.integrate((profile.rho / profile.eta) ** 0.25)


def build_profiles(
    alpha,
    beta,
    rho0: float,
    grid: SpatialGrid,
    strict_a2: bool,
    calibrate: bool = False,
) -> CoefficientProfile:
    """Construct rho, eta from sampled generating functions.

    With ``strict_a2`` the profile must satisfy rho > 1 at every node and the
    gauge integral must equal pi; pass ``calibrate=True`` to repair a gauge
    mismatch by shifting alpha instead of raising ``A2Violation``.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha.shape != grid.nodes.shape or beta.shape != grid.nodes.shape:
        raise ShapeMismatch("alpha and beta must be sampled on the grid nodes")
    if rho0 <= 0.0:
        raise NonPositiveDensity(f"rho0 must be positive, got {rho0}")

    rho = rho0 * np.exp(4.0 * _cumulative_trapezoid(beta, grid.nodes))
    eta = np.exp(4.0 * _cumulative_trapezoid(alpha, grid.nodes))
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(eta))):
        raise A2Violation("coefficient exponentials overflowed; rescale alpha or beta")

    profile = CoefficientProfile(
        grid=grid, alpha=alpha, beta=beta, rho0=float(rho0), rho=rho, eta=eta, strict_a2=strict_a2
    )
    if strict_a2:
        if rho0 <= 1.0 or np.any(rho <= 1.0):
            raise A2Violation(f"strict profile needs rho > 1 everywhere; min rho = {rho.min():.6g}")
        gap = abs(normalization_integral(profile) - np.pi)
        if gap > CALIBRATION_TOL:
            if not calibrate:
                raise A2Violation(
                    f"gauge integral misses pi by {gap:.3e}; rebuild with calibrate=True"
                )
            profile = calibrate_normalization(profile)
    return profile


def calibrate_normalization(profile: CoefficientProfile) -> CoefficientProfile:
    """Shift alpha by a constant so the gauge integral equals pi.

    The shift c acts multiplicatively on eta through exp(4*c*x) and is found
    by bisection; the gauge integral is strictly decreasing in c.
    """
    x = profile.grid.nodes
    w = profile.grid.weights
    base = (profile.rho / profile.eta) ** 0.25

    def gauge(c: float) -> float:
        return float(np.dot(w, base * np.exp(-c * x))) - np.pi

    lo, hi = CALIBRATION_BRACKET
    if gauge(lo) < 0.0 or gauge(hi) > 0.0:
        raise CalibrationFailed(
            f"no gauge root bracketed by c in [{lo}, {hi}] for this profile"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = gauge(mid)
        if abs(fmid) <= 1e-13 or (hi - lo) < 1e-15:
            lo = hi = mid
            break
        if fmid > 0.0:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)

    out = CoefficientProfile(
        grid=profile.grid,
        alpha=profile.alpha + c,
        beta=profile.beta,
        rho0=profile.rho0,
        rho=profile.rho,
        eta=profile.eta * np.exp(4.0 * c * x),
        strict_a2=profile.strict_a2,
        calibration_shift=float(c),
    )
    if abs(normalization_integral(out) - np.pi) > CALIBRATION_TOL:
        raise CalibrationFailed("bisection stalled before reaching the gauge tolerance")
    return out


def resample_profile(profile: CoefficientProfile, resolution: int) -> CoefficientProfile:
    """Rebuild the profile on a uniform grid of the requested resolution.

    Generating functions are interpolated with a cubic spline, then the
    cumulative construction is repeated on the new grid.  Strict profiles are
    recalibrated because the gauge integral is quadrature dependent.
    """
    if resolution == profile.grid.resolution:
        return profile
    from scipy.interpolate import CubicSpline

    new_grid = SpatialGrid.uniform(resolution)
    alpha = CubicSpline(profile.grid.nodes, profile.alpha)(new_grid.nodes)
    beta = CubicSpline(profile.grid.nodes, profile.beta)(new_grid.nodes)
    return build_profiles(
        alpha, beta, profile.rho0, new_grid, strict_a2=profile.strict_a2,
        calibrate=profile.strict_a2,
    )


def preset_samples(name: str, grid: SpatialGrid, params: dict | None = None):
    """Sample a named analytic preset; returns (alpha, beta, rho0)."""
    params = dict(params or {})
    x = grid.nodes
    if name == "constant":
        rho0 = float(params.pop("rho0", 1.0))
        alpha = np.zeros_like(x)
        beta = np.zeros_like(x)
    elif name == "exp-linear":
        rho0 = float(params.pop("rho0", 1.1))
        alpha = np.full_like(x, float(params.pop("alpha", 0.0)))
        beta = np.full_like(x, float(params.pop("beta", 0.05)))
    elif name == "sine-perturbed":
        rho0 = float(params.pop("rho0", 1.1))
        alpha = float(params.pop("alpha0", 0.0)) + float(params.pop("alpha_amp", 0.02)) * np.sin(
            float(params.pop("alpha_waves", 1.0)) * x
        )
        beta = float(params.pop("beta0", 0.05)) + float(params.pop("beta_amp", 0.02)) * np.sin(
            float(params.pop("beta_waves", 2.0)) * x
        )
    else:
        raise ConfigError(f"unknown coefficient preset {name!r}; choose from {PRESET_NAMES}")
    if params:
        raise ConfigError(f"unused parameters for preset {name!r}: {sorted(params)}")
    return alpha, beta, rho0
