"""Moves fields between coefficient and physical space-time representations.

The product basis is exp(i*theta_m*t)/sqrt(T) in time and the beam modes
phi_n(x) in space; coefficients are stored two-sided over m in
[-m_max, m_max].  On the uniform time grid t_j = j*T/Nt the temporal phases
reduce to exp(2*pi*i*m*j/Nt), so the discrete transforms are exact for
band-limited fields whenever Nt >= 2*m_max + 1.  Spatial quadrature reuses
the grid weights the coefficients were built with, which keeps Parseval exact
up to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientProfile, SpatialGrid
from .eigensolver import BeamSpectrum
from .errors import AliasRisk, ConfigError, ShapeMismatch, SymmetryViolation

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class FrequencySpec:
    """Rational period T = 2*pi*p/q with temporal truncation m_max."""

    p: int
    q: int
    m_max: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1 or int(self.p) != self.p or int(self.q) != self.q:
            raise ConfigError("p and q must be positive integers")
        if math.gcd(self.p, self.q) != 1:
            raise ConfigError(f"p={self.p} and q={self.q} must be coprime")
        if self.m_max < 0:
            raise ConfigError("m_max must be non-negative")

    @property
    def period(self) -> float:
        return 2.0 * np.pi * self.p / self.q

    def m_values(self) -> np.ndarray:
        return np.arange(-self.m_max, self.m_max + 1)

    def thetas(self) -> np.ndarray:
        """Temporal frequencies theta_m = 2*pi*m/T = q*m/p."""
        return self.q * self.m_values() / self.p


@dataclass(frozen=True)
class FourierField:
    """Complex coefficients over (m, n); row i holds m = i - m_max."""

    coeff: np.ndarray

    def __post_init__(self):
        coeff = np.asarray(self.coeff, dtype=complex)
        object.__setattr__(self, "coeff", coeff)
        if coeff.ndim != 2 or coeff.shape[0] % 2 != 1:
            raise ShapeMismatch("coefficients must be (2*m_max+1, n_modes)")

    @property
    def m_max(self) -> int:
        return (self.coeff.shape[0] - 1) // 2

    @property
    def n_modes(self) -> int:
        return self.coeff.shape[1]

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeff) ** 2)))

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.coeff - np.conj(self.coeff[::-1, :]))))


def zero_field(m_max: int, n_modes: int) -> FourierField:
    return FourierField(np.zeros((2 * m_max + 1, n_modes), dtype=complex))


def mode_field(m_max: int, n_modes: int, entries, hermitian: bool = True) -> FourierField:
    """Build a field from (m, n, value) entries; n is 1-based.

    With ``hermitian`` the conjugate partner at -m is filled in as well, so
    the result represents a real function.
    """
    coeff = np.zeros((2 * m_max + 1, n_modes), dtype=complex)
    for m, n, value in entries:
        if abs(m) > m_max or not (1 <= n <= n_modes):
            raise ShapeMismatch(f"mode ({m}, {n}) is outside the truncation")
        coeff[m + m_max, n - 1] = value
        if hermitian:
            coeff[-m + m_max, n - 1] = np.conj(value)
    return FourierField(coeff)


@dataclass(frozen=True)
class PhysicalField:
    """Real samples on the uniform time grid times the spatial grid."""

    values: np.ndarray
    times: np.ndarray
    period: float
    grid: SpatialGrid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", times)
        if values.ndim != 2 or values.shape != (times.size, self.grid.nodes.size):
            raise ShapeMismatch("values must be shaped (time nodes, spatial nodes)")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        dt = self.period / times.size
        if abs(times[0]) > 1e-12 or np.max(np.abs(np.diff(times) - dt)) > 1e-9 * self.period:
            raise ShapeMismatch("time nodes must be uniform on [0, T)")

    @property
    def time_count(self) -> int:
        return self.times.size


def _check_pair(u: FourierField, spectrum: BeamSpectrum, freq: FrequencySpec) -> None:
    if u.m_max != freq.m_max:
        raise ShapeMismatch(f"field m_max {u.m_max} differs from frequency m_max {freq.m_max}")
    if u.n_modes != spectrum.count:
        raise ShapeMismatch(f"field holds {u.n_modes} modes, spectrum holds {spectrum.count}")


def synthesize(
    u: FourierField, spectrum: BeamSpectrum, freq: FrequencySpec, time_nodes: int | None = None
) -> PhysicalField:
    """Evaluate the coefficient field on the physical space-time grid."""
    _check_pair(u, spectrum, freq)
    scale = max(1.0, float(np.max(np.abs(u.coeff))) if u.coeff.size else 0.0)
    if u.hermitian_defect() > HERMITIAN_TOL * scale:
        raise SymmetryViolation(
            f"Hermitian defect {u.hermitian_defect():.3e} exceeds {HERMITIAN_TOL * scale:.3e}"
        )
    nt = int(time_nodes) if time_nodes is not None else 2 * freq.m_max + 2
    if nt < 1:
        raise ValueError("time_nodes must be positive")
    T = freq.period
    j = np.arange(nt)
    phases = np.exp(2j * np.pi * np.outer(j, freq.m_values()) / nt) / np.sqrt(T)
    field = phases @ u.coeff @ spectrum.phi.T
    fnorm = float(np.linalg.norm(field))
    if float(np.linalg.norm(field.imag)) > 1e-12 * max(fnorm, 1e-300):
        raise SymmetryViolation("synthesized field kept a non-negligible imaginary part")
    return PhysicalField(values=field.real, times=T * j / nt, period=T, grid=spectrum.grid)


def analyze(
    field: PhysicalField,
    spectrum: BeamSpectrum,
    profile: CoefficientProfile,
    freq: FrequencySpec,
) -> FourierField:
    """Project a physical field onto the truncated product basis.

    Temporal projection is the uniform-grid discrete Fourier sum, exact for
    band-limited inputs; spatial projection is the rho-weighted quadrature.
    """
    nt = field.time_count
    if nt < 2 * freq.m_max + 1:
        raise AliasRisk(f"{nt} time nodes cannot resolve m_max = {freq.m_max}")
    if not np.allclose(field.grid.nodes, spectrum.grid.nodes, rtol=0.0, atol=1e-12):
        raise ShapeMismatch("field and spectrum live on different spatial grids")
    if not np.allclose(profile.grid.nodes, spectrum.grid.nodes, rtol=0.0, atol=1e-12):
        raise ShapeMismatch("profile and spectrum live on different spatial grids")
    T = freq.period
    weighted_phi = spectrum.phi * (profile.rho * profile.grid.weights)[:, None]
    spatial = field.values @ weighted_phi
    j = np.arange(nt)
    phases = np.exp(-2j * np.pi * np.outer(freq.m_values(), j) / nt)
    return FourierField((np.sqrt(T) / nt) * (phases @ spatial))


def inner_product(u: PhysicalField, v: PhysicalField, profile: CoefficientProfile) -> float:
    """Space-time inner product int u v rho dt dx on matching grids."""
    if u.values.shape != v.values.shape or u.period != v.period:
        raise ShapeMismatch("fields must share the same space-time sampling")
    if not np.allclose(u.grid.nodes, profile.grid.nodes, rtol=0.0, atol=1e-12):
        raise ShapeMismatch("field and profile live on different spatial grids")
    dt = u.period / u.time_count
    wx = profile.rho * profile.grid.weights
    return float(dt * np.einsum("jk,jk,k->", u.values, v.values, wx))


def l2_norm(field: PhysicalField, profile: CoefficientProfile) -> float:
    return float(np.sqrt(max(inner_product(field, field, profile), 0.0)))


def l1_norm(field: PhysicalField, profile: CoefficientProfile) -> float:
    dt = field.period / field.time_count
    wx = profile.rho * profile.grid.weights
    return float(dt * np.einsum("jk,k->", np.abs(field.values), wx))


def sup_norm(field: PhysicalField) -> float:
    return float(np.max(np.abs(field.values)))
