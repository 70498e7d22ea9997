"""Space-time spectral table of the beam operator and its compact inverse.

Every product mode (m, n) carries the value mu_n - theta_m^2; modes inside
the null tolerance are resonant and span the discrete null space, the rest
form the range where the operator is invertible coefficient-wise.  The gap
constants delta (smallest non-null |value|) and gamma (smallest positive
theta^2 - mu_n) are truncation-relative quantities and are always reported
with the truncation they came from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .eigensolver import BeamSpectrum
from .errors import DegenerateTolerance, NotInRange, ShapeMismatch
from .transforms import FourierField, FrequencySpec

RANGE_TOL_FACTOR = 1e-10
# a masked entry must sit at least a decade below the spectral gap, otherwise
# the tolerance cannot separate resonant modes from genuine small divisors
DEGENERATE_SEPARATION = 0.1


class TailSum(NamedTuple):
    """Sum of 1/value^2 over non-null modes and the sup-norm constant."""

    total: float
    sup_constant: float


@dataclass(frozen=True)
class LambdaLattice:
    """Spectral values over the (m, n) truncation with the null classification."""

    values: np.ndarray
    null_mask: np.ndarray
    delta: float
    gamma: float
    null_tol: float
    spectrum: BeamSpectrum
    freq: FrequencySpec
    delta_mode: tuple
    gamma_mode: tuple | None

    @property
    def null_count(self) -> int:
        return int(self.null_mask.sum())

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def mode_index(self, m: int, n: int) -> tuple:
        return (m + self.freq.m_max, n - 1)


def default_null_tol(spectrum: BeamSpectrum) -> float:
    return 1e-6 * (1.0 + float(np.max(spectrum.mu)))


def assemble_lattice(
    spectrum: BeamSpectrum, freq: FrequencySpec, null_tol: float | None = None
) -> LambdaLattice:
    """Fill the lattice mu_n - theta_m^2 and classify null versus range."""
    if spectrum.count < 1:
        raise ValueError("spectrum is empty")
    if null_tol is None:
        null_tol = default_null_tol(spectrum)
    if null_tol <= 0.0:
        raise ValueError("null_tol must be positive")

    theta_sq = freq.thetas() ** 2
    values = spectrum.mu[None, :] - theta_sq[:, None]
    null_mask = np.abs(values) <= null_tol
    non_null = ~null_mask
    if not non_null.any():
        raise DegenerateTolerance("every lattice entry lies inside the null tolerance")

    abs_non_null = np.where(non_null, np.abs(values), np.inf)
    flat = int(np.argmin(abs_non_null))
    delta = float(abs_non_null.flat[flat])
    if null_tol >= delta:
        raise DegenerateTolerance(
            f"null_tol {null_tol:.3e} would swallow the spectral gap delta = {delta:.3e}"
        )
    swallowed = np.abs(values[null_mask])
    if swallowed.size and float(swallowed.max()) > DEGENERATE_SEPARATION * delta:
        raise DegenerateTolerance(
            f"null_tol {null_tol:.3e} swallows a mode with |value| = {swallowed.max():.3e}, "
            f"within a decade of the spectral gap delta = {delta:.3e}"
        )
    di, dj = np.unravel_index(flat, values.shape)
    delta_mode = (int(di - freq.m_max), int(dj + 1))

    negative = non_null & (values < 0.0)
    if negative.any():
        neg_gaps = np.where(negative, -values, np.inf)
        gflat = int(np.argmin(neg_gaps))
        gamma = float(neg_gaps.flat[gflat])
        gi, gj = np.unravel_index(gflat, values.shape)
        gamma_mode = (int(gi - freq.m_max), int(gj + 1))
    else:
        gamma = np.inf
        gamma_mode = None

    return LambdaLattice(
        values=values,
        null_mask=null_mask,
        delta=delta,
        gamma=gamma,
        null_tol=float(null_tol),
        spectrum=spectrum,
        freq=freq,
        delta_mode=delta_mode,
        gamma_mode=gamma_mode,
    )


def _check_shape(field: FourierField, lattice: LambdaLattice) -> None:
    if field.coeff.shape != lattice.values.shape:
        raise ShapeMismatch(
            f"field shape {field.coeff.shape} does not match lattice {lattice.values.shape}"
        )


def apply_L(u: FourierField, lattice: LambdaLattice) -> FourierField:
    """Coefficient-wise product with the spectral values."""
    _check_shape(u, lattice)
    return FourierField(lattice.values * u.coeff)


def apply_L_inverse(
    h: FourierField, lattice: LambdaLattice, range_tol: float | None = None
) -> FourierField:
    """Divide by the spectral values on non-null modes; null modes must be empty.

    The bound |result| <= (1/delta) |h| holds by construction.
    """
    _check_shape(h, lattice)
    if range_tol is None:
        range_tol = RANGE_TOL_FACTOR * h.norm()
    if lattice.null_mask.any():
        null_mag = np.abs(h.coeff[lattice.null_mask])
        worst = float(null_mag.max()) if null_mag.size else 0.0
        if worst > range_tol:
            flat = int(np.argmax(np.abs(np.where(lattice.null_mask, h.coeff, 0.0))))
            i, j = np.unravel_index(flat, h.coeff.shape)
            raise NotInRange(
                f"null-mode coefficient {worst:.3e} at (m={i - lattice.freq.m_max}, n={j + 1}) "
                f"exceeds range tolerance {range_tol:.3e}"
            )
    out = np.zeros_like(h.coeff)
    non_null = ~lattice.null_mask
    out[non_null] = h.coeff[non_null] / lattice.values[non_null]
    return FourierField(out)


def project_range(h: FourierField, lattice: LambdaLattice) -> FourierField:
    _check_shape(h, lattice)
    out = h.coeff.copy()
    out[lattice.null_mask] = 0.0
    return FourierField(out)


def project_null(h: FourierField, lattice: LambdaLattice) -> FourierField:
    _check_shape(h, lattice)
    out = h.coeff.copy()
    out[~lattice.null_mask] = 0.0
    return FourierField(out)


def tail_sum(lattice: LambdaLattice) -> TailSum:
    """Sum 1/value^2 over non-null truncated modes plus sqrt of it."""
    non_null = ~lattice.null_mask
    total = float(np.sum(1.0 / lattice.values[non_null] ** 2))
    return TailSum(total=total, sup_constant=float(np.sqrt(total)))


def lattice_rows(lattice: LambdaLattice):
    """Yield (m, n, value, is_null) rows in deterministic order."""
    m_max = lattice.freq.m_max
    for i in range(lattice.values.shape[0]):
        for j in range(lattice.values.shape[1]):
            yield (i - m_max, j + 1, float(lattice.values[i, j]), bool(lattice.null_mask[i, j]))
