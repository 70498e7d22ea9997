"""Closed-form reference objects for the constant-coefficient beam.

With rho = eta = 1 and vanishing alpha + beta at the ends the modes are
phi_n = sqrt(2/pi) sin(n x) with mu_n = n^4 exactly, and on a uniform grid
the trapezoid rule integrates products of these modes exactly, so the
analytic spectrum satisfies the discrete orthonormality contract to
round-off.  The lattice enumeration below is written in plain loops over
exact rationals, independent of the vectorized lattice code it checks.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .coefficients import CoefficientProfile, SpatialGrid, build_profiles
from .eigensolver import BeamSpectrum


def constant_profile(resolution: int, rho0: float = 1.0) -> CoefficientProfile:
    grid = SpatialGrid.uniform(resolution)
    zeros = np.zeros_like(grid.nodes)
    return build_profiles(zeros, zeros, rho0, grid, strict_a2=False)


def pinned_constant_spectrum(count: int, resolution: int):
    """Analytic (profile, spectrum) pair for the uniform pinned-pinned beam."""
    profile = constant_profile(resolution)
    n = np.arange(1, count + 1)
    mu = (n.astype(float)) ** 4
    phi = np.sqrt(2.0 / np.pi) * np.sin(np.outer(profile.grid.nodes, n))
    phi[0, :] = 0.0
    phi[-1, :] = 0.0
    phi_x = np.sqrt(2.0 / np.pi) * n * np.cos(np.outer(profile.grid.nodes, n))
    spectrum = BeamSpectrum(
        mu=mu, phi=phi, grid=profile.grid, rho=profile.rho,
        profile_id=profile.profile_id, phi_x=phi_x,
    )
    return profile, spectrum


def enumerate_constant_lattice(n_modes: int, m_max: int, p: int = 1, q: int = 1) -> dict:
    """Brute-force classification of the constant lattice in exact arithmetic.

    Returns the resonant mode set, the spectral gap, the negative-side gap
    and the tail sum, all as exact values (Fractions where non-integer).
    """
    null_modes = set()
    delta = None
    gamma = None
    tail = Fraction(0)
    for n in range(1, n_modes + 1):
        for m in range(-m_max, m_max + 1):
            value = Fraction(n**4) - Fraction(q * q * m * m, p * p)
            if value == 0:
                null_modes.add((m, n))
                continue
            mag = abs(value)
            delta = mag if delta is None else min(delta, mag)
            if value < 0:
                gap = -value
                gamma = gap if gamma is None else min(gamma, gap)
            tail += Fraction(1) / (value * value)
    return {
        "null_modes": null_modes,
        "delta": delta,
        "gamma": gamma,
        "tail_sum": tail,
    }
