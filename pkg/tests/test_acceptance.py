"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one `[criterion N] PASS/FAIL` line; run with `pytest -s`
to see the lines as they appear.  Reference resolutions are documented next
to each criterion; the eigensolver's design order is 3 (see the module
docstring of specbeam.eigensolver).
"""

import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from specbeam.diagnostics import convergence_study, verify_inverse_bounds
from specbeam.eigensolver import DESIGN_ORDER, fit_asymptotics, solve_eigenproblem
from specbeam.errors import MonitorBlowup, NonConvergence
from specbeam.coefficients import SpatialGrid, build_profiles, preset_samples
from specbeam.nonlinear_solver import (
    SolveContext,
    SolverConfig,
    continuation_solve,
    decompose_forcing,
    tanh_nonlinearity,
    weak_residual,
)
from specbeam.reference import constant_profile, pinned_constant_spectrum
from specbeam.spectral_operator import apply_L, assemble_lattice, tail_sum
from specbeam.transforms import (
    FourierField,
    FrequencySpec,
    PhysicalField,
    analyze,
    inner_product,
    mode_field,
    synthesize,
)

EIGEN_REFERENCE_RESOLUTION = 1024
VARIABLE_REFERENCE_RESOLUTION = 4096


@contextmanager
def criterion(number, description, budget_seconds):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[criterion {number}] FAIL {description}")
        raise
    elapsed = time.perf_counter() - start
    assert elapsed <= budget_seconds, (
        f"criterion {number} took {elapsed:.1f}s, budget {budget_seconds}s"
    )
    print(f"[criterion {number}] PASS {description} ({elapsed:.1f}s)")


def test_criterion_1_constant_eigen_oracle():
    with criterion(1, "constant-coefficient eigen oracle and convergence order", 10.0):
        profile = constant_profile(EIGEN_REFERENCE_RESOLUTION)
        spectrum = solve_eigenproblem(profile, 10)
        n = np.arange(1, 11, dtype=float)
        rel_err = np.abs(spectrum.mu - n**4) / n**4
        assert np.max(rel_err) <= 1e-6
        study = convergence_study(constant_profile(256), 3, resolutions=(64, 128, 256))
        observed = study.entries[0].order
        assert observed == pytest.approx(DESIGN_ORDER, abs=0.3)


def test_criterion_2_lattice_classification_oracle():
    with criterion(2, "lattice classification: 8 null modes, delta = 1, gamma = 3", 1.0):
        # independent brute-force enumeration over exact integers
        expected_nulls = set()
        expected_delta = None
        expected_gamma = None
        for nn in range(1, 5):
            for mm in range(-16, 17):
                lam = nn**4 - mm**2
                if lam == 0:
                    expected_nulls.add((mm, nn))
                    continue
                expected_delta = abs(lam) if expected_delta is None else min(expected_delta, abs(lam))
                if lam < 0:
                    expected_gamma = -lam if expected_gamma is None else min(expected_gamma, -lam)
        assert expected_nulls == {(1, 1), (-1, 1), (4, 2), (-4, 2),
                                  (9, 3), (-9, 3), (16, 4), (-16, 4)}
        assert expected_delta == 1 and expected_gamma == 3

        _, spectrum = pinned_constant_spectrum(4, 256)
        lattice = assemble_lattice(spectrum, FrequencySpec(p=1, q=1, m_max=16))
        found = {
            (int(i) - 16, int(j) + 1) for i, j in zip(*np.nonzero(lattice.null_mask))
        }
        assert found == expected_nulls
        assert lattice.null_count == 8
        assert lattice.delta == float(expected_delta)
        assert lattice.gamma == float(expected_gamma)


def test_criterion_3_inverse_bound_suite():
    with criterion(3, "inverse bounds on 100 random range fields with tight witnesses", 5.0):
        _, spectrum = pinned_constant_spectrum(4, 256)
        lattice = assemble_lattice(spectrum, FrequencySpec(p=1, q=1, m_max=16))
        report = verify_inverse_bounds(lattice, trials=100, seed=2026)
        assert report.worst_norm_ratio <= 1.0
        assert report.worst_pairing_ratio >= -1.0 / lattice.gamma - 1e-12
        assert report.worst_sup_ratio <= 1.0
        assert report.delta_mode == (0, 1)
        assert abs(report.delta_witness_ratio - 1.0) <= 1e-12
        assert report.gamma_mode in ((2, 1), (-2, 1))
        assert abs(report.gamma_witness_ratio - (-1.0 / 3.0)) <= 1e-12


def test_criterion_4_tail_sum_oracle():
    with criterion(4, "tail sum 11/9 on the small truncation, Cauchy growth after", 1.0):
        _, spectrum = pinned_constant_spectrum(1, 64)
        lattice = assemble_lattice(spectrum, FrequencySpec(p=1, q=1, m_max=2))
        result = tail_sum(lattice)
        exact = Fraction(11, 9)
        assert abs(result.total - float(exact)) <= 1e-15 * float(exact)

        _, spectrum4 = pinned_constant_spectrum(4, 64)
        totals = [
            tail_sum(assemble_lattice(spectrum4, FrequencySpec(1, 1, m))).total
            for m in (8, 16, 32, 64, 128)
        ]
        assert all(b >= a for a, b in zip(totals, totals[1:]))
        increments = np.diff(totals)
        assert np.all(np.diff(increments) < 0)


def test_criterion_5_transform_fidelity():
    with criterion(5, "transform round trip and Parseval over 50 random fields", 5.0):
        profile, spectrum = pinned_constant_spectrum(4, 256)
        freq = FrequencySpec(p=1, q=1, m_max=8)
        rng = np.random.default_rng(77)
        for _ in range(50):
            c = rng.standard_normal((17, 4)) + 1j * rng.standard_normal((17, 4))
            u = FourierField(0.5 * (c + np.conj(c[::-1, :])))
            field = synthesize(u, spectrum, freq)
            back = analyze(field, spectrum, profile, freq)
            assert np.max(np.abs(back.coeff - u.coeff)) <= 1e-10
            energy = float(np.sum(np.abs(u.coeff) ** 2))
            assert inner_product(field, field, profile) == pytest.approx(energy, rel=1e-8)


def _manufactured_setup():
    profile, spectrum = pinned_constant_spectrum(4, 512)
    freq = FrequencySpec(p=1, q=1, m_max=8)
    ctx = SolveContext.build(profile, spectrum, freq)
    g = tanh_nonlinearity(0.5)
    target = mode_field(freq.m_max, 4, [(1, 1, 0.1), (0, 2, 0.05)])
    coeff = apply_L(target, ctx.lattice).coeff + ctx.nonlinear_coeff(target, g).coeff
    f_hat = synthesize(FourierField(coeff), spectrum, freq, time_nodes=ctx.time_nodes)
    spec = decompose_forcing(f_hat, ctx, margin=0.05)
    return ctx, g, target, spec


def test_criterion_6_manufactured_semilinear_solve():
    with criterion(6, "manufactured semilinear recovery under continuation", 60.0):
        ctx, g, target, spec = _manufactured_setup()
        config = SolverConfig(tol=1e-10, eps_stop=2e-9, limit_tol=1e-8, final_tol=1e-7)
        trace = continuation_solve(spec, g, config, ctx)
        err = float(np.sqrt(np.sum(np.abs(trace.u.coeff - target.coeff) ** 2)))
        assert err <= 1e-7

        raw = PhysicalField(
            values=spec.f_hat.values * ctx.profile.rho[None, :],
            times=spec.f_hat.times, period=spec.f_hat.period, grid=spec.f_hat.grid,
        )
        assert weak_residual(trace.u, raw, g, ctx.profile, ctx) <= 1e-6

        eps_norm = np.array([s.eps_times_norm for s in trace.steps])
        assert eps_norm[-1] <= 1e-3 * eps_norm[0]  # eps |u| tends to zero
        for name in ("eps_times_norm", "L_u_norm", "l1_norm", "sup_norm"):
            series = np.array([getattr(s, name) for s in trace.steps])
            assert series.max() <= 10.0 * max(series[0], 1e-8)  # bounded monitors


def test_criterion_7_a3_stress_terminates():
    with criterion(7, "A3-violating stress run stops with a diagnostic", 60.0):
        profile, spectrum = pinned_constant_spectrum(4, 512)
        freq = FrequencySpec(p=1, q=1, m_max=8)
        ctx = SolveContext.build(profile, spectrum, freq)
        g = tanh_nonlinearity(1.0)
        f = mode_field(freq.m_max, 4, [(1, 1, 2.6)])
        f_hat = synthesize(f, spectrum, freq, time_nodes=ctx.time_nodes)
        spec = decompose_forcing(f_hat, ctx, margin=0.1)
        with pytest.raises((MonitorBlowup, NonConvergence)) as info:
            continuation_solve(spec, g, SolverConfig(waive_a3=True), ctx)
        assert info.value.trace is not None


def test_criterion_8_variable_coefficient_asymptotics():
    with criterion(8, "calibrated preset keeps b_n free of a growth trend", 30.0):
        grid = SpatialGrid.uniform(VARIABLE_REFERENCE_RESOLUTION)
        alpha, beta, rho0 = preset_samples("exp-linear", grid, {"beta": 0.2, "rho0": 1.2})
        profile = build_profiles(alpha, beta, rho0, grid, strict_a2=True, calibrate=True)
        spectrum = solve_eigenproblem(profile, 25)
        fit = fit_asymptotics(spectrum, 5)
        n = np.arange(5, 21, dtype=float)
        band = np.abs(fit.b[4:20])
        slope = np.polyfit(n, band, 1)[0]
        assert abs(slope) <= 0.05 * np.mean(band)
