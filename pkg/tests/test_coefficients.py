import numpy as np
import pytest

from specbeam.coefficients import (
    CALIBRATION_TOL,
    SpatialGrid,
    build_profiles,
    calibrate_normalization,
    normalization_integral,
    preset_samples,
    resample_profile,
)
from specbeam.errors import A2Violation, CalibrationFailed, ConfigError, NonPositiveDensity, ShapeMismatch


def _zeros(grid):
    return np.zeros_like(grid.nodes)


class TestSpatialGrid:
    def test_uniform_invariants(self):
        grid = SpatialGrid.uniform(64)
        assert grid.nodes[0] == 0.0
        assert grid.nodes[-1] == pytest.approx(np.pi, abs=1e-15)
        assert np.all(np.diff(grid.nodes) > 0)
        assert np.all(grid.weights > 0)
        assert grid.weights.sum() == pytest.approx(np.pi, rel=1e-14)

    def test_rejects_bad_span(self):
        nodes = np.linspace(0.1, np.pi, 10)
        weights = np.full(10, np.pi / 10)
        with pytest.raises(ValueError):
            SpatialGrid(nodes=nodes, weights=weights)

    def test_rejects_bad_weight_sum(self):
        grid = SpatialGrid.uniform(16)
        with pytest.raises(ValueError):
            SpatialGrid(nodes=grid.nodes, weights=grid.weights * 1.01)

    def test_spacing_rejects_graded(self):
        nodes = np.concatenate([[0.0], np.geomspace(1e-3, np.pi, 31)])
        nodes[-1] = np.pi
        weights = np.gradient(nodes)
        weights = weights * (np.pi / weights.sum())
        grid = SpatialGrid(nodes=nodes, weights=weights)
        with pytest.raises(ValueError):
            grid.spacing()


class TestBuildProfiles:
    def test_identity_coefficients(self):
        grid = SpatialGrid.uniform(128)
        prof = build_profiles(_zeros(grid), _zeros(grid), 1.0, grid, strict_a2=False)
        assert np.allclose(prof.rho, 1.0)
        assert np.allclose(prof.eta, 1.0)

    def test_constant_beta_matches_closed_form(self):
        # rho(pi) = 1.1 * exp(4 * 0.05 * pi); trapezoid is exact for constants
        grid = SpatialGrid.uniform(256)
        beta = np.full_like(grid.nodes, 0.05)
        prof = build_profiles(_zeros(grid), beta, 1.1, grid, strict_a2=False)
        expected = 1.1 * np.exp(0.2 * np.pi)
        assert prof.rho[-1] == pytest.approx(expected, rel=1e-13)
        assert expected == pytest.approx(2.0619, abs=5e-5)
        assert prof.eta[0] == 1.0

    def test_sine_beta_second_order_convergence(self):
        # closed form: rho = exp(4 a (1 - cos x)); trapezoid error is O(h^2)
        amp = 0.1
        errs = []
        for res in (64, 128, 256):
            grid = SpatialGrid.uniform(res)
            beta = amp * np.sin(grid.nodes)
            prof = build_profiles(_zeros(grid), beta, 1.0, grid, strict_a2=False)
            exact = np.exp(4.0 * amp * (1.0 - np.cos(grid.nodes)))
            errs.append(np.max(np.abs(prof.rho - exact) / exact))
        order1 = np.log2(errs[0] / errs[1])
        order2 = np.log2(errs[1] / errs[2])
        assert order1 == pytest.approx(2.0, abs=0.2)
        assert order2 == pytest.approx(2.0, abs=0.2)

    def test_nonpositive_density(self):
        grid = SpatialGrid.uniform(32)
        with pytest.raises(NonPositiveDensity):
            build_profiles(_zeros(grid), _zeros(grid), 0.0, grid, strict_a2=False)

    def test_strict_rejects_density_below_one(self):
        grid = SpatialGrid.uniform(64)
        beta = np.full_like(grid.nodes, -1.0)
        with pytest.raises(A2Violation):
            build_profiles(_zeros(grid), beta, 1.01, grid, strict_a2=True)

    def test_strict_requires_calibration_or_raises(self):
        grid = SpatialGrid.uniform(64)
        beta = np.full_like(grid.nodes, 0.05)
        with pytest.raises(A2Violation):
            build_profiles(_zeros(grid), beta, 1.1, grid, strict_a2=True)
        prof = build_profiles(_zeros(grid), beta, 1.1, grid, strict_a2=True, calibrate=True)
        assert normalization_integral(prof) == pytest.approx(np.pi, abs=1e-10)

    def test_shape_mismatch(self):
        grid = SpatialGrid.uniform(32)
        with pytest.raises(ShapeMismatch):
            build_profiles(np.zeros(5), np.zeros(5), 1.0, grid, strict_a2=False)


class TestCalibration:
    def test_identity_profile_needs_no_shift(self):
        grid = SpatialGrid.uniform(128)
        prof = build_profiles(_zeros(grid), _zeros(grid), 1.0, grid, strict_a2=False)
        out = calibrate_normalization(prof)
        assert abs(out.calibration_shift) < 1e-10

    def test_constant_alpha_shift_recovers_pi(self):
        # alpha = 0.1, beta = 0: the gauge integrand is exp(-(0.1 + c) x),
        # so the exact shift is c = -0.1
        grid = SpatialGrid.uniform(256)
        alpha = np.full_like(grid.nodes, 0.1)
        prof = build_profiles(alpha, _zeros(grid), 1.0, grid, strict_a2=False)
        out = calibrate_normalization(prof)
        assert out.calibration_shift == pytest.approx(-0.1, abs=1e-9)
        assert normalization_integral(out) == pytest.approx(np.pi, abs=1e-10)
        assert out.eta[0] == pytest.approx(1.0, abs=1e-14)

    def test_idempotent(self):
        grid = SpatialGrid.uniform(128)
        alpha = np.full_like(grid.nodes, 0.07)
        beta = np.full_like(grid.nodes, 0.02)
        prof = build_profiles(alpha, beta, 1.2, grid, strict_a2=False)
        once = calibrate_normalization(prof)
        twice = calibrate_normalization(once)
        assert abs(twice.calibration_shift) < 1e-10

    def test_unbracketable_gauge_fails(self):
        grid = SpatialGrid.uniform(64)
        beta = np.full_like(grid.nodes, 20.0)  # rho blows past any c in [-10, 10]
        prof = build_profiles(_zeros(grid), beta, 1.0, grid, strict_a2=False)
        with pytest.raises(CalibrationFailed):
            calibrate_normalization(prof)

    def test_tolerance_constant_is_tight(self):
        grid = SpatialGrid.uniform(128)
        alpha = np.full_like(grid.nodes, 0.3)
        prof = build_profiles(alpha, _zeros(grid), 1.0, grid, strict_a2=False)
        out = calibrate_normalization(prof)
        assert abs(normalization_integral(out) - np.pi) <= CALIBRATION_TOL


class TestPresetsAndResampling:
    def test_constant_preset(self):
        grid = SpatialGrid.uniform(32)
        alpha, beta, rho0 = preset_samples("constant", grid)
        assert np.all(alpha == 0.0) and np.all(beta == 0.0) and rho0 == 1.0

    def test_exp_linear_preset_params(self):
        grid = SpatialGrid.uniform(32)
        alpha, beta, rho0 = preset_samples("exp-linear", grid, {"beta": 0.2, "rho0": 1.2})
        assert np.all(beta == 0.2) and rho0 == 1.2

    def test_sine_perturbed_preset(self):
        grid = SpatialGrid.uniform(32)
        alpha, beta, rho0 = preset_samples("sine-perturbed", grid)
        assert beta.shape == grid.nodes.shape
        assert not np.allclose(beta, beta[0])

    def test_unknown_preset(self):
        grid = SpatialGrid.uniform(32)
        with pytest.raises(ConfigError):
            preset_samples("cubic", grid)

    def test_unused_params_rejected(self):
        grid = SpatialGrid.uniform(32)
        with pytest.raises(ConfigError):
            preset_samples("constant", grid, {"slope": 2.0})

    def test_resample_constant_exact(self):
        grid = SpatialGrid.uniform(64)
        beta = np.full_like(grid.nodes, 0.05)
        prof = build_profiles(_zeros(grid), beta, 1.1, grid, strict_a2=False)
        fine = resample_profile(prof, 256)
        expected = 1.1 * np.exp(0.2 * fine.grid.nodes)
        assert np.allclose(fine.rho, expected, rtol=1e-12)
