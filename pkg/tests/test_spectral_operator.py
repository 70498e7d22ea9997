from fractions import Fraction

import numpy as np
import pytest

from specbeam.errors import ConfigError, DegenerateTolerance, NotInRange, ShapeMismatch
from specbeam.reference import pinned_constant_spectrum
from specbeam.spectral_operator import (
    apply_L,
    apply_L_inverse,
    assemble_lattice,
    project_null,
    project_range,
    tail_sum,
)
from specbeam.transforms import FourierField, FrequencySpec, mode_field


# Brute-force oracle, written against plain loops before the lattice module
# was used anywhere: enumerate n^4 - (q m / p)^2 in exact arithmetic.
def brute_force_classification(n_modes, m_max, p=1, q=1):
    nulls = set()
    delta = None
    gamma = None
    tail = Fraction(0)
    for n in range(1, n_modes + 1):
        for m in range(-m_max, m_max + 1):
            lam = Fraction(n**4) - Fraction((q * m) ** 2, p**2)
            if lam == 0:
                nulls.add((m, n))
                continue
            delta = abs(lam) if delta is None else min(delta, abs(lam))
            if lam < 0:
                gamma = -lam if gamma is None else min(gamma, -lam)
            tail += Fraction(1, lam * lam)
    return nulls, delta, gamma, tail


@pytest.fixture(scope="module")
def constant_ctx():
    profile, spectrum = pinned_constant_spectrum(4, 256)
    freq = FrequencySpec(p=1, q=1, m_max=16)
    lattice = assemble_lattice(spectrum, freq)
    return profile, spectrum, freq, lattice


class TestClassification:
    def test_null_set_matches_brute_force(self, constant_ctx):
        _, _, freq, lattice = constant_ctx
        nulls, delta, gamma, _ = brute_force_classification(4, 16)
        found = {
            (int(i) - freq.m_max, int(j) + 1)
            for i, j in zip(*np.nonzero(lattice.null_mask))
        }
        assert found == nulls
        assert found == {(1, 1), (-1, 1), (4, 2), (-4, 2), (9, 3), (-9, 3), (16, 4), (-16, 4)}
        assert lattice.null_count == 8

    def test_gap_constants_exact(self, constant_ctx):
        _, _, _, lattice = constant_ctx
        _, delta, gamma, _ = brute_force_classification(4, 16)
        assert lattice.delta == float(delta) == 1.0
        assert lattice.gamma == float(gamma) == 3.0
        assert lattice.delta_mode == (0, 1)
        assert lattice.gamma_mode in ((2, 1), (-2, 1))

    def test_longer_period_substitution(self):
        # T = 4 pi: theta_m = m / 2, lambda(2, 1) = 0 and lambda(1, 1) = 3/4
        _, spectrum = pinned_constant_spectrum(2, 128)
        freq = FrequencySpec(p=2, q=1, m_max=4)
        lattice = assemble_lattice(spectrum, freq)
        assert lattice.values[lattice.mode_index(2, 1)] == pytest.approx(0.0, abs=1e-12)
        assert lattice.null_mask[lattice.mode_index(2, 1)]
        assert lattice.values[lattice.mode_index(1, 1)] == pytest.approx(0.75)

    def test_symmetry_in_m(self, constant_ctx):
        _, _, _, lattice = constant_ctx
        assert np.array_equal(lattice.values, lattice.values[::-1, :])

    def test_degenerate_tolerance_rejected(self, constant_ctx):
        _, spectrum, freq, _ = constant_ctx
        with pytest.raises(DegenerateTolerance):
            assemble_lattice(spectrum, freq, null_tol=1.5)

    def test_coprimality_enforced(self):
        with pytest.raises(ConfigError):
            FrequencySpec(p=2, q=4, m_max=4)

    def test_row_minima_grow_once_spatial_term_dominates(self):
        _, spectrum = pinned_constant_spectrum(8, 256)
        freq = FrequencySpec(p=1, q=1, m_max=4)
        lattice = assemble_lattice(spectrum, freq)
        minima = np.min(np.abs(lattice.values), axis=0)
        assert np.all(np.diff(minima[1:]) > 0)  # n >= 2: n^4 > m_max^2


class TestOperatorActions:
    def test_apply_identity_mode(self, constant_ctx):
        _, _, freq, lattice = constant_ctx
        u = mode_field(freq.m_max, 4, [(0, 1, 1.0)])
        h = apply_L(u, lattice)
        assert h.coeff[lattice.mode_index(0, 1)] == pytest.approx(1.0)

    def test_apply_null_mode_annihilates(self, constant_ctx):
        _, _, freq, lattice = constant_ctx
        u = mode_field(freq.m_max, 4, [(1, 1, 1.0)])
        assert apply_L(u, lattice).norm() == pytest.approx(0.0, abs=1e-14)

    def test_apply_scales_by_value(self, constant_ctx):
        _, _, freq, lattice = constant_ctx
        u = mode_field(freq.m_max, 4, [(2, 1, 3.0)])
        h = apply_L(u, lattice)
        assert h.coeff[lattice.mode_index(2, 1)] == pytest.approx(-9.0)

    def test_shape_mismatch(self, constant_ctx):
        _, _, _, lattice = constant_ctx
        with pytest.raises(ShapeMismatch):
            apply_L(FourierField(np.zeros((5, 4), dtype=complex)), lattice)

    def test_inverse_unit_mode(self, constant_ctx):
        _, _, freq, lattice = constant_ctx
        h = mode_field(freq.m_max, 4, [(0, 1, 1.0)])
        u = apply_L_inverse(h, lattice)
        assert u.coeff[lattice.mode_index(0, 1)] == pytest.approx(1.0)

    def test_inverse_negative_gap_mode_is_tight(self, constant_ctx):
        _, _, freq, lattice = constant_ctx
        h = mode_field(freq.m_max, 4, [(2, 1, 1.0)])
        u = apply_L_inverse(h, lattice)
        assert u.coeff[lattice.mode_index(2, 1)] == pytest.approx(-1.0 / 3.0, abs=1e-15)
        keep = ~lattice.null_mask
        pairing = np.sum(np.abs(h.coeff[keep]) ** 2 / lattice.values[keep])
        assert pairing / h.norm() ** 2 == pytest.approx(-1.0 / lattice.gamma, abs=1e-15)

    def test_inverse_rejects_null_content(self, constant_ctx):
        _, _, freq, lattice = constant_ctx
        h = mode_field(freq.m_max, 4, [(1, 1, 0.5)])
        with pytest.raises(NotInRange):
            apply_L_inverse(h, lattice)

    def test_inverse_composition_is_identity_on_range(self, constant_ctx):
        _, _, _, lattice = constant_ctx
        rng = np.random.default_rng(11)
        coeff = rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(lattice.shape)
        coeff[lattice.null_mask] = 0.0
        h = FourierField(coeff)
        back = apply_L(apply_L_inverse(h, lattice), lattice)
        assert np.max(np.abs(back.coeff - h.coeff)) <= 1e-14 * np.max(np.abs(h.coeff))

    def test_inverse_norm_bound_random_fields(self, constant_ctx):
        _, _, _, lattice = constant_ctx
        rng = np.random.default_rng(5)
        for _ in range(100):
            coeff = rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(lattice.shape)
            coeff[lattice.null_mask] = 0.0
            h = FourierField(coeff)
            u = apply_L_inverse(h, lattice)
            assert u.norm() <= (1.0 / lattice.delta) * h.norm() * (1 + 1e-12)
            keep = ~lattice.null_mask
            pairing = np.sum(np.abs(h.coeff[keep]) ** 2 / lattice.values[keep])
            assert pairing >= -(1.0 / lattice.gamma) * h.norm() ** 2 * (1 + 1e-12)


class TestProjections:
    def test_range_only_field(self, constant_ctx):
        _, _, freq, lattice = constant_ctx
        h = mode_field(freq.m_max, 4, [(0, 1, 1.0)])
        assert project_null(h, lattice).norm() == 0.0

    def test_split_mixed_field(self, constant_ctx):
        _, _, freq, lattice = constant_ctx
        h = mode_field(freq.m_max, 4, [(0, 1, 1.0)], hermitian=False)
        h = FourierField(h.coeff + mode_field(freq.m_max, 4, [(1, 1, 1.0)], hermitian=False).coeff)
        range_part = project_range(h, lattice)
        null_part = project_null(h, lattice)
        assert range_part.coeff[lattice.mode_index(0, 1)] == 1.0
        assert null_part.coeff[lattice.mode_index(1, 1)] == 1.0
        assert np.array_equal(range_part.coeff + null_part.coeff, h.coeff)

    def test_pythagoras(self, constant_ctx):
        _, _, _, lattice = constant_ctx
        rng = np.random.default_rng(2)
        h = FourierField(rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(lattice.shape))
        total = h.norm() ** 2
        parts = project_range(h, lattice).norm() ** 2 + project_null(h, lattice).norm() ** 2
        assert parts == pytest.approx(total, rel=1e-12)


class TestTailSum:
    def test_small_truncation_exact_fraction(self):
        # n <= 1, |m| <= 2: non-null values {1, -3, -3} so the sum is 11/9
        _, spectrum = pinned_constant_spectrum(1, 64)
        freq = FrequencySpec(p=1, q=1, m_max=2)
        lattice = assemble_lattice(spectrum, freq)
        result = tail_sum(lattice)
        assert result.total == pytest.approx(float(Fraction(11, 9)), rel=1e-15)
        assert result.sup_constant == pytest.approx(np.sqrt(11.0 / 9.0), rel=1e-15)

    def test_matches_brute_force(self, constant_ctx):
        _, _, _, lattice = constant_ctx
        *_, tail = brute_force_classification(4, 16)
        assert tail_sum(lattice).total == pytest.approx(float(tail), rel=1e-12)

    def test_monotone_in_truncation(self):
        _, spectrum = pinned_constant_spectrum(4, 64)
        totals = []
        for m_max in (4, 8, 16, 32):
            lattice = assemble_lattice(spectrum, FrequencySpec(1, 1, m_max))
            totals.append(tail_sum(lattice).total)
        assert all(b >= a for a, b in zip(totals, totals[1:]))

    def test_increments_shrink(self):
        _, spectrum = pinned_constant_spectrum(4, 64)
        totals = [
            tail_sum(assemble_lattice(spectrum, FrequencySpec(1, 1, m))).total
            for m in (8, 16, 32, 64, 128)
        ]
        increments = np.diff(totals)
        assert np.all(np.diff(increments) < 0)
