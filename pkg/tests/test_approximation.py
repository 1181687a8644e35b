import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixmod.approximation import (RatioReport, angle_surrogate, bernstein_check, best_angle_l2,
                                  best_angle_optimize, direct_estimate_sides, in_sharp_domain,
                                  inverse_rhs, inverse_estimate_sides, realization_rhs,
                                  realization_sides, sharp_exponent)
from mixmod.lorentz import L2, LorentzIndex, norm
from mixmod.smoothness import ModulusSearchConfig
from mixmod.spectrum import SpectralFunction, frac_derivative, partial_sum

from conftest import random_function, spectral_functions

COS2 = SpectralFunction.cosine_product([1, 1])
INDICES = [LorentzIndex(2.5, 1.5), LorentzIndex(4, 3), LorentzIndex(1.5, 3)]


class TestRatioReport:
    def test_conventions(self):
        assert RatioReport({}, 0.0, 0.0).ratio == 1.0
        assert RatioReport({}, 1.0, 0.0).ratio == math.inf
        assert RatioReport({}, 1.0, 0.0).unbounded
        assert not RatioReport({}, 0.0, 0.0).unbounded
        assert RatioReport({}, 3.0, 4.0).ratio == 0.75

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            RatioReport({}, -1.0, 1.0)


class TestAngle:
    def test_product_of_cosines(self):
        # every frequency of cos x cos y exceeds 0 in both coordinates
        assert math.isclose(angle_surrogate(COS2, (0, 0), L2), 0.5, rel_tol=1e-12)
        assert math.isclose(best_angle_l2(COS2, (0, 0)), 0.5, rel_tol=1e-12)

    @pytest.mark.parametrize("l", [(1, 0), (0, 1), (3, 3)])
    def test_one_cutoff_at_band_removes_everything(self, l):
        assert angle_surrogate(COS2, l, LorentzIndex(3, 2)) == 0.0

    @given(spectral_functions(), st.integers(0, 8), st.integers(0, 8))
    def test_l2_surrogate_is_exact(self, f, l1, l2):
        l = (l1, l2)[: f.dim]
        assert abs(angle_surrogate(f, l, L2) - best_angle_l2(f, l)) <= 1e-6 * max(1.0, f.l2_norm())

    @given(spectral_functions(dims=(2,)), st.integers(0, 6), st.integers(0, 6), st.integers(0, 2))
    def test_monotone_in_cutoff(self, f, l1, l2, grow):
        assert best_angle_l2(f, (l1 + grow, l2)) <= best_angle_l2(f, (l1, l2)) + 1e-15

    @pytest.mark.parametrize("init", ["zero", "angular"])
    def test_optimizer_reaches_l2(self, rng, init):
        f = random_function(rng, 2, 3)
        r = best_angle_optimize(f, (1, 2), L2, iters=500, init=init)
        assert abs(r.optimized - r.exact_l2) <= 1e-4

    @pytest.mark.parametrize("idx", INDICES)
    def test_optimizer_never_worse_than_surrogate(self, rng, idx):
        f = random_function(rng, 2, 3)
        r = best_angle_optimize(f, (1, 1), idx, iters=40)
        assert r.optimized <= r.surrogate
        assert all(b <= a for a, b in zip(r.history, r.history[1:]))

    def test_optimizer_components_are_admissible(self, rng):
        f = random_function(rng, 2, 3)
        l = (1, 2)
        r = best_angle_optimize(f, l, LorentzIndex(3, 2), iters=20)
        for j, T in r.components.items():
            if len(T):
                assert np.all(np.abs(T.keys[:, j]) <= l[j])
        total = sum(r.components.values(), SpectralFunction.zero(2))
        assert math.isclose(norm(f - total, LorentzIndex(3, 2)), r.optimized, rel_tol=1e-9)

    def test_optimizer_rejects_bad_init(self):
        with pytest.raises(ValueError):
            best_angle_optimize(COS2, (0, 0), L2, init="random")


class TestBernstein:
    @pytest.mark.parametrize("n", [1, 3, 7])
    @pytest.mark.parametrize("idx", [L2, *INDICES])
    def test_single_harmonic(self, n, idx):
        # (cos nx)' = -n sin nx has the same rearrangement as n cos nx
        T = SpectralFunction.cosine_product([n])
        assert math.isclose(bernstein_check(T, (1,), idx).ratio, n / (n + 1), rel_tol=1e-6)

    def test_zero_order(self, rng):
        T = random_function(rng, 2, 4)
        assert math.isclose(bernstein_check(T, (0, 0), LorentzIndex(3, 2)).ratio, 1.0, rel_tol=1e-12)

    @pytest.mark.parametrize("idx", INDICES)
    def test_bounded_by_one(self, rng, idx):
        T = random_function(rng, 2, 4)
        assert bernstein_check(T, (1, 2), idx).ratio <= 1.0

    def test_rejects_fractional_and_small_n(self):
        with pytest.raises(ValueError):
            bernstein_check(COS2, (0.5, 1), L2)
        with pytest.raises(ValueError):
            bernstein_check(SpectralFunction.cosine_product([3]), (1,), L2, n=(2,))


class TestRealization:
    def test_zero_function(self):
        r = realization_sides(SpectralFunction.zero(2), (2, 2), (1, 1), L2)
        assert (r.lhs, r.rhs, r.ratio) == (0.0, 0.0, 1.0)

    def test_full_subset_term(self, rng):
        f = random_function(rng, 2, 6)
        n, alpha, idx = (3, 4), (0.5, 1.5), LorentzIndex(2.5, 1.5)
        _, parts = realization_rhs(f, n, alpha, idx, terms=True)
        expect = 3 ** -0.5 * 4 ** -1.5 * norm(frac_derivative(partial_sum(f, n), alpha), idx)
        assert math.isclose(parts[frozenset({0, 1})], expect, rel_tol=1e-12)
        assert parts[None] == angle_surrogate(f, n, idx)

    def test_cutoff_beyond_band(self):
        # only the derivative term survives: n^-1 ||(cos x)'|| = ||cos||/n
        f = SpectralFunction.cosine_product([1])
        assert math.isclose(realization_rhs(f, (4,), (1,), L2), norm(f, L2) / 4, rel_tol=1e-12)

    @pytest.mark.parametrize("idx", INDICES)
    def test_ratio_is_moderate(self, rng, idx):
        f = random_function(rng, 2, 5)
        r = realization_sides(f, (4, 4), (1, 1), idx, ModulusSearchConfig(8, 1))
        assert 0.1 < r.ratio < 20

    def test_rejects_zero_cutoff(self):
        with pytest.raises(ValueError):
            realization_sides(COS2, (0, 1), (1, 1), L2)


class TestDirect:
    def test_cos_at_zero_cutoff(self):
        # Y_0(cos) = ||cos||, omega_1(cos, 1) = 2 sin(1/2) ||cos||
        f = SpectralFunction.cosine_product([1])
        r = direct_estimate_sides(f, (0,), (1,), L2)
        assert math.isclose(r.ratio, 1 / (2 * math.sin(0.5)), rel_tol=1e-6)

    def test_cutoff_at_band_is_zero(self):
        r = direct_estimate_sides(COS2, (1, 1), (1, 1), L2)
        assert r.lhs == 0.0 and r.ratio == 0.0


class TestInverse:
    def test_domains(self):
        assert sharp_exponent(LorentzIndex(3, 1.5)) == 1.5
        assert sharp_exponent(LorentzIndex(3, 4)) == 2.0
        assert in_sharp_domain(LorentzIndex(1.5, 1.5))
        assert in_sharp_domain(LorentzIndex(4, 3))
        assert not in_sharp_domain(LorentzIndex(1.5, 3))
        assert not in_sharp_domain(LorentzIndex(3, 1))

    def test_outside_sharp_domain_raises(self):
        with pytest.raises(ValueError):
            inverse_rhs(COS2, (2, 2), (1, 1), LorentzIndex(1.5, 3), "sharp")
        inverse_rhs(COS2, (2, 2), (1, 1), LorentzIndex(1.5, 3), "natural")

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            inverse_rhs(COS2, (2, 2), (1, 1), L2, "fast")

    @pytest.mark.parametrize("variant", ["natural", "sharp"])
    @pytest.mark.parametrize("idx", [LorentzIndex(2.5, 1.5), LorentzIndex(4, 3)])
    def test_single_harmonic(self, variant, idx):
        # Y_nu(cos 3x) = ||cos 3x|| for nu < 3 and 0 afterwards
        f = SpectralFunction.cosine_product([3])
        n, a = 4, 0.7
        y = norm(f, idx)
        beta = 1.0 if variant == "natural" else sharp_exponent(idx)
        s = sum(nu ** (beta * a - 1) * y ** beta for nu in (1, 2))
        assert math.isclose(inverse_rhs(f, (n,), (a,), idx, variant), n ** -a * s ** (1 / beta), rel_tol=1e-12)

    def test_sharp_improves_natural_when_tau_small(self, rng):
        f = random_function(rng, 2, 5)
        idx = LorentzIndex(2.5, 1.5)
        assert inverse_rhs(f, (4, 4), (1, 1), idx, "sharp") <= inverse_rhs(f, (4, 4), (1, 1), idx, "natural")

    def test_sides(self, rng):
        f = random_function(rng, 2, 4)
        r = inverse_estimate_sides(f, (2, 2), (1, 1), L2, "sharp", ModulusSearchConfig(6, 0))
        assert r.params["estimate"] == "inverse.sharp" and 0 < r.ratio < 50
