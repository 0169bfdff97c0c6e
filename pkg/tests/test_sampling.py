import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from peakcap import capacity as cap
from peakcap import sampling as smp
from peakcap import spectra as sp

GMC = sp.gauss_markov(0.9, "continuous")
A9 = -math.log(0.9)


def gm_b(a, K):
    # ∫ e^{-a|t|} · (triangle of half-width 2^-K, unit area), in a cancellation-free form
    d = a / 2**K
    if d < 1e-3:
        return 1 - d / 3 + d * d / 12 - d**3 / 60 + d**4 / 360
    return 2 / d**2 * (math.expm1(-d) + d)


def narrow_table(half_width, n=201):
    w = np.linspace(-half_width, half_width, n)
    d = np.maximum(0, 1 - np.abs(w) / half_width)
    d = d / (np.trapezoid(d, w) / (2 * math.pi))
    return w, d


def test_sinc():
    assert smp.sinc(0.0) == 1.0
    assert smp.sinc(2 * math.pi) == pytest.approx(0, abs=1e-15)
    x = np.array([1e-6, 9.9e-5, 1.01e-4, 0.5])
    np.testing.assert_allclose(smp.sinc(x), np.sin(x / 2) / (x / 2), rtol=1e-13)


class TestAliasedSpectrum:
    def test_gm_dominant_term(self):
        v = smp.aliased_spectrum(GMC, 8, 0.0)
        assert v == pytest.approx(256 * sp.density(GMC, 0.0), rel=1e-3)

    def test_even_and_continuous_at_band_edge(self):
        eps = 1e-7
        for m in (GMC, sp.clarke(1.0)):
            a = smp.aliased_spectrum(m, 1, math.pi - eps)
            b = smp.aliased_spectrum(m, 1, -math.pi + eps)
            assert a == pytest.approx(b, rel=1e-6)

    def test_band_limited_has_single_term(self):
        m = sp.clarke(0.2)  # 2π f_m = 1.26 < π
        w = np.linspace(-math.pi, math.pi, 101)
        single = sp.density(m, w) * smp.sinc(w) ** 2
        np.testing.assert_allclose(smp.aliased_spectrum(m, 0, w), single, rtol=1e-14)

    def test_integrates_to_b_K(self):
        for K in (0, 2):
            val = integrate.quad(lambda w: smp.aliased_spectrum(GMC, K, w), -math.pi, math.pi,
                                 points=[0], limit=400, epsabs=1e-13)[0] / (2 * math.pi)
            assert val == pytest.approx(gm_b(A9, K), abs=1e-9)

    def test_domain(self):
        with pytest.raises(ValueError):
            smp.aliased_spectrum(GMC, 0, 4.0)
        with pytest.raises(ValueError):
            smp.aliased_spectrum(sp.gauss_markov(0.9), 0, 0.0)


class TestVariance:
    @pytest.mark.parametrize("rho", [0.1, 0.5, 0.9, 0.999])
    @pytest.mark.parametrize("K", [0, 4, 8, 12, 16])
    def test_gm_closed_form(self, rho, K):
        m = sp.gauss_markov(rho, "continuous")
        assert smp.sampled_variance(m, K) == pytest.approx(gm_b(-math.log(rho), K), abs=1e-11)

    def test_increasing_to_one(self):
        b = [smp.sampled_variance(GMC, K) for K in range(4, 13)]
        assert all(x <= 1 for x in b)
        assert np.all(np.diff(b) > 0)
        assert 1 - smp.sampled_variance(GMC, 10) < 1e-3

    def test_band_limited_lower_bound(self):
        # Clarke band inside |ν| < 0.1 L
        K = 6
        m = sp.clarke(0.1 * 2**K / (2 * math.pi) * 0.999)
        assert smp.sampled_variance(m, K) >= smp.sinc(0.1) ** 2

    def test_tabulated(self):
        w, d = narrow_table(3.0)
        m = sp.tabulated(w, d, "continuous")
        direct = integrate.quad(lambda x: np.interp(x, w, d) * smp.sinc(x) ** 2, -3, 3, points=[0])[0] / (2 * math.pi)
        assert smp.sampled_variance(m, 0) == pytest.approx(direct, abs=1e-10)


class TestInformation:
    def test_gm_K12(self):
        ref = cap.gauss_markov_cp_closed(0.9, 1, "continuous")
        lim = smp.sampling_limit(GMC, 12, 1)
        assert abs(lim.i_K - ref.i_of_p) < 1e-3
        assert abs(lim.cp_KK - 0.634381) < 2e-3
        assert lim.cp_KK == smp.cp_KK(GMC, 12, 1)

    def test_monotone_refinement(self):
        ref = cap.gauss_markov_cp_closed(0.9, 1, "continuous").c_p
        errs = [abs(smp.cp_KK(GMC, K, 1) - ref) for K in (6, 8, 10, 12)]
        assert all(a > b for a, b in zip(errs, errs[1:]))

    def test_small_peak(self):
        P = 1e-6
        lim = smp.sampling_limit(GMC, 3, P)
        assert lim.i_K / P == pytest.approx(lim.b_K, rel=1e-4)

    def test_clarke(self):
        m = sp.clarke(1 / math.pi)
        ref = cap.information_rate_integral(m, 1)
        assert abs(smp.i_K(m, 6, 1) - ref) < 1e-3

    def test_clarke_with_overlapping_aliases(self):
        m = sp.clarke(1.0)  # 2π f_m > π at K = 0
        for K in (0, 1):
            lo, hi = smp.i_K_bounds(m, K, 1)
            assert lo - 1e-9 <= smp.i_K(m, K, 1) <= hi + 1e-9

    @pytest.mark.parametrize("K", [0, 2, 6, 10])
    @pytest.mark.parametrize("P", [0.1, 1, 10])
    def test_sandwich(self, K, P):
        lo, hi = smp.i_K_bounds(GMC, K, P)
        assert lo - 1e-9 <= smp.i_K(GMC, K, P) <= hi + 1e-9

    def test_rejections(self):
        with pytest.raises(ValueError):
            smp.cp_KK(GMC, 4, math.inf)
        with pytest.raises(ValueError):
            smp.cp_KK(sp.gauss_markov(0.0, "continuous"), 4, 1)
        with pytest.raises(ValueError):
            smp.cp_KK(GMC, -1, 1)

    def test_record_invariants(self):
        for K in (0, 5, 10):
            r = smp.sampling_limit(GMC, K, 2.0)
            assert 0 < r.b_K <= 1 and r.i_K >= 0 and r.cp_KK <= 1


class TestDiscreteConsistency:
    def test_K0_equals_discrete_formula_with_sinc_weight(self):
        # At K = 0 the sampled channel is the discrete channel whose density
        # is S(ω) sinc²(ω) on [-π, π], with variance b_0.
        w, d = narrow_table(2.0)
        m = sp.tabulated(w, d, "continuous")
        P = 1.5
        f = lambda x: float(np.interp(x, w, d)) * smp.sinc(x) ** 2
        b0 = integrate.quad(f, -2, 2, points=list(w[::20]), limit=400)[0] / (2 * math.pi)
        I0 = integrate.quad(lambda x: math.log1p(P * f(x)), -2, 2, points=list(w[::20]), limit=400)[0] / (2 * math.pi)
        assert smp.cp_KK(m, 0, P) == pytest.approx(b0 - I0 / P, abs=1e-10)

    def test_K0_close_to_discrete_cap_for_narrow_band(self):
        half = 0.02
        w, d = narrow_table(half)
        m = sp.tabulated(w, d, "continuous")
        wd = np.concatenate([[-math.pi], w, [math.pi]])
        dd = np.concatenate([[0.0], d, [0.0]])
        disc = sp.tabulated(wd, dd, "discrete")
        P = 1.0
        assert abs(smp.cp_KK(m, 0, P) - cap.cap_per_unit_energy(disc, P).c_p) < 1e-4


@settings(max_examples=20, deadline=None)
@given(rho=st.floats(0.05, 0.99), K=st.integers(0, 14))
def test_b_K_property(rho, K):
    m = sp.gauss_markov(rho, "continuous")
    b = smp.sampled_variance(m, K)
    assert 0 < b <= 1
    assert b == pytest.approx(gm_b(-math.log(rho), K), abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(K=st.integers(0, 10), P=st.floats(0.01, 50))
def test_cp_KK_below_one(K, P):
    assert smp.cp_KK(GMC, K, P) <= 1
