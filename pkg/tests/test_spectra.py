import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peakcap import spectra as sp
from peakcap.spectra import Kind


PARAMETRIC = [
    sp.white(),
    sp.gauss_markov(0.0),
    sp.gauss_markov(0.5),
    sp.gauss_markov(0.9),
    sp.gauss_markov(0.999),
    sp.gauss_markov(0.5, "continuous"),
    sp.gauss_markov(0.9, "continuous"),
    sp.clarke(),
    sp.clarke(10.0),
]


def triangle_table(half_width=1.0, n=101, time_domain="continuous"):
    w = np.linspace(-half_width, half_width, n)
    d = np.maximum(0.0, 1 - np.abs(w) / half_width)
    d = d / (np.trapezoid(d, w) / (2 * math.pi))
    return w, d


def test_white_density_is_one():
    assert sp.density(sp.white(), 1.3) == 1.0


def test_memoryless_gauss_markov_is_flat():
    w = np.linspace(-math.pi, math.pi, 7)
    np.testing.assert_allclose(sp.density(sp.gauss_markov(0.0), w), 1.0)


def test_gm_continuous_peak():
    a = -math.log(0.9)
    assert sp.density(sp.gauss_markov(0.9, "continuous"), 0.0) == pytest.approx(2 / a, rel=1e-14)
    assert 2 / a == pytest.approx(18.982, abs=1e-3)


def test_gm_continuous_density_is_fourier_transform_of_autocorrelation():
    from scipy import integrate

    m = sp.gauss_markov(0.9, "continuous")
    for w in (0.0, 0.05, 0.3, 2.0):
        val, _ = integrate.quad(lambda t: 2 * 0.9**t, 0, np.inf, weight="cos", wvar=w)
        assert sp.density(m, w) == pytest.approx(val, rel=1e-8)


def test_clarke_density_vanishes_outside_band():
    m = sp.clarke(2.0)
    edge = 2 * math.pi * 2.0
    assert sp.density(m, edge) == 0.0
    assert sp.density(m, -1.01 * edge) == 0.0
    assert sp.density(m, 0.999999 * edge) > 100


@pytest.mark.parametrize("model", PARAMETRIC, ids=lambda m: m.describe())
def test_unit_variance(model):
    if model.kind is Kind.GAUSS_MARKOV_CONTINUOUS and model.rho == 0:
        pytest.skip("no density")
    val, err = sp.spectral_integral(model, lambda w, s: s)
    assert val == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("model", PARAMETRIC, ids=lambda m: m.describe())
def test_density_nonnegative_on_random_points(model):
    rng = np.random.default_rng(1)
    if model.discrete:
        w = rng.uniform(-math.pi, math.pi, 10_000)
    else:
        w = rng.standard_cauchy(10_000) * 10
    assert np.all(sp.density(model, w) >= 0)


def test_discrete_domain_is_enforced():
    with pytest.raises(ValueError):
        sp.density(sp.gauss_markov(0.5), 4.0)
    assert sp.density(sp.gauss_markov(0.5), math.pi) > 0


def test_autocorrelation_examples():
    assert sp.autocorrelation(sp.gauss_markov(0.9), 2) == pytest.approx(0.81)
    assert sp.autocorrelation(sp.white(), 3) == 0
    for m in PARAMETRIC:
        assert sp.autocorrelation(m, 0) == pytest.approx(1.0, abs=1e-9)


def test_autocorrelation_rejects_block_fading():
    with pytest.raises(ValueError):
        sp.autocorrelation(sp.block_fading(3), 1)


def test_parseval_constant():
    rho = 0.9
    assert sp.parseval_sum(sp.gauss_markov(rho), 200) == pytest.approx((1 + rho**2) / (1 - rho**2), abs=1e-6)
    s2, _ = sp.squared_density_integral(sp.gauss_markov(rho))
    assert s2 == pytest.approx(1.81 / 0.19, rel=1e-12)


def test_clarke_squared_integral_diverges():
    assert math.isinf(sp.squared_density_integral(sp.clarke(10.0))[0])


@pytest.mark.parametrize("rho", [-0.1, 1.0, 1.5, float("nan")])
def test_rho_validation(rho):
    with pytest.raises(ValueError):
        sp.gauss_markov(rho)


def test_tabulated_rejects_negative_samples():
    w, d = triangle_table()
    d[10] = -1e-3
    with pytest.raises(ValueError):
        sp.tabulated(w, d, "continuous", renormalize=True)


def test_tabulated_variance_check_and_renormalize():
    w, d = triangle_table()
    with pytest.raises(ValueError):
        sp.tabulated(w, 2 * d, "continuous")
    m = sp.tabulated(w, 2 * d, "continuous", renormalize=True)
    assert m.scale == pytest.approx(0.5, rel=1e-12)
    assert sp.spectral_integral(m, lambda x, s: s)[0] == pytest.approx(1.0, abs=1e-12)


def test_tabulated_query_outside_range():
    w, d = triangle_table()
    m = sp.tabulated(w, d, "continuous")
    with pytest.raises(ValueError):
        sp.density(m, 1.5)


def test_tabulated_discrete_must_span_full_band():
    w = np.linspace(-1, 1, 11)
    with pytest.raises(ValueError):
        sp.tabulated(w, np.ones_like(w) * math.pi, "discrete")


def test_tabulated_gm_autocorrelation_matches_parametric():
    w = np.linspace(-math.pi, math.pi, 20001)
    m = sp.tabulated(w, sp.density(sp.gauss_markov(0.5), w), "discrete", renormalize=True)
    np.testing.assert_allclose(sp.autocorrelation(m, np.arange(6)), 0.5 ** np.arange(6), atol=1e-6)


def test_asymmetric_table_gives_hermitian_autocorrelation():
    w = np.linspace(-math.pi, math.pi, 9)
    d = np.linspace(0.2, 1.8, 9)
    m = sp.tabulated(w, d, "discrete", renormalize=True)
    r = sp.autocorrelation(m, np.array([-3, -1, 1, 3]))
    assert np.iscomplexobj(r)
    np.testing.assert_allclose(r[:2], np.conj(r[2:][::-1]), atol=1e-14)


def test_load_table_formats(tmp_path):
    w, d = triangle_table(n=11)
    body = "\n".join(f"{a};{b}" for a, b in zip(w, d))
    p = tmp_path / "t.txt"
    p.write_text("# a comment\nfreq;density\n" + body + "\n\n", encoding="utf-8")
    m = sp.load_table(p, "continuous")
    np.testing.assert_allclose(m._dens, d)
    p.write_text("\n".join(f"{a} {b}" for a, b in zip(w, d)), encoding="utf-8")
    assert sp.load_table(p, "continuous").support == (-1.0, 1.0)


def test_load_table_bad_row(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("0,1\n1,x\n", encoding="utf-8")
    with pytest.raises(ValueError, match="bad.csv:2"):
        sp.load_table(p, "continuous")


@settings(max_examples=50, deadline=None)
@given(rho=st.floats(0, 0.99), k=st.integers(-50, 50))
def test_autocorrelation_bounded_and_even(rho, k):
    m = sp.gauss_markov(rho)
    r = sp.autocorrelation(m, k)
    assert abs(r) <= 1.0
    assert r == sp.autocorrelation(m, -k)


@settings(max_examples=30, deadline=None)
@given(f_m=st.floats(0.05, 20), t=st.floats(-5, 5))
def test_clarke_autocorrelation_bounded(f_m, t):
    assert abs(sp.autocorrelation(sp.clarke(f_m), t)) <= 1.0 + 1e-15


def test_models_are_immutable():
    m = sp.gauss_markov(0.5)
    with pytest.raises(Exception):
        m.rho = 0.1
