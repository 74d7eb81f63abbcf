import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from swiptsec import fading
from swiptsec.fading import KappaMuParams, cdf, log_pdf, mrc_composite, pdf, sample, sample_mrc, sf
from swiptsec.quadrature import integrate

# Frozen oracle values computed offline by independent routes
PDF_K1_M2_Y1_AT1 = 0.6256047933054542  # Poisson-weighted gamma-density mixture (scipy.stats)
CDF_K2_M15_Y3_AT2 = 0.3371330150463854  # adaptive quadrature of the mixture density

KAPPAS = (0.0, 0.5, 1.0, 3.0)
MUS = (0.5, 1.0, 2.0, 6.0)
MEANS = (0.1, 1.0, 10.0)
GRID = [KappaMuParams(k, m, y) for k in KAPPAS for m in MUS for y in MEANS]


def _ids(p):
    return f"k{p.kappa:g}-m{p.mu:g}-y{p.mean_snr:g}"


def _upper(p):
    u = p.mean_snr + 10 * math.sqrt(p.variance)
    while sf(p, u) > 1e-16:
        u *= 1.5
    return u


def _integral_of_pdf(p, upper, weight=None):
    # gamma = t^2 removes the t^(2 mu - 2) singularity at the origin for mu < 1
    def f(t):
        g = t * t
        v = pdf(p, g) * 2 * t
        return v if weight is None else v * weight(g)

    return integrate(f, 0.0, math.sqrt(upper), rel_tol=1e-12, abs_tol=1e-14).value


def test_params_validation():
    with pytest.raises(ValueError):
        KappaMuParams(-0.1, 1, 1)
    with pytest.raises(ValueError):
        KappaMuParams(1, 0, 1)
    with pytest.raises(ValueError):
        KappaMuParams(1, 1, 0)


def test_pdf_examples():
    assert pdf(KappaMuParams(1e-12, 1, 1), 1.0) == pytest.approx(math.exp(-1), abs=1e-6)
    assert pdf(KappaMuParams(1, 2, 1), 1.0) == pytest.approx(PDF_K1_M2_Y1_AT1, rel=1e-12)


def test_pdf_normalizes_example():
    p = KappaMuParams(1, 1, 1)
    val = integrate(lambda g: pdf(p, g), 0.0, 50.0, rel_tol=1e-12, abs_tol=1e-14).value
    assert val == pytest.approx(1.0, abs=1e-8)


def test_pdf_negative_argument():
    with pytest.raises(ValueError):
        pdf(KappaMuParams(1, 1, 1), -1.0)


@pytest.mark.parametrize("p", GRID, ids=_ids)
def test_normalization_cdf_and_mean(p):
    u = _upper(p)
    assert _integral_of_pdf(p, u) == pytest.approx(1.0, abs=1e-8)
    for g in (0.3 * p.mean_snr, p.mean_snr, 2.5 * p.mean_snr):
        assert cdf(p, g) == pytest.approx(_integral_of_pdf(p, g), abs=1e-8)
    assert _integral_of_pdf(p, u, weight=lambda g: g) == pytest.approx(p.mean_snr, rel=1e-6)


@pytest.mark.parametrize("p", GRID[::5], ids=_ids)
def test_pdf_matches_mixture_oracle(p):
    g = np.linspace(0.05, 4, 9) * p.mean_snr
    k = np.arange(400)[:, None]
    mix = (stats.poisson.pmf(k, p.poisson_mean) * stats.gamma.pdf(g, p.mu + k, scale=p.scale)).sum(axis=0)
    np.testing.assert_allclose(pdf(p, g), mix, rtol=1e-10)


def test_pdf_matches_bessel_closed_form():
    from scipy.special import iv

    kappa, mu, ybar = 1.7, 2.3, 4.0
    g = np.linspace(0.1, 20, 30)
    c = mu * (1 + kappa) / ybar
    ref = (mu * (1 + kappa) ** ((mu + 1) / 2) / (kappa ** ((mu - 1) / 2) * math.exp(mu * kappa) * ybar)
           * (g / ybar) ** ((mu - 1) / 2) * np.exp(-c * g) * iv(mu - 1, 2 * mu * np.sqrt(kappa * (1 + kappa) * g / ybar)))
    np.testing.assert_allclose(pdf(KappaMuParams(kappa, mu, ybar), g), ref, rtol=1e-10)


def test_log_pdf_deep_tail_finite():
    p = KappaMuParams(2, 40, 10)
    v = log_pdf(p, np.array([1e-3, 500.0]))
    assert np.all(np.isfinite(v))


def test_cdf_examples():
    assert cdf(KappaMuParams(0.7, 1.3, 2), 0.0) == 0.0
    assert cdf(KappaMuParams(0.7, 1.3, 2), math.inf) == 1.0
    assert cdf(KappaMuParams(1e-12, 1, 1), math.log(2)) == pytest.approx(0.5, abs=1e-6)
    assert cdf(KappaMuParams(2, 1.5, 3), 2.0) == pytest.approx(CDF_K2_M15_Y3_AT2, abs=1e-8)


@pytest.mark.parametrize("kappa", [0.0, 1e-12])
def test_rayleigh_reduction(kappa):
    p = KappaMuParams(kappa, 1.0, 2.0)
    g = np.linspace(0, 20, 41)
    np.testing.assert_allclose(cdf(p, g), -np.expm1(-g / 2.0), atol=1e-6)


def test_rician_reduction():
    kappa, ybar = 1.0, 3.0
    p = KappaMuParams(kappa, 1.0, ybar)
    g = np.linspace(0, 25, 51)
    ref = stats.ncx2.cdf(2 * (1 + kappa) * g / ybar, 2, 2 * kappa)
    np.testing.assert_allclose(cdf(p, g), ref, atol=1e-6)


@pytest.mark.parametrize("kappa", [0.0, 1e-12])
def test_nakagami_reduction(kappa):
    p = KappaMuParams(kappa, 3.0, 2.0)
    g = np.linspace(0, 12, 41)
    np.testing.assert_allclose(cdf(p, g), stats.gamma.cdf(g, 3.0, scale=2.0 / 3.0), atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 5), st.floats(0.2, 8), st.floats(0.1, 50), st.floats(0, 30))
def test_cdf_sf_complement(kappa, mu, ybar, g):
    p = KappaMuParams(kappa, mu, ybar)
    c, s = cdf(p, g), sf(p, g)
    assert 0.0 <= c <= 1.0
    # each side is truncated to the default relative budget of 1e-10
    assert c + s == pytest.approx(1.0, abs=2e-10)


def test_mrc_composite():
    b = KappaMuParams(1, 1, 2)
    assert mrc_composite(b, 1) == b
    assert mrc_composite(b, 3) == KappaMuParams(1, 3, 6)
    with pytest.raises(ValueError):
        mrc_composite(b, 0)


def test_mrc_sum_of_branches_matches_composite():
    b = KappaMuParams(1.0, 1.5, 2.0)
    draws = sample_mrc(b, 2, np.random.default_rng(11), size=100_000)
    comp = mrc_composite(b, 2)
    stat = stats.kstest(draws, lambda x: cdf(comp, x)).statistic
    assert stat < 0.0065


def test_sampler_determinism():
    p = KappaMuParams(1.3, 0.7, 5.0)
    a = sample(p, np.random.default_rng(3), size=1000)
    b = sample(p, np.random.default_rng(3), size=1000)
    assert np.array_equal(a, b)


def test_sampler_mean():
    x = sample(KappaMuParams(0.0, 2.0, 4.0), np.random.default_rng(5), size=1_000_000)
    assert abs(x.mean() - 4.0) <= 3 * x.std() / 1e3


def test_sampler_ks_example():
    p = KappaMuParams(1.0, 1.5, 1.0)
    x = sample(p, np.random.default_rng(2024), size=100_000)
    assert stats.kstest(x, lambda v: cdf(p, v)).pvalue > 0.01


def test_variance_property():
    p = KappaMuParams(2.0, 1.7, 3.0)
    x = sample(p, np.random.default_rng(9), size=400_000)
    assert x.var() == pytest.approx(p.variance, rel=0.02)


def test_module_exports():
    assert set(fading.__all__) >= {"pdf", "cdf", "sample"}
