import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swiptsec import secrecy
from swiptsec.fading import KappaMuParams, cdf
from swiptsec.secrecy import (
    MeanInterpretation,
    Method,
    NumericsConfig,
    SystemConfig,
    coverage_quadrature,
    coverage_series,
    eaves_power_ratio,
    eaves_snr_params,
    gamma_threshold,
    main_snr_params,
    p_eve_quadrature,
    p_eve_series,
    pathloss,
    secrecy_outage,
    secrecy_throughput,
    transmission_probability,
    transmission_probability_cdf,
    transmission_probability_series,
)

# Frozen Monte Carlo oracles: scipy noncentral chi-square draws of the
# physical model (explicit per-branch MRC sum, max over eavesdroppers),
# generator seed 20261019, independent of swiptsec.montecarlo.
MC_DEFAULTS = (0.147631, 0.00011217668556299922)  # L=M=N=1, 1e7 trials
MC_L2M2N3 = (0.000392, 1.9795108890834625e-05)  # 1e6 trials
MC_L1M1N3 = (0.187969, 0.0003906874134637562)  # 1e6 trials
PATHLOSS_D10 = 147230.27368328627  # (4 pi / 0.3275)^2 * 100 by direct arithmetic

DEFAULT = SystemConfig()


def test_pathloss_examples():
    assert pathloss(1, 2, 1, 1, 4 * math.pi) == pytest.approx(1.0, rel=1e-15)
    assert pathloss(2, 2, 1, 1, 4 * math.pi) == pytest.approx(4.0, rel=1e-15)
    assert pathloss(10, 2, 1, 1, 0.3275) == pytest.approx(PATHLOSS_D10, rel=1e-14)
    with pytest.raises(ValueError):
        pathloss(0, 2, 1, 1, 1)


def test_eaves_power_ratio_examples():
    assert eaves_power_ratio(0.8, 1.0, 1.0) == pytest.approx(0.8 / 1.8, rel=1e-15)
    assert eaves_power_ratio(0.37, 0.0, 2.0) == pytest.approx(0.5, rel=1e-15)
    assert eaves_power_ratio(0.0, 1.0, 1.0) == 0.0


def test_gamma_threshold_examples():
    assert gamma_threshold(1.0, 1.0, 0.3) == 0.0
    assert gamma_threshold(3.0, 1.0, 0.0) == pytest.approx(1.0, rel=1e-15)
    assert gamma_threshold(7.0, 1.0, 0.5) == pytest.approx(15.0, rel=1e-14)
    with pytest.raises(ValueError):
        gamma_threshold(3.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        gamma_threshold(0.5, 1.0, 0.0)


@settings(max_examples=100)
@given(st.floats(0, 1e4), st.floats(0.01, 8), st.floats(0, 0.99))
def test_gamma_threshold_inverts_secrecy_rate(excess, R_s, alpha):
    g = math.expm1(R_s * math.log(2)) + excess
    th = gamma_threshold(g, R_s, alpha)
    if math.isinf(th):
        assert (math.log1p(g) - R_s * math.log(2)) / (1 - alpha) > 709
        return
    # log2(1+g) - (1-alpha) log2(1+th) = R_s
    lhs = math.log1p(g) - (1 - alpha) * math.log1p(th)
    assert lhs == pytest.approx(R_s * math.log(2), rel=1e-9, abs=1e-12)


def test_threshold_overflow_near_full_time_switching():
    cfg = DEFAULT.replace(alpha=0.995, main_branch=KappaMuParams(1.0, 1.0, 1e4))
    assert gamma_threshold(1e4, 1.0, 0.995) == math.inf
    res = secrecy_outage(cfg)
    assert res.p_out == pytest.approx(secrecy_outage(cfg, method="series").p_out, rel=1e-6)
    assert 1 - transmission_probability(cfg) <= res.p_out


def test_config_validation():
    for bad in ({"rho": 1.2}, {"alpha": -0.1}, {"R_s": 0.0}, {"L": 0}, {"N": 1.5}, {"PL_s": 0.0},
                {"sigma2_over_N0": -1.0}):
        with pytest.raises(ValueError):
            SystemConfig(**bad)
    with pytest.raises(ValueError):
        NumericsConfig(quad_rel_tol=0.1)
    with pytest.raises(ValueError):
        NumericsConfig(fixed_terms=0)


def test_snr_params_scaling():
    cfg = DEFAULT.replace(M=3)
    m = main_snr_params(cfg)
    assert (m.kappa, m.mu) == (1.0, 3.0)
    assert m.mean_snr == pytest.approx(3 * 10.0 / 10 ** 0.1, rel=1e-14)
    m2 = main_snr_params(cfg.replace(mean_interpretation=MeanInterpretation.COMBINER_OUTPUT))
    assert m2.mean_snr == pytest.approx(10.0 / 10 ** 0.1, rel=1e-14)
    e = eaves_snr_params(DEFAULT)
    assert e.mean_snr == pytest.approx(DEFAULT.omega * 1.0, rel=1e-15)
    assert eaves_snr_params(DEFAULT.replace(rho=0.0)) is None


def test_p_eve_silent_eavesdropper():
    cfg = DEFAULT.replace(rho=0.0)
    expected = 1 - cdf(main_snr_params(cfg), cfg.rate_threshold)
    assert p_eve_quadrature(cfg) == pytest.approx(expected, abs=1e-9)
    assert coverage_quadrature(cfg).p_eve == pytest.approx(expected, abs=1e-9)


def test_p_eve_far_rate_is_tiny():
    assert p_eve_quadrature(DEFAULT.replace(R_s=30.0)) < 1e-6


def test_p_out_defaults_against_mc_oracle():
    p_hat, se = MC_DEFAULTS
    assert abs(secrecy_outage(DEFAULT).p_out - p_hat) <= 4 * se


def test_p_out_multi_antenna_against_mc_oracle():
    p_hat, se = MC_L2M2N3
    cfg = DEFAULT.replace(L=2, M=2, N=3)
    assert abs(secrecy_outage(cfg).p_out - p_hat) <= 4 * se


def test_cooperating_eavesdroppers_exact_form():
    # the product form treats the N eavesdropper events as independent,
    # which overstates outage once N > 1
    cfg = DEFAULT.replace(N=3)
    res = secrecy_outage(cfg)
    p_hat, se = MC_L1M1N3
    assert abs(res.p_out - p_hat) <= 4 * se
    assert abs(res.p_out_product - p_hat) > 100 * se


def test_p_eve_series_vs_quadrature_defaults():
    q = p_eve_quadrature(DEFAULT)
    s = p_eve_series(DEFAULT)
    assert s == pytest.approx(q, rel=1e-6)


@pytest.mark.parametrize("changes", [
    {"M": 2}, {"M": 3, "N": 2}, {"alpha": 0.5, "rho": 1.0}, {"R_s": 2.5},
    {"main_branch": KappaMuParams(2.5, 1.7, 10.0), "eaves": KappaMuParams(0.4, 2.2, 1.0)},
    {"main_branch": KappaMuParams(1.0, 1.0, 100.0), "M": 4},
])
def test_series_vs_quadrature_coverage(changes):
    cfg = DEFAULT.replace(**changes)
    q = coverage_quadrature(cfg)
    s = coverage_series(cfg)
    assert s.p_eve == pytest.approx(q.p_eve, rel=1e-6)
    assert s.p_cov == pytest.approx(q.p_cov, rel=1e-6)


def test_series_silent_eavesdropper():
    cfg = DEFAULT.replace(rho=0.0)
    assert p_eve_series(cfg) == pytest.approx(p_eve_quadrature(cfg), abs=1e-9)


def test_fixed_ten_terms_at_defaults():
    adaptive = secrecy_outage(DEFAULT, method="series").p_out
    fixed = secrecy_outage(DEFAULT, NumericsConfig(fixed_terms=10), method="series").p_out
    assert abs(fixed - adaptive) < 1e-6


def test_series_falls_back_without_los():
    cfg = DEFAULT.replace(main_branch=KappaMuParams(0.0, 1.0, 10.0))
    res = secrecy_outage(cfg, method="series")
    assert res.method is Method.QUADRATURE
    with pytest.raises(ValueError):
        coverage_series(cfg)


def test_single_antenna_single_eavesdropper_composition():
    res = secrecy_outage(DEFAULT)
    assert res.p_out == pytest.approx(1 - res.p_eve, abs=1e-15)
    assert res.p_out == pytest.approx(res.p_out_product, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 5), st.floats(0.05, 1.0), st.floats(0.0, 0.9),
       st.floats(0.2, 4.0))
def test_outage_structure(L, M, N, rho, alpha, R_s):
    cfg = DEFAULT.replace(L=L, M=M, N=N, rho=rho, alpha=alpha, R_s=R_s)
    res = secrecy_outage(cfg)
    assert 0.0 <= res.p_out <= 1.0
    assert res.p_out == pytest.approx((1 - res.p_cov_l) ** L, abs=1e-12)
    assert res.p_out_product == pytest.approx((1 - res.p_eve ** N) ** L, abs=1e-12)
    # a single eavesdropper is a lower bound on the cooperating set
    assert res.p_cov_l <= res.p_eve + 1e-12
    if N == 1:
        assert res.p_out == pytest.approx(res.p_out_product, abs=1e-12)


@pytest.mark.parametrize("changes", [{}, {"L": 2, "M": 2, "N": 3}, {"L": 3, "N": 2, "M": 1}])
def test_degenerate_identities(changes):
    cfg = DEFAULT.replace(**changes)
    for degenerate in (cfg.replace(rho=0.0), cfg.replace(alpha=1.0)):
        res = secrecy_outage(degenerate)
        assert res.degenerate
        assert res.p_out == pytest.approx(1 - transmission_probability(degenerate), abs=1e-9)
    # the full coverage integral, with no shortcut, lands on the same number
    silent = cfg.replace(rho=0.0)
    cov = coverage_quadrature(silent)
    assert (1 - cov.p_cov) ** cfg.L == pytest.approx(1 - transmission_probability(silent), abs=1e-9)


def test_transmission_probability_examples():
    assert transmission_probability(DEFAULT.replace(R_s=1e-12)) == pytest.approx(1.0, abs=1e-9)
    rayleigh = DEFAULT.replace(main_branch=KappaMuParams(0.0, 1.0, 1.0), PL_s=1.0)
    assert transmission_probability(rayleigh) == pytest.approx(math.exp(-1), rel=1e-12)
    assert secrecy_throughput(rayleigh) == pytest.approx(math.exp(-1), rel=1e-12)
    assert transmission_probability_series(DEFAULT) == pytest.approx(transmission_probability_cdf(DEFAULT),
                                                                      abs=1e-9)
    with pytest.raises(ValueError):
        transmission_probability(DEFAULT, method="nope")


@pytest.mark.parametrize("L,M", [(1, 1), (2, 1), (3, 2), (4, 4)])
def test_transmission_probability_selection(L, M):
    cfg = DEFAULT.replace(L=L, M=M)
    single = 1 - cdf(main_snr_params(cfg), cfg.rate_threshold)
    assert transmission_probability(cfg) == pytest.approx(1 - (1 - single) ** L, abs=1e-12)


def test_throughput_ignores_eavesdropper():
    base = secrecy_throughput(DEFAULT)
    other = DEFAULT.replace(N=5, rho=0.1, alpha=0.7, eaves=KappaMuParams(3.0, 2.0, 50.0))
    assert secrecy_throughput(other) == base
    rs = np.linspace(0.05, 12, 40)
    tau = [secrecy_throughput(DEFAULT.replace(R_s=r)) for r in rs]
    assert all(0 <= t <= r for t, r in zip(tau, rs))
    assert secrecy_throughput(DEFAULT.replace(R_s=1e-9)) == pytest.approx(0.0, abs=1e-8)


def test_method_aliases():
    assert Method.parse("series") is Method.SERIES
    assert Method.parse(Method.QUADRATURE.value) is Method.QUADRATURE
    with pytest.raises(ValueError):
        Method.parse("magic")


def test_module_exports():
    assert "secrecy_outage" in secrecy.__all__
