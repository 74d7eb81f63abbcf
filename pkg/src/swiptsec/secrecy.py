"""Secrecy outage probability and secrecy throughput of the TAS/MRC SWIPT link.

Scenario: an L-antenna access point selects one transmit antenna, the
legitimate node combines M branches (MRC), and N single-antenna eavesdroppers
using on-off power splitting (time fraction ``alpha`` harvesting only, then
power ratio ``rho`` to the decoder) cooperate by letting the strongest one
decode. All SNRs are kappa-mu distributed.

Per transmit antenna the legitimate link covers the target secrecy rate
``R_s`` when ``gamma_s > 2**R_s - 1`` and every eavesdropper stays below

    gamma_th(gamma_s) = ((1 + gamma_s) / 2**R_s) ** (1 / (1 - alpha)) - 1.

Conditioned on ``gamma_s`` the eavesdroppers are independent, so the
per-antenna coverage is ``int F_e(gamma_th)**N f_s d gamma_s`` over
``[2**R_s - 1, inf)``. With N = 1 this is the single-eavesdropper factor
``p_eve``. The closed product ``(1 - p_eve**N)**L`` treats the N events as
independent; it is reported as ``p_out_product`` and is exact only for N = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from . import fading, quadrature
from .fading import KappaMuParams
from .specfun import (
    DEFAULT_BUDGET,
    AccuracyBudget,
    ConvergenceError,
    gammainc_pair,
    poisson_log_pmf,
    poisson_upper_tail,
    reg_lower_gamma,
)

__all__ = [
    "MeanInterpretation",
    "Method",
    "SystemConfig",
    "NumericsConfig",
    "OutageResult",
    "Coverage",
    "db_to_linear",
    "pathloss",
    "eaves_power_ratio",
    "gamma_threshold",
    "main_snr_params",
    "eaves_snr_params",
    "coverage_quadrature",
    "coverage_series",
    "p_eve_quadrature",
    "p_eve_series",
    "secrecy_outage",
    "transmission_probability",
    "transmission_probability_cdf",
    "transmission_probability_series",
    "secrecy_throughput",
]

LN2 = math.log(2.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


class MeanInterpretation(str, enum.Enum):
    """How the main-link mean SNR relates to the combiner output.

    ``per_branch_times_M``: ``gamma_s`` is per branch; the combiner output mean
    is ``M * gamma_s / PL_s``. ``combiner_output``: ``gamma_s / PL_s`` already
    is the combiner output mean.
    """

    PER_BRANCH_TIMES_M = "per_branch_times_M"
    COMBINER_OUTPUT = "combiner_output"


class Method(str, enum.Enum):
    QUADRATURE = "quadrature"
    SERIES = "series"

    @classmethod
    def parse(cls, value):
        return value if isinstance(value, cls) else cls(value)


@dataclass(frozen=True)
class SystemConfig:
    """Full scenario. Mean SNRs are linear and taken before pathloss / PS scaling.

    ``sigma2_over_N0`` (rectifier noise over thermal noise) defaults to 1;
    that value is an artifact choice, not a published setting.
    """

    L: int = 1
    M: int = 1
    N: int = 1
    rho: float = 0.8
    alpha: float = 0.1
    R_s: float = 1.0
    sigma2_over_N0: float = 1.0
    PL_s: float = db_to_linear(1.0)
    PL_e: float = db_to_linear(1.0)
    main_branch: KappaMuParams = field(default_factory=lambda: KappaMuParams(1.0, 1.0, db_to_linear(10.0)))
    eaves: KappaMuParams = field(default_factory=lambda: KappaMuParams(1.0, 1.0, db_to_linear(0.0)))
    mean_interpretation: MeanInterpretation = MeanInterpretation.PER_BRANCH_TIMES_M

    def __post_init__(self):
        for name in ("L", "M", "N"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.R_s > 0:
            raise ValueError(f"R_s must be > 0, got {self.R_s}")
        if not self.sigma2_over_N0 >= 0:
            raise ValueError(f"sigma2_over_N0 must be >= 0, got {self.sigma2_over_N0}")
        for name in ("PL_s", "PL_e"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        object.__setattr__(self, "mean_interpretation", MeanInterpretation(self.mean_interpretation))

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    @property
    def omega(self) -> float:
        return eaves_power_ratio(self.rho, self.sigma2_over_N0, self.PL_e)

    @property
    def rate_threshold(self) -> float:
        """Main-link SNR needed to support R_s on its own, 2**R_s - 1."""
        return math.expm1(self.R_s * LN2)

    @property
    def eavesdropper_silent(self) -> bool:
        """True when the wiretap rate is identically zero (rho = 0 or alpha = 1)."""
        return self.omega == 0.0 or self.alpha == 1.0


@dataclass(frozen=True)
class NumericsConfig:
    """Series truncation and quadrature policy.

    ``fixed_terms`` forces a fixed number of terms in every series sum
    (10 reproduces the published setting); ``None`` truncates adaptively to
    ``series_budget.rel_tol``.
    """

    series_budget: AccuracyBudget = DEFAULT_BUDGET
    quad_rel_tol: float = 1e-10
    quad_abs_tol: float = 1e-12
    tail_cutoff_sigma: float = 10.0
    fixed_terms: int | None = None
    max_intervals: int = 4000

    def __post_init__(self):
        for name in ("quad_rel_tol", "quad_abs_tol"):
            v = getattr(self, name)
            if not 0.0 < v <= 1e-3:
                raise ValueError(f"{name} must be in (0, 1e-3], got {v}")
        if not self.tail_cutoff_sigma > 0:
            raise ValueError(f"tail_cutoff_sigma must be > 0, got {self.tail_cutoff_sigma}")
        if self.fixed_terms is not None and (int(self.fixed_terms) != self.fixed_terms or self.fixed_terms < 1):
            raise ValueError(f"fixed_terms must be a positive integer, got {self.fixed_terms}")

    def replace(self, **changes) -> "NumericsConfig":
        return replace(self, **changes)


DEFAULT_NUMERICS = NumericsConfig()


@dataclass(frozen=True)
class Coverage:
    """Per-antenna probabilities from one evaluator run."""

    p_eve: float  # Pr[gamma_s > thr, gamma_e < gamma_th] for one eavesdropper
    p_cov: float  # Pr[gamma_s > thr, max_i gamma_ie < gamma_th] for N eavesdroppers
    error: float  # quadrature error plus discarded tail / truncation bound
    terms_used: dict = field(default_factory=dict)
    method: Method = Method.QUADRATURE


@dataclass(frozen=True)
class OutageResult:
    p_out: float
    p_eve: float
    p_cov_l: float
    p_out_product: float
    terms_used: dict
    quad_error_estimate: float
    method: Method
    degenerate: bool = False


def pathloss(d: float, beta: float, G_t: float, G_r: float, lam: float) -> float:
    """Distance pathloss (4 pi / (G_t G_r lambda))**2 * d**beta as a linear factor."""
    for name, v in (("d", d), ("beta", beta), ("G_t", G_t), ("G_r", G_r), ("lambda", lam)):
        if not v > 0:
            raise ValueError(f"pathloss: {name} must be > 0, got {v}")
    return (4.0 * math.pi / (G_t * G_r * lam)) ** 2 * d ** beta


def eaves_power_ratio(rho: float, sigma2_over_N0: float, PL_e: float) -> float:
    """omega = rho / (PL_e * (rho + sigma^2/N0)); 0 for a silent eavesdropper."""
    if rho == 0.0:
        return 0.0
    return rho / (PL_e * (rho + sigma2_over_N0))


def gamma_threshold(gamma_s, R_s: float, alpha: float):
    """Largest eavesdropper SNR that still leaves secrecy rate R_s.

    Requires ``alpha < 1`` and ``gamma_s >= 2**R_s - 1``. Returns ``inf``
    when the threshold exceeds the float range.
    """
    if not alpha < 1.0:
        raise ValueError("gamma_threshold undefined for alpha = 1; use the silent-eavesdropper path")
    g = np.asarray(gamma_s, dtype=float)
    expo = (np.log1p(g) - R_s * LN2) / (1.0 - alpha)
    if np.any(expo < -1e-12):
        raise ValueError("gamma_s below the rate threshold 2**R_s - 1")
    out = _gamma_threshold_unchecked(g, R_s, alpha)
    return float(out) if out.ndim == 0 else out


def _gamma_threshold_unchecked(g, R_s, alpha):
    # overflows to inf as alpha -> 1: no eavesdropper SNR can reach it, and cdf(inf) = 1
    with np.errstate(over="ignore"):
        return np.expm1(np.maximum((np.log1p(g) - R_s * LN2) / (1.0 - alpha), 0.0))


def main_snr_params(config: SystemConfig) -> KappaMuParams:
    """Composite (post-MRC, post-pathloss) main-link SNR distribution."""
    b = config.main_branch
    if config.mean_interpretation is MeanInterpretation.PER_BRANCH_TIMES_M:
        branch = KappaMuParams(b.kappa, b.mu, b.mean_snr / config.PL_s)
    else:
        branch = KappaMuParams(b.kappa, b.mu, b.mean_snr / (config.PL_s * config.M))
    return fading.mrc_composite(branch, config.M)


def eaves_snr_params(config: SystemConfig) -> KappaMuParams | None:
    """Per-eavesdropper SNR distribution with mean omega * gamma_e; None if omega = 0."""
    om = config.omega
    if om == 0.0:
        return None
    e = config.eaves
    return KappaMuParams(e.kappa, e.mu, om * e.mean_snr)


def _integration_range(main: KappaMuParams, lower: float, numerics: NumericsConfig):
    """Upper limit U with certified discarded mass sf(U) <= quad_abs_tol / 10."""
    target = numerics.quad_abs_tol / 10.0
    budget = numerics.series_budget
    upper = max(lower, main.mean_snr + numerics.tail_cutoff_sigma * math.sqrt(main.variance))
    if upper <= lower:
        upper = 2.0 * lower + main.mean_snr
    for _ in range(200):
        tail = fading.sf(main, upper, budget)
        if tail <= target:
            return upper, tail
        upper = lower + 2.0 * (upper - lower)
    raise ConvergenceError("could not bound the main-link tail", bound=tail)


def _breakpoints(lower, upper, main):
    span = upper - lower
    pts = [lower + span * f for f in (1e-6, 1e-4, 1e-3, 1e-2, 0.03, 0.07, 0.15, 0.3, 0.5, 0.75)]
    if lower < main.mean_snr < upper:
        pts.append(main.mean_snr)
    return pts


def coverage_quadrature(config: SystemConfig, numerics: NumericsConfig = DEFAULT_NUMERICS) -> Coverage:
    """Direct quadrature of int F_e(gamma_th(g))**N f_s(g) dg (the reference evaluator)."""
    if config.alpha >= 1.0:
        raise ValueError("alpha = 1 is the silent-eavesdropper case; use secrecy_outage")
    main = main_snr_params(config)
    eve = eaves_snr_params(config)
    lower = config.rate_threshold
    upper, tail = _integration_range(main, lower, numerics)
    budget = numerics.series_budget
    N = config.N

    def integrand(g):
        fs = fading.pdf(main, g)
        if eve is None:
            return np.column_stack([fs, fs])
        fe = fading.cdf(eve, _gamma_threshold_unchecked(g, config.R_s, config.alpha), budget)
        return np.column_stack([fe * fs, fe ** N * fs])

    res = quadrature.integrate(
        integrand, lower, upper,
        rel_tol=numerics.quad_rel_tol, abs_tol=numerics.quad_abs_tol,
        breakpoints=_breakpoints(lower, upper, main), max_intervals=numerics.max_intervals,
    )
    p_eve, p_cov = (float(np.clip(v, 0.0, 1.0)) for v in res.value)
    return Coverage(
        p_eve=p_eve, p_cov=p_cov,
        error=float(np.max(res.error)) + tail,
        terms_used={"intervals": len(res.intervals)},
        method=Method.QUADRATURE,
    )


def p_eve_quadrature(config: SystemConfig, numerics: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Single-eavesdropper joint probability by direct quadrature."""
    return coverage_quadrature(config.replace(N=1), numerics).p_eve


def _terms_for_tail(lam: float, target: float, max_terms: int) -> int:
    """Fewest Poisson(lam) terms 0..T-1 leaving upper-tail mass <= target."""
    if lam == 0.0:
        return 1
    start = 1
    while start <= max_terms:
        ks = np.arange(start, min(start + 256, max_terms + 1), dtype=float)
        tails = reg_lower_gamma(ks, np.full(ks.shape, lam))
        hit = np.flatnonzero(tails <= target)
        if hit.size:
            return int(ks[hit[0]])
        start += 256
    raise ConvergenceError(
        f"series needs more than {max_terms} terms for Poisson mean {lam:.6g}",
        bound=float(tails[-1]),
    )


def _series_pieces(config: SystemConfig):
    """Log coefficients of the main-link v-series written with Psi_s, Phi_1, Phi_2.

    The v-th term of the main-link density is
    ``exp(log_c[v] + (Phi_1 + (2v + M mu_s - 1)/2) ln g - mu_s Psi_s g)``.
    """
    main = main_snr_params(config)
    M = config.M
    kappa_s = main.kappa
    m = main.mu  # M * mu_s
    mu_s = m / M
    psi_s = (1.0 + kappa_s) / (main.mean_snr / M)
    phi1 = 0.5 * (m - 1.0)
    phi2 = 0.5 * (m + 1.0)

    def log_coef(v):
        v = np.asarray(v, dtype=float)
        return (
            math.log(M) - m * kappa_s
            + (2.0 * v + m) * math.log(mu_s)
            - special.gammaln(v + 1.0) - special.gammaln(m + v)
            + phi2 * math.log(psi_s) - phi1 * math.log(kappa_s) - phi2 * math.log(M)
            + 0.5 * (2.0 * v + m - 1.0) * math.log(M * kappa_s * psi_s)
        )

    def power(v):
        return phi1 + 0.5 * (2.0 * np.asarray(v, dtype=float) + m - 1.0)

    return main, log_coef, power, mu_s * psi_s


def _series_eval(config, numerics, T, V, intervals=None):
    main, log_coef, power, rate = _series_pieces(config)
    eve = eaves_snr_params(config)
    v = np.arange(V, dtype=float)
    lc = log_coef(v)
    pw = power(v)
    t = np.arange(T, dtype=float)
    if eve is not None:
        mu_e, lam_e, theta_e = eve.mu, eve.poisson_mean, eve.scale
        log_pois_t = poisson_log_pmf(t, lam_e)
    N = config.N

    def main_terms(g):
        lg = np.log(g)
        return np.exp(lc[None, :] + pw[None, :] * lg[:, None] - rate * g[:, None])

    def eaves_terms(g):
        if eve is None:
            return np.ones((g.size, 1))
        x = _gamma_threshold_unchecked(g, config.R_s, config.alpha) / theta_e
        p = np.zeros((g.size, T))
        ok = x > 0
        if ok.any():
            p[ok] = reg_lower_gamma(mu_e + t[None, :], x[ok, None])
        return np.exp(log_pois_t)[None, :] * p

    def integrand(g):
        a = eaves_terms(g).sum(axis=1)
        b = main_terms(g).sum(axis=1)
        return np.column_stack([a * b, a ** N * b])

    lower = config.rate_threshold
    tail = 0.0
    if intervals is None:
        upper, tail = _integration_range(main, lower, numerics)
        res = quadrature.integrate(
            integrand, lower, upper,
            rel_tol=numerics.quad_rel_tol, abs_tol=numerics.quad_abs_tol,
            breakpoints=_breakpoints(lower, upper, main), max_intervals=numerics.max_intervals,
        )
        intervals, quad_err = res.intervals, float(np.max(res.error))
    else:
        quad_err = float("nan")
    x, w = quadrature.rule_nodes(intervals)
    A = eaves_terms(x)
    B = main_terms(x)
    # J[t, v] = int A_t B_v: one integral per (t, v) term pair
    J = (A * w[:, None]).T @ B
    p_eve = float(J.sum())
    p_cov = float(np.sum(w * A.sum(axis=1) ** N * B.sum(axis=1)))
    return p_eve, p_cov, quad_err + tail, intervals


def coverage_series(config: SystemConfig, numerics: NumericsConfig = DEFAULT_NUMERICS) -> Coverage:
    """Double-series evaluator: t-series of the eavesdropper CDF times v-series of
    the main-link density, each (t, v) term integrated over the main SNR.

    Requires ``kappa_s > 0``; route ``kappa_s = 0`` to :func:`coverage_quadrature`.
    """
    if config.alpha >= 1.0:
        raise ValueError("alpha = 1 is the silent-eavesdropper case; use secrecy_outage")
    main = main_snr_params(config)
    if main.kappa <= 0.0:
        raise ValueError("series evaluator requires kappa_s > 0")
    eve = eaves_snr_params(config)
    lam_t = 0.0 if eve is None else eve.poisson_mean
    lam_v = main.poisson_mean
    budget = numerics.series_budget

    if numerics.fixed_terms is not None:
        T = 1 if eve is None else numerics.fixed_terms
        V = numerics.fixed_terms
        p_eve, p_cov, err, _ = _series_eval(config, numerics, T, V)
        trunc = _tail_mass(lam_t, T) * config.N + _tail_mass(lam_v, V)
        return Coverage(_clip(p_eve), _clip(p_cov), err + trunc, {"t": T, "v": V}, Method.SERIES)

    target = budget.rel_tol
    intervals = None
    for _ in range(4):
        T = _terms_for_tail(lam_t, target / (2.0 * config.N), budget.max_terms)
        V = _terms_for_tail(lam_v, target / 2.0, budget.max_terms)
        p_eve, p_cov, err, intervals = _series_eval(config, numerics, T, V)
        needed = budget.rel_tol * min(p_eve, p_cov)
        if target <= needed or needed == 0.0:
            break
        target = needed
    trunc = _tail_mass(lam_t, T) * config.N + _tail_mass(lam_v, V)
    return Coverage(_clip(p_eve), _clip(p_cov), err + trunc, {"t": T, "v": V}, Method.SERIES)


def _tail_mass(lam, n_terms):
    if lam == 0.0:
        return 0.0
    return reg_lower_gamma(float(n_terms), lam)


def _clip(p):
    return float(min(max(p, 0.0), 1.0))


def p_eve_series(config: SystemConfig, numerics: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Single-eavesdropper joint probability from the double-series evaluator."""
    return coverage_series(config.replace(N=1), numerics).p_eve


def transmission_probability_cdf(config: SystemConfig, numerics: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """P_t = 1 - F_s(2**R_s - 1)**L through the Marcum-Q CDF."""
    main = main_snr_params(config)
    F = fading.cdf(main, config.rate_threshold, numerics.series_budget)
    S = fading.sf(main, config.rate_threshold, numerics.series_budget)
    return _selection_probability(F, S, config.L)


def transmission_probability_series(config: SystemConfig, numerics: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """P_t from the single w-series of regularized lower incomplete gammas."""
    main = main_snr_params(config)
    m, lam = main.mu, main.poisson_mean
    budget = numerics.series_budget
    x = config.rate_threshold / main.scale  # Psi_s * mu_s * (2**R_s - 1)
    if numerics.fixed_terms is not None:
        W = numerics.fixed_terms
    else:
        W = _terms_for_tail(lam, budget.rel_tol * 1e-3, budget.max_terms)
    while True:
        w = np.arange(W, dtype=float)
        weights = np.exp(poisson_log_pmf(w, lam))
        lower, upper = gammainc_pair(m + w, np.full(w.shape, x))
        F = float(min(np.dot(weights, lower), 1.0))
        S = float(min(np.dot(weights, upper), 1.0))
        # a small survival needs the Poisson tail below rel_tol * S, not just absolutely small
        if numerics.fixed_terms is not None or lam == 0.0 or S >= 0.5:
            break
        if poisson_upper_tail(W, lam) <= budget.rel_tol * S or S == 0.0:
            break
        W = _terms_for_tail(lam, budget.rel_tol * S, budget.max_terms)
    return _selection_probability(F, S, config.L)


def _selection_probability(F, S, L):
    """1 - F**L, computed from whichever of F and S = 1 - F is more accurate."""
    if S <= 0.5:
        return _clip(-math.expm1(L * math.log1p(-S)))
    return _clip(-math.expm1(L * math.log(F))) if F > 0 else 1.0


def transmission_probability(config: SystemConfig, numerics: NumericsConfig = DEFAULT_NUMERICS,
                             method: str = "series") -> float:
    """Probability the selected main link supports R_s (``series`` or ``cdf``)."""
    if method == "series":
        return transmission_probability_series(config, numerics)
    if method == "cdf":
        return transmission_probability_cdf(config, numerics)
    raise ValueError(f"unknown transmission-probability method {method!r}")


def secrecy_throughput(config: SystemConfig, numerics: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """tau = R_s * P_t in bits/s/Hz."""
    return config.R_s * transmission_probability(config, numerics)


def secrecy_outage(config: SystemConfig, numerics: NumericsConfig = DEFAULT_NUMERICS,
                   method="quadrature") -> OutageResult:
    """Secrecy outage probability with TAS over L antennas and N cooperating eavesdroppers.

    ``method`` selects the per-antenna evaluator: ``"quadrature"`` (reference)
    or ``"series"``. The series evaluator falls back to quadrature when
    ``kappa_s = 0``; ``OutageResult.method`` records what actually ran.
    """
    method = Method.parse(method)
    L, N = config.L, config.N
    if config.eavesdropper_silent:
        p_t = transmission_probability(config, numerics)
        # wiretap rate is exactly zero: coverage is just Pr[gamma_s > thr]
        p_cov = _clip(-math.expm1(math.log1p(-p_t) / L)) if p_t < 1.0 else 1.0
        return OutageResult(
            p_out=1.0 - p_t, p_eve=p_cov, p_cov_l=p_cov, p_out_product=1.0 - p_t,
            terms_used={}, quad_error_estimate=0.0, method=method, degenerate=True,
        )
    if method is Method.SERIES and main_snr_params(config).kappa > 0:
        cov = coverage_series(config, numerics)
    else:
        cov = coverage_quadrature(config, numerics)
    p_out = (1.0 - cov.p_cov) ** L
    p_out_product = (1.0 - cov.p_eve ** N) ** L
    return OutageResult(
        p_out=_clip(p_out), p_eve=cov.p_eve, p_cov_l=cov.p_cov, p_out_product=_clip(p_out_product),
        terms_used=cov.terms_used, quad_error_estimate=cov.error, method=cov.method,
    )
