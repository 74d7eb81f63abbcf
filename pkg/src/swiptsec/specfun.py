"""Special functions used by the fading and secrecy evaluators.

Everything here works on real, nonnegative arguments only. The array
routines broadcast over their inputs so the quadrature code can evaluate a
whole node set in one call; the scalar wrappers validate their arguments and
return plain floats.

The generalized Marcum-Q function of real order is computed from its Poisson
mixture of regularized incomplete gamma functions,

.. math::
    Q_\\mu(a, b) = \\sum_{k \\ge 0} e^{-a^2/2} \\frac{(a^2/2)^k}{k!}
                  Q(\\mu + k, b^2/2),

which has nonnegative terms and a computable truncation bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "AccuracyBudget",
    "ConvergenceError",
    "log_gamma",
    "reg_lower_gamma",
    "reg_upper_gamma",
    "gammainc_pair",
    "bessel_i",
    "log_bessel_i",
    "marcum_q",
    "marcum_q_array",
    "marcum_p_array",
    "poisson_log_pmf",
    "poisson_upper_tail",
]

_EPS = np.finfo(float).eps
_TINY = 1e-300
_MAX_INCGAMMA_ITER = 100_000


class ConvergenceError(ArithmeticError):
    """A series ran out of its term budget before meeting its tolerance.

    ``partial`` holds the partial sum reached and ``bound`` the remaining
    truncation bound at the point of failure.
    """

    def __init__(self, message, partial=float("nan"), bound=float("inf")):
        super().__init__(message)
        self.partial = partial
        self.bound = bound


@dataclass(frozen=True)
class AccuracyBudget:
    """Relative tolerance and term cap for every infinite series."""

    rel_tol: float = 1e-10
    max_terms: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-3):
            raise ValueError(f"rel_tol must be in (0, 1e-3], got {self.rel_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 16:
            raise ValueError(f"max_terms must be an integer >= 16, got {self.max_terms}")


DEFAULT_BUDGET = AccuracyBudget()


def log_gamma(a: float) -> float:
    """ln Gamma(a) for a > 0."""
    if not a > 0:
        raise ValueError(f"log_gamma requires a > 0, got {a}")
    return math.lgamma(a)


def _log_prefactor(a, x):
    # ln(x^a e^-x / Gamma(a)), with x > 0
    return a * np.log(x) - x - special.gammaln(a)


def gammainc_pair(a, x):
    """Regularized lower and upper incomplete gamma, ``(P(a, x), Q(a, x))``.

    Uses the power series for ``x < a + 1`` and the Lentz continued fraction
    otherwise, so whichever of P or Q is small is computed directly and the
    other one as its complement.
    """
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    if np.any(a <= 0) or np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("gammainc_pair requires a > 0 and x >= 0")
    shape = a.shape
    a = a.ravel()
    x = x.ravel()
    p = np.zeros(a.shape)
    q = np.ones(a.shape)

    pos = x > 0
    ser = pos & (x < a + 1.0)
    cf = pos & ~ser
    inf = np.isinf(x)
    cf &= ~inf
    p[inf] = 1.0
    q[inf] = 0.0

    if np.any(ser):
        aa, xx = a[ser], x[ser]
        term = 1.0 / aa
        total = term.copy()
        ap = aa.copy()
        active = np.ones(aa.shape, dtype=bool)
        for _ in range(_MAX_INCGAMMA_ITER):
            ap[active] += 1.0
            term[active] *= xx[active] / ap[active]
            total[active] += term[active]
            active &= np.abs(term) >= np.abs(total) * _EPS
            if not active.any():
                break
        else:
            raise ConvergenceError("incomplete gamma series did not converge")
        val = np.exp(_log_prefactor(aa, xx)) * total
        val = np.minimum(val, 1.0)
        p[ser] = val
        q[ser] = 1.0 - val

    if np.any(cf):
        aa, xx = a[cf], x[cf]
        b = xx + 1.0 - aa
        c = np.full(aa.shape, 1.0 / _TINY)
        d = 1.0 / b
        h = d.copy()
        active = np.ones(aa.shape, dtype=bool)
        for i in range(1, _MAX_INCGAMMA_ITER):
            an = -i * (i - aa[active])
            b[active] += 2.0
            dd = an * d[active] + b[active]
            dd = np.where(np.abs(dd) < _TINY, _TINY, dd)
            cc = b[active] + an / c[active]
            cc = np.where(np.abs(cc) < _TINY, _TINY, cc)
            dd = 1.0 / dd
            delta = dd * cc
            d[active] = dd
            c[active] = cc
            h[active] *= delta
            done = np.abs(delta - 1.0) < _EPS
            idx = np.flatnonzero(active)
            active[idx[done]] = False
            if not active.any():
                break
        else:
            raise ConvergenceError("incomplete gamma continued fraction did not converge")
        val = np.exp(_log_prefactor(aa, xx)) * h
        val = np.minimum(val, 1.0)
        q[cf] = val
        p[cf] = 1.0 - val

    return p.reshape(shape), q.reshape(shape)


def reg_lower_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a)."""
    p, _ = gammainc_pair(a, x)
    return float(p) if p.ndim == 0 else p


def reg_upper_gamma(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    _, q = gammainc_pair(a, x)
    return float(q) if q.ndim == 0 else q


def log_bessel_i(nu, x):
    """ln I_nu(x) for nu >= 0, x >= 0, finite for x up to ~1e300.

    Backed by the exponentially scaled ``ive``; where that underflows (large
    order, small argument) the leading power-series term is used instead.
    """
    nu_arr, x_arr = np.broadcast_arrays(np.asarray(nu, dtype=float), np.asarray(x, dtype=float))
    if np.any(nu_arr < 0) or np.any(x_arr < 0):
        raise ValueError("log_bessel_i requires nu >= 0 and x >= 0")
    with np.errstate(divide="ignore"):
        out = np.log(special.ive(nu_arr, x_arr)) + x_arr
        zero = x_arr == 0
        out = np.where(zero, np.where(nu_arr == 0, 0.0, -np.inf), out)
        bad = ~zero & ~np.isfinite(out)
        if np.any(bad):
            n, z = nu_arr[bad], x_arr[bad]
            # I_nu(z) ~ (z/2)^nu / Gamma(nu+1) * (1 + (z/2)^2/(nu+1) + ...)
            lead = n * np.log(z / 2.0) - special.gammaln(n + 1.0)
            out = out.copy()
            out[bad] = lead + np.log1p((z / 2.0) ** 2 / (n + 1.0))
    return float(out) if out.ndim == 0 else out


def bessel_i(nu, x):
    """Modified Bessel function of the first kind I_nu(x), nu >= 0, x >= 0."""
    val = np.exp(log_bessel_i(nu, x))
    return float(val) if np.ndim(val) == 0 else val


def poisson_log_pmf(k, lam):
    """ln of the Poisson(lam) pmf at integer k, with lam = 0 handled exactly."""
    k = np.asarray(k, dtype=float)
    if lam == 0:
        return np.where(k == 0, 0.0, -np.inf)
    return k * math.log(lam) - lam - special.gammaln(k + 1.0)


def poisson_upper_tail(k, lam):
    """Pr[X >= k] for X ~ Poisson(lam); equals P(k, lam) for k >= 1."""
    if k <= 0:
        return 1.0
    if lam == 0:
        return 0.0
    return reg_lower_gamma(float(k), lam)


def _tail_weight_bound(log_w_next, lam, k_next):
    # sum_{j >= k_next} w_j <= w_{k_next} / (1 - lam/(k_next+1)), valid once k_next + 1 > lam
    ratio = lam / (k_next + 1.0)
    if ratio >= 1.0:
        return math.inf
    return math.exp(log_w_next) / (1.0 - ratio)


def _marcum_mixture(mu, lam, y, budget, which):
    """Sum_k Pois(k; lam) * F(mu + k, y) for F = Q ('upper') or P ('lower').

    ``y`` is a 1-D array. Returns (values, terms_used). Stops once the
    remaining mixture mass is provably below ``rel_tol * value`` (with an
    absolute floor of 1e-300 for values that underflow).
    """
    y = np.asarray(y, dtype=float)
    total = np.zeros(y.shape)
    if y.size == 0:
        return total, 0
    # b = 0 and b = inf are exact, not the truncated Poisson mass
    at_zero = y == 0
    at_inf = y == np.inf
    block = 16
    k0 = 0
    while True:
        ks = np.arange(k0, k0 + block, dtype=float)
        log_w = poisson_log_pmf(ks, lam)
        p, q = gammainc_pair(mu + ks[:, None], y[None, :])
        f = q if which == "upper" else p
        total = total + np.sum(np.exp(log_w)[:, None] * f, axis=0)
        total[at_zero] = 1.0 if which == "upper" else 0.0
        total[at_inf] = 0.0 if which == "upper" else 1.0
        k_next = k0 + block
        log_w_next = float(poisson_log_pmf(k_next, lam))
        bound = _tail_weight_bound(log_w_next, lam, k_next)
        if which == "lower":
            # P(mu + k, y) is nonincreasing in k
            bound_vec = bound * f[-1] if math.isfinite(bound) else np.where(f[-1] > 0, np.inf, 0.0)
        else:
            bound_vec = np.full(y.shape, bound)
        if lam == 0 or np.all(bound_vec <= budget.rel_tol * total + _TINY):
            return np.clip(total, 0.0, 1.0), k_next
        if k_next >= budget.max_terms:
            raise ConvergenceError(
                f"Marcum-Q mixture not converged after {k_next} terms",
                partial=total if total.size > 1 else float(total[0]),
                bound=float(np.max(bound_vec)),
            )
        # grow blocks so large Poisson means do not cost many passes
        k0 = k_next
        block = min(2 * block, 512)


def _check_marcum_args(mu, a):
    if not mu > 0:
        raise ValueError(f"Marcum-Q order must be positive, got {mu}")
    if not a >= 0:
        raise ValueError(f"Marcum-Q parameter a must be >= 0, got {a}")


def marcum_q_array(mu, a, b, budget=DEFAULT_BUDGET):
    """Vectorized Q_mu(a, b) over an array of ``b`` (scalar ``mu`` and ``a``)."""
    _check_marcum_args(mu, a)
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise ValueError("Marcum-Q parameter b must be >= 0")
    val, _ = _marcum_mixture(float(mu), 0.5 * a * a, (0.5 * b * b).ravel(), budget, "upper")
    return val.reshape(b.shape)


def marcum_p_array(mu, a, b, budget=DEFAULT_BUDGET):
    """Vectorized complement 1 - Q_mu(a, b), accurate when it is small."""
    _check_marcum_args(mu, a)
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise ValueError("Marcum-Q parameter b must be >= 0")
    val, _ = _marcum_mixture(float(mu), 0.5 * a * a, (0.5 * b * b).ravel(), budget, "lower")
    return val.reshape(b.shape)


def marcum_q(mu: float, a: float, b: float, budget: AccuracyBudget = DEFAULT_BUDGET) -> float:
    """Generalized Marcum-Q function Q_mu(a, b) of real order mu > 0.

    Parameters
    ----------
    mu : float
        Order, any positive real.
    a, b : float
        Noncentrality and threshold, both nonnegative.
    budget : AccuracyBudget
        Relative truncation tolerance and term cap.

    Raises
    ------
    ConvergenceError
        If ``budget.max_terms`` mixture terms do not reach ``budget.rel_tol``.
    """
    if not b >= 0:
        raise ValueError(f"Marcum-Q parameter b must be >= 0, got {b}")
    return float(marcum_q_array(mu, a, np.array([b]), budget)[0])
