"""Sweeps, figure presets, validation reports and their CSV rendering."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import montecarlo, secrecy
from .config import ConfigError, SCALAR_KEYS, is_db_key, parse_config, resolve_document, to_document, with_override
from .secrecy import NumericsConfig, SystemConfig

__all__ = [
    "OUTPUTS",
    "PRESETS",
    "SweepSpec",
    "analyze",
    "run_sweep",
    "run_figure_preset",
    "run_validate",
    "format_value",
    "render_csv",
    "SERIES_REL_TOL",
    "TRUNCATION_ABS_TOL",
]

OUTPUTS = ("p_out_analytic", "p_out_mc", "p_t", "throughput", "p_eve", "throughput_mc")
SWEEPABLE = tuple(k for k in SCALAR_KEYS if k not in {"rel_tol", "max_terms", "quad_rel_tol", "quad_abs_tol",
                                                       "tail_cutoff_sigma", "fixed_terms", "max_intervals"})
SERIES_REL_TOL = 1e-6
TRUNCATION_ABS_TOL = 1e-6
TP_PATH_TOL = 1e-9


def format_value(v) -> str:
    """Fixed CSV number formatting: 9 significant digits, '.' decimal point."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return f"{v:.9g}"
    return str(v)


def render_csv(rows, columns, echo: dict | None = None) -> str:
    """CSV text with an optional '# '-prefixed JSON echo block and header row."""
    buf = io.StringIO()
    if echo is not None:
        for line in json.dumps(echo, indent=2, sort_keys=True).splitlines():
            buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def analyze(system: SystemConfig, numerics: NumericsConfig, method="quadrature") -> dict:
    """All analytic outputs for one configuration, as a flat row."""
    res = secrecy.secrecy_outage(system, numerics, method)
    p_t = secrecy.transmission_probability(system, numerics)
    return {
        "p_out": res.p_out,
        "p_out_product": res.p_out_product,
        "p_eve": res.p_eve,
        "p_cov_l": res.p_cov_l,
        "p_t": p_t,
        "throughput": system.R_s * p_t,
        "method": res.method.value,
        "degenerate": res.degenerate,
        "terms_t": res.terms_used.get("t"),
        "terms_v": res.terms_used.get("v"),
        "intervals": res.terms_used.get("intervals"),
        "quad_error": res.quad_error_estimate,
    }


ANALYZE_COLUMNS = ("p_out", "p_out_product", "p_eve", "p_cov_l", "p_t", "throughput", "method",
                   "degenerate", "terms_t", "terms_v", "intervals", "quad_error")


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep. ``values`` are in the parameter's own unit (dB for ``_db`` keys)."""

    parameter: str
    values: tuple
    outputs: tuple = ("p_out_analytic",)

    def __post_init__(self):
        if self.parameter not in SWEEPABLE:
            raise ConfigError(f"parameter {self.parameter!r} is not sweepable; choose from {', '.join(SWEEPABLE)}")
        if len(self.values) == 0:
            raise ConfigError("sweep values must be nonempty")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad or not self.outputs:
            raise ConfigError(f"unknown sweep outputs {bad}; choose from {', '.join(OUTPUTS)}")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    def columns(self):
        cols = ["value", "value_linear", *self.outputs]
        if "p_out_mc" in self.outputs:
            cols.append("p_out_mc_stderr")
        if "throughput_mc" in self.outputs:
            cols.append("throughput_mc_stderr")
        return cols + ["method", "terms_t", "terms_v", "quad_error", "error"]


def _row(document, sweep, value, method, mc_trials, seed):
    row = {"value": value, "value_linear": 10.0 ** (value / 10.0) if is_db_key(sweep.parameter) else value}
    try:
        system, numerics = parse_config(with_override(document, sweep.parameter, value))
        needs_outage = {"p_out_analytic", "p_eve"} & set(sweep.outputs)
        if needs_outage:
            res = secrecy.secrecy_outage(system, numerics, method)
            row.update(p_out_analytic=res.p_out, p_eve=res.p_eve, method=res.method.value,
                       terms_t=res.terms_used.get("t"), terms_v=res.terms_used.get("v"),
                       quad_error=res.quad_error_estimate)
        if {"p_t", "throughput"} & set(sweep.outputs):
            p_t = secrecy.transmission_probability(system, numerics)
            row.update(p_t=p_t, throughput=system.R_s * p_t)
        if {"p_out_mc", "throughput_mc"} & set(sweep.outputs):
            if not mc_trials:
                raise ConfigError("Monte Carlo outputs need mc_trials")
        if "p_out_mc" in sweep.outputs:
            est = montecarlo.simulate_secrecy_outage(system, mc_trials, seed)
            row.update(p_out_mc=est.p_hat, p_out_mc_stderr=est.stderr)
        if "throughput_mc" in sweep.outputs:
            est = montecarlo.simulate_transmission_probability(system, mc_trials, seed)
            row.update(throughput_mc=system.R_s * est.p_hat, throughput_mc_stderr=system.R_s * est.stderr)
    except (ValueError, ArithmeticError) as exc:
        for out in sweep.outputs:
            row.setdefault(out, float("nan"))
        row["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    return row


def run_sweep(system: SystemConfig | dict, numerics: NumericsConfig | None, sweep: SweepSpec,
              mc_trials: int | None = None, seed: int = 0, method="quadrature", jobs: int = 1):
    """One row per sweep value, in sweep order. Row failures become an ``error`` cell.

    ``system`` may be a resolved config document instead of a SystemConfig,
    in which case ``numerics`` is ignored.
    """
    if isinstance(system, dict):
        document = resolve_document(system)
    else:
        document = to_document(system, numerics or NumericsConfig())

    def one(value):
        return _row(document, sweep, value, method, mc_trials, seed)

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, sweep.values))
    return [one(v) for v in sweep.values]


def _grid(start, stop, step):
    n = int(round((stop - start) / step))
    return tuple(round(start + i * step, 10) for i in range(n + 1))


# name -> list of (curve name, overrides, parameter, values, outputs)
def _preset_curves(name):
    if name == "fig2":
        models = {"rayleigh": (0.0, 1.0), "rician": (1.0, 1.0), "nakagami3": (0.0, 3.0)}
        return [
            (f"{model}_Rs{rs:g}", {"kappa_s": k, "mu_s": m, "kappa_e": k, "mu_e": m, "R_s": rs},
             "gamma_s_db", _grid(0.0, 20.0, 2.0), ("p_out_analytic",))
            for model, (k, m) in models.items() for rs in (1.0, 2.0)
        ]
    if name == "fig3a":
        return [
            (f"rho{rho:g}_M{M}", {"rho": rho, "M": M}, "N", tuple(range(1, 9)), ("p_out_analytic",))
            for M in (1, 2) for rho in (0.2, 0.5, 0.8)
        ]
    if name == "fig3b":
        return [
            (f"alpha{a:g}", {"alpha": a}, "N", tuple(range(1, 9)), ("p_out_analytic",))
            for a in (0.1, 0.3, 0.5)
        ]
    if name == "fig4":
        return [
            (f"{arch}_N{N}", {**ov, "N": N}, "L", tuple(range(1, 7)), ("p_out_analytic",))
            for N in (2, 4)
            for arch, ov in (("PS", {"alpha": 0.0, "rho": 0.8}), ("TS", {"rho": 1.0, "alpha": 0.1}))
        ]
    if name == "fig5":
        return [
            (f"M{M}_gs{g:g}dB", {"M": M, "gamma_s_db": g}, "R_s", _grid(0.05, 12.0, 0.05), ("throughput",))
            for g in (10.0, 15.0) for M in (1, 2, 4)
        ]
    raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("fig2", "fig3a", "fig3b", "fig4", "fig5")


def run_figure_preset(name: str, overrides: dict | None = None, mc_trials: int | None = None,
                      seed: int = 0, method="quadrature", jobs: int = 1) -> dict:
    """Curves of a figure preset as ``{curve_name: (columns, rows)}``.

    ``overrides`` is a (partial) config document applied under each curve's
    own settings. With ``mc_trials`` every curve also carries its Monte Carlo
    validation column.
    """
    base = resolve_document(overrides or {})
    out = {}
    for curve, curve_ov, param, values, outputs in _preset_curves(name):
        doc = dict(base)
        for k, v in curve_ov.items():
            doc = with_override(doc, k, v)
        if mc_trials:
            outputs = outputs + (("throughput_mc",) if "throughput" in outputs else ("p_out_mc",))
        spec = SweepSpec(param, values, outputs)
        out[curve] = (spec.columns(), run_sweep(doc, None, spec, mc_trials, seed, method, jobs))
    return out


VALIDATE_COLUMNS = ("check", "value", "reference", "delta", "tolerance", "status")


def run_validate(system: SystemConfig, numerics: NumericsConfig, mc_trials: int, seed: int = 0) -> list:
    """Cross-check every analytic route against each other and against Monte Carlo.

    Status is PASS/FAIL for Monte Carlo agreement, PASS/FLAG for the purely
    numerical deltas, SKIP where a route does not apply, INFO otherwise.
    """
    if mc_trials < 10_000:
        raise ValueError(f"validation needs at least 1e4 Monte Carlo trials, got {mc_trials}")
    rows = []
    quad = secrecy.secrecy_outage(system, numerics, "quadrature")
    mc = montecarlo.simulate_secrecy_outage(system, mc_trials, seed)
    tol = max(0.01, 4.0 * mc.stderr)
    d = abs(quad.p_out - mc.p_hat)
    rows.append(dict(check="p_out_quadrature_vs_mc", value=quad.p_out, reference=mc.p_hat, delta=d,
                     tolerance=tol, status="PASS" if d <= tol else "FAIL"))
    rows.append(dict(check="p_out_mc_ci_low", value=mc.ci_low, status="INFO"))
    rows.append(dict(check="p_out_mc_ci_high", value=mc.ci_high, status="INFO"))
    rows.append(dict(check="p_out_product_form", value=quad.p_out_product, reference=quad.p_out,
                     delta=abs(quad.p_out_product - quad.p_out), status="INFO"))

    series_ok = secrecy.main_snr_params(system).kappa > 0 and not system.eavesdropper_silent
    if series_ok:
        ser = secrecy.secrecy_outage(system, numerics, "series")
        d = abs(ser.p_eve - quad.p_eve) / max(quad.p_eve, 1e-300)
        rows.append(dict(check="p_eve_series_vs_quadrature_rel", value=ser.p_eve, reference=quad.p_eve,
                         delta=d, tolerance=SERIES_REL_TOL, status="PASS" if d <= SERIES_REL_TOL else "FLAG"))
        rows.append(dict(check="p_out_series", value=ser.p_out, reference=quad.p_out,
                         delta=abs(ser.p_out - quad.p_out), status="INFO"))
        adaptive = numerics.replace(fixed_terms=None)
        fixed10 = numerics.replace(fixed_terms=10)
        a = secrecy.secrecy_outage(system, adaptive, "series").p_out
        f = secrecy.secrecy_outage(system, fixed10, "series").p_out
        d = abs(f - a)
        rows.append(dict(check="p_out_fixed10_vs_adaptive", value=f, reference=a, delta=d,
                         tolerance=TRUNCATION_ABS_TOL, status="PASS" if d <= TRUNCATION_ABS_TOL else "FLAG"))
    else:
        rows.append(dict(check="p_eve_series_vs_quadrature_rel", status="SKIP"))
        rows.append(dict(check="p_out_fixed10_vs_adaptive", status="SKIP"))

    pt_s = secrecy.transmission_probability_series(system, numerics)
    pt_c = secrecy.transmission_probability_cdf(system, numerics)
    d = abs(pt_s - pt_c)
    rows.append(dict(check="p_t_series_vs_cdf", value=pt_s, reference=pt_c, delta=d, tolerance=TP_PATH_TOL,
                     status="PASS" if d <= TP_PATH_TOL else "FLAG"))
    mct = montecarlo.simulate_transmission_probability(system, mc_trials, seed)
    tol = max(0.01, 4.0 * mct.stderr)
    d = abs(pt_s - mct.p_hat)
    rows.append(dict(check="p_t_vs_mc", value=pt_s, reference=mct.p_hat, delta=d, tolerance=tol,
                     status="PASS" if d <= tol else "FAIL"))
    if system.omega == 0.0 and system.alpha < 1.0:
        # full coverage integral (no shortcut) against the transmission-probability series
        cov = secrecy.coverage_quadrature(system, numerics)
        p_pipe = (1.0 - cov.p_cov) ** system.L
        d = abs(p_pipe - (1.0 - pt_s))
        rows.append(dict(check="silent_eavesdropper_identity", value=p_pipe, reference=1.0 - pt_s, delta=d,
                         tolerance=1e-9, status="PASS" if d <= 1e-9 else "FAIL"))
    return rows
