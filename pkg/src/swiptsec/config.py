"""JSON scenario documents: flat snake_case keys, ``_db`` suffix for dB values.

Missing keys take the published defaults (main mean SNR 10 dB, eavesdropper
mean SNR 0 dB, both pathlosses 1 dB, rho = 0.8, alpha = 0.1, kappa = mu = 1 on
both links). ``sigma2_over_N0 = 1``, ``L = M = N = 1`` and ``R_s = 1`` are
artifact defaults. Precedence is flags > file > defaults.
"""

from __future__ import annotations

import json
import math

from .fading import KappaMuParams
from .secrecy import MeanInterpretation, NumericsConfig, SystemConfig, db_to_linear
from .specfun import AccuracyBudget

__all__ = [
    "ConfigError",
    "DEFAULTS",
    "parse_config",
    "resolve_document",
    "with_override",
    "parse_assignment",
    "to_document",
    "is_db_key",
    "SCALAR_KEYS",
]


class ConfigError(ValueError):
    """Malformed document, unknown key or out-of-range value."""


def _pos_int(v):
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    return isinstance(v, int) and not isinstance(v, bool) and v >= 1


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


# key -> (check, description)
_CHECKS = {
    "L": (_pos_int, "a positive integer"),
    "M": (_pos_int, "a positive integer"),
    "N": (_pos_int, "a positive integer"),
    "rho": (lambda v: _num(v) and 0 <= v <= 1, "a number in [0, 1]"),
    "alpha": (lambda v: _num(v) and 0 <= v <= 1, "a number in [0, 1]"),
    "R_s": (lambda v: _num(v) and v > 0, "a positive number"),
    "sigma2_over_N0": (lambda v: _num(v) and v >= 0, "a nonnegative number"),
    "PL_s": (lambda v: _num(v) and v > 0, "a positive number"),
    "PL_e": (lambda v: _num(v) and v > 0, "a positive number"),
    "PL_s_db": (_num, "a finite number"),
    "PL_e_db": (_num, "a finite number"),
    "gamma_s": (lambda v: _num(v) and v > 0, "a positive number"),
    "gamma_e": (lambda v: _num(v) and v > 0, "a positive number"),
    "gamma_s_db": (_num, "a finite number"),
    "gamma_e_db": (_num, "a finite number"),
    "kappa_s": (lambda v: _num(v) and v >= 0, "a nonnegative number"),
    "kappa_e": (lambda v: _num(v) and v >= 0, "a nonnegative number"),
    "mu_s": (lambda v: _num(v) and v > 0, "a positive number"),
    "mu_e": (lambda v: _num(v) and v > 0, "a positive number"),
    "mean_interpretation": (lambda v: v in {m.value for m in MeanInterpretation},
                            "one of " + ", ".join(m.value for m in MeanInterpretation)),
    "rel_tol": (lambda v: _num(v) and 0 < v <= 1e-3, "a number in (0, 1e-3]"),
    "max_terms": (lambda v: _pos_int(v) and v >= 16, "an integer >= 16"),
    "quad_rel_tol": (lambda v: _num(v) and 0 < v <= 1e-3, "a number in (0, 1e-3]"),
    "quad_abs_tol": (lambda v: _num(v) and 0 < v <= 1e-3, "a number in (0, 1e-3]"),
    "tail_cutoff_sigma": (lambda v: _num(v) and v > 0, "a positive number"),
    "fixed_terms": (lambda v: v is None or _pos_int(v), "null or a positive integer"),
    "max_intervals": (lambda v: _pos_int(v) and v >= 16, "an integer >= 16"),
}

DEFAULTS = {
    "L": 1,
    "M": 1,
    "N": 1,
    "rho": 0.8,
    "alpha": 0.1,
    "R_s": 1.0,
    "sigma2_over_N0": 1.0,
    "PL_s_db": 1.0,
    "PL_e_db": 1.0,
    "gamma_s_db": 10.0,
    "gamma_e_db": 0.0,
    "kappa_s": 1.0,
    "mu_s": 1.0,
    "kappa_e": 1.0,
    "mu_e": 1.0,
    "mean_interpretation": MeanInterpretation.PER_BRANCH_TIMES_M.value,
    "rel_tol": 1e-10,
    "max_terms": 10_000,
    "quad_rel_tol": 1e-10,
    "quad_abs_tol": 1e-12,
    "tail_cutoff_sigma": 10.0,
    "fixed_terms": None,
    "max_intervals": 4000,
}

# linear key <-> dB key pairs; a document may set either, not both
_DB_PAIRS = {"gamma_s": "gamma_s_db", "gamma_e": "gamma_e_db", "PL_s": "PL_s_db", "PL_e": "PL_e_db"}
_DB_TO_LIN = {v: k for k, v in _DB_PAIRS.items()}

SCALAR_KEYS = tuple(k for k in _CHECKS if k != "mean_interpretation")


def is_db_key(key: str) -> bool:
    return key in _DB_TO_LIN


def _counterpart(key):
    return _DB_PAIRS.get(key) or _DB_TO_LIN.get(key)


def resolve_document(document) -> dict:
    """Validate a document and fill defaults; returns the resolved flat dict."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ConfigError("config document must be a JSON object")
    for key, value in document.items():
        if key not in _CHECKS:
            raise ConfigError(f"unknown config key {key!r}")
        check, desc = _CHECKS[key]
        if not check(value):
            raise ConfigError(f"config key {key!r}: must be {desc}, got {value!r}")
        other = _counterpart(key)
        if other is not None and other in document:
            raise ConfigError(f"config keys {key!r} and {other!r} are mutually exclusive")
    resolved = {}
    for key, default in DEFAULTS.items():
        other = _counterpart(key)
        if key in document:
            resolved[key] = document[key]
        elif other is not None and other in document:
            continue
        else:
            resolved[key] = default
    for key in document:
        if key not in resolved:
            resolved[key] = document[key]
    for key in ("L", "M", "N", "max_terms", "max_intervals", "fixed_terms"):
        if isinstance(resolved.get(key), float):
            resolved[key] = int(resolved[key])
    return resolved


def _get_linear(doc, key):
    if key in doc:
        return float(doc[key])
    return db_to_linear(float(doc[_DB_PAIRS[key]]))


def parse_config(document) -> tuple[SystemConfig, NumericsConfig]:
    """Build ``(SystemConfig, NumericsConfig)`` from a JSON text or dict.

    Raises
    ------
    ConfigError
        On malformed JSON, unknown keys, or out-of-range values; the message
        names the offending key.
    """
    doc = resolve_document(document)
    try:
        system = SystemConfig(
            L=doc["L"], M=doc["M"], N=doc["N"],
            rho=float(doc["rho"]), alpha=float(doc["alpha"]), R_s=float(doc["R_s"]),
            sigma2_over_N0=float(doc["sigma2_over_N0"]),
            PL_s=_get_linear(doc, "PL_s"), PL_e=_get_linear(doc, "PL_e"),
            main_branch=KappaMuParams(float(doc["kappa_s"]), float(doc["mu_s"]), _get_linear(doc, "gamma_s")),
            eaves=KappaMuParams(float(doc["kappa_e"]), float(doc["mu_e"]), _get_linear(doc, "gamma_e")),
            mean_interpretation=doc["mean_interpretation"],
        )
        numerics = NumericsConfig(
            series_budget=AccuracyBudget(float(doc["rel_tol"]), int(doc["max_terms"])),
            quad_rel_tol=float(doc["quad_rel_tol"]), quad_abs_tol=float(doc["quad_abs_tol"]),
            tail_cutoff_sigma=float(doc["tail_cutoff_sigma"]), fixed_terms=doc["fixed_terms"],
            max_intervals=int(doc["max_intervals"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return system, numerics


def with_override(document: dict, key: str, value) -> dict:
    """Copy of ``document`` with ``key`` set, dropping its dB/linear counterpart."""
    if key not in _CHECKS:
        raise ConfigError(f"unknown config key {key!r}")
    out = dict(document)
    other = _counterpart(key)
    if other is not None:
        out.pop(other, None)
    out[key] = value
    return out


def parse_assignment(text: str) -> tuple[str, object]:
    """Parse a ``key=value`` flag; the value is read as JSON, else as a string."""
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"expected key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw.strip()
    return key, value


def to_document(system: SystemConfig, numerics: NumericsConfig) -> dict:
    """Flat linear-valued document that parses back to the same configs."""
    return {
        "L": system.L, "M": system.M, "N": system.N,
        "rho": system.rho, "alpha": system.alpha, "R_s": system.R_s,
        "sigma2_over_N0": system.sigma2_over_N0,
        "PL_s": system.PL_s, "PL_e": system.PL_e,
        "gamma_s": system.main_branch.mean_snr, "gamma_e": system.eaves.mean_snr,
        "kappa_s": system.main_branch.kappa, "mu_s": system.main_branch.mu,
        "kappa_e": system.eaves.kappa, "mu_e": system.eaves.mu,
        "mean_interpretation": system.mean_interpretation.value,
        "rel_tol": numerics.series_budget.rel_tol, "max_terms": numerics.series_budget.max_terms,
        "quad_rel_tol": numerics.quad_rel_tol, "quad_abs_tol": numerics.quad_abs_tol,
        "tail_cutoff_sigma": numerics.tail_cutoff_sigma, "fixed_terms": numerics.fixed_terms,
        "max_intervals": numerics.max_intervals,
    }
