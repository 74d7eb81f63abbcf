"""Secrecy outage of SWIPT downlinks with TAS, MRC and cooperating
on-off power-splitting eavesdroppers under kappa-mu fading."""

from .fading import KappaMuParams, cdf, mrc_composite, pdf, sample
from .montecarlo import McEstimate, simulate_secrecy_outage, simulate_transmission_probability, wilson_interval
from .secrecy import (
    NumericsConfig,
    OutageResult,
    SystemConfig,
    secrecy_outage,
    secrecy_throughput,
    transmission_probability,
)
from .specfun import AccuracyBudget, ConvergenceError, marcum_q

__version__ = "0.1.0"

__all__ = [
    "AccuracyBudget",
    "ConvergenceError",
    "KappaMuParams",
    "McEstimate",
    "NumericsConfig",
    "OutageResult",
    "SystemConfig",
    "cdf",
    "marcum_q",
    "mrc_composite",
    "pdf",
    "sample",
    "secrecy_outage",
    "secrecy_throughput",
    "simulate_secrecy_outage",
    "simulate_transmission_probability",
    "transmission_probability",
    "wilson_interval",
]
