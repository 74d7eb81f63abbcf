"""Seeded Monte Carlo estimates of outage and transmission probability.

Trials are split into fixed-size chunks. Chunk ``i`` draws from its own
Philox stream keyed by ``SeedSequence(seed, spawn_key=(i,))``, so an estimate
depends only on ``(config, n_trials, seed, chunk_size)`` and not on how many
workers run the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import fading
from .secrecy import SystemConfig, eaves_snr_params, main_snr_params

__all__ = ["McEstimate", "wilson_interval", "simulate_secrecy_outage", "simulate_transmission_probability"]

DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    n_trials: int
    ci_low: float
    ci_high: float
    seed: int
    successes: int
    z: float = 1.96


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1 or not 0 <= successes <= n or not z > 0:
        raise ValueError(f"wilson_interval needs 0 <= successes <= n, n >= 1, z > 0 (got {successes}, {n}, {z})")
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    low = 0.0 if successes == 0 else min(max(center - half, 0.0), p)
    high = 1.0 if successes == n else max(min(center + half, 1.0), p)
    return low, high


def _rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _chunks(n_trials, chunk_size):
    if int(n_trials) != n_trials or n_trials < 1:
        raise ValueError(f"n_trials must be a positive integer, got {n_trials}")
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    n_full, rest = divmod(int(n_trials), int(chunk_size))
    sizes = [chunk_size] * n_full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _run(count_fn, n_trials, seed, chunk_size, workers):
    jobs = _chunks(n_trials, chunk_size)
    if workers is None or workers <= 1:
        counts = [count_fn(_rng(seed, i), n) for i, n in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda job: count_fn(_rng(seed, job[0]), job[1]), jobs))
    return int(sum(counts))


def _estimate(successes, n_trials, seed, z):
    p = successes / n_trials
    lo, hi = wilson_interval(successes, n_trials, z)
    return McEstimate(
        p_hat=p, stderr=math.sqrt(p * (1.0 - p) / n_trials), n_trials=int(n_trials),
        ci_low=lo, ci_high=hi, seed=int(seed), successes=successes, z=z,
    )


def simulate_secrecy_outage(config: SystemConfig, n_trials: int, seed: int = 0, *,
                            chunk_size: int = DEFAULT_CHUNK, workers: int | None = None,
                            z: float = 1.96) -> McEstimate:
    """Fraction of slots in which the best antenna's secrecy rate misses R_s.

    Each trial draws L composite main-link SNRs and L*N eavesdropper SNRs
    (eavesdropper channels are independent per transmit antenna).
    """
    main = main_snr_params(config)
    eve = eaves_snr_params(config)
    L, N, R_s, alpha = config.L, config.N, config.R_s, config.alpha

    def count(rng, n):
        gs = fading.sample(main, rng, size=(n, L))
        c_s = np.log2(1.0 + gs)
        if eve is None or alpha == 1.0:
            c_e = 0.0
        else:
            ge = fading.sample(eve, rng, size=(n, L, N)).max(axis=2)
            c_e = (1.0 - alpha) * np.log2(1.0 + ge)
        c_sec = np.maximum(c_s - c_e, 0.0).max(axis=1)
        return int(np.count_nonzero(c_sec < R_s))

    return _estimate(_run(count, n_trials, seed, chunk_size, workers), n_trials, seed, z)


def simulate_transmission_probability(config: SystemConfig, n_trials: int, seed: int = 0, *,
                                      chunk_size: int = DEFAULT_CHUNK, workers: int | None = None,
                                      z: float = 1.96) -> McEstimate:
    """Fraction of slots in which the best antenna's main-link rate exceeds R_s."""
    main = main_snr_params(config)
    L, R_s = config.L, config.R_s

    def count(rng, n):
        c_s = np.log2(1.0 + fading.sample(main, rng, size=(n, L))).max(axis=1)
        return int(np.count_nonzero(c_s > R_s))

    return _estimate(_run(count, n_trials, seed, chunk_size, workers), n_trials, seed, z)
