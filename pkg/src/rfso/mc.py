"""Monte-Carlo estimators for the relayed-link metrics.

Sampling is organized in fixed blocks of 2**20 trials.  Each block owns a
counter-based generator seeded from the run seed and the block index alone,
and block results are reduced in block order, so an estimate depends only
on (config, n, seed): reruns are bit-identical and the worker count never
changes the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import dgg_derive, fso_sample, inr_sample, rf_sample_best

__all__ = ["McEstimate", "simulate_outage", "simulate_asr", "BLOCK_SIZE"]

BLOCK_SIZE = 1 << 20


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int


def _block_rng(seed, block):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _block_sizes(n):
    sizes = [BLOCK_SIZE] * (n // BLOCK_SIZE)
    if n % BLOCK_SIZE:
        sizes.append(n % BLOCK_SIZE)
    return sizes


def _run_blocks(worker, n, workers):
    sizes = _block_sizes(n)
    if workers <= 1:
        return [worker(b, sz) for b, sz in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, range(len(sizes)), sizes))


def _check_n(n):
    n = int(n)
    if n < 10_000:
        raise ValueError("need at least 1e4 samples for a usable estimate")
    return n


def simulate_outage(cfg, n, seed, *, workers=1):
    """Estimate the outage probability from n independent trials."""
    n = _check_n(n)
    derived = dgg_derive(cfg.fso)

    def worker(block, size):
        rng = _block_rng(seed, block)
        g_rf = rf_sample_best(cfg.rf, size, rng)
        g_fso = fso_sample(cfg.fso, size, rng, derived=derived)
        z = inr_sample(cfg.interference, size, rng)
        return int(np.count_nonzero(np.minimum(g_rf, g_fso) < cfg.gamma_th * z))

    hits = 0
    for h in _run_blocks(worker, n, workers):
        hits += h
    p = hits / n
    se = math.sqrt(p * (1.0 - p) / n)
    return McEstimate(mean=p, std_error=se, n_samples=n, seed=seed)


def simulate_asr(cfg, n, seed, *, workers=1):
    """Estimate the achievable sum rate from n independent trials."""
    n = _check_n(n)
    derived = dgg_derive(cfg.fso)

    def worker(block, size):
        rng = _block_rng(seed, block)
        g_rf = rf_sample_best(cfg.rf, size, rng)
        g_fso = fso_sample(cfg.fso, size, rng, derived=derived)
        z = inr_sample(cfg.interference, size, rng)
        rate = 0.5 * (np.log2(1.0 + g_rf / z) + np.log2(1.0 + g_fso / z))
        return float(np.sum(rate)), float(np.sum(rate * rate))

    total = 0.0
    total_sq = 0.0
    for s, s2 in _run_blocks(worker, n, workers):
        total += s
        total_sq += s2
    mean = total / n
    var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
    se = math.sqrt(var / n)
    return McEstimate(mean=mean, std_error=se, n_samples=n, seed=seed)
