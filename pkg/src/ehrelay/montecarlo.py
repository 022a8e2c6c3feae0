"""Seeded Monte Carlo over Rayleigh fading realisations.

Draws are generated in fixed-size blocks. Block ``b`` uses a Philox stream
keyed by the seed, with its counter starting at ``b``. Each block's partial
sums are reduced in block order, so estimates depend only on
``(seed, n_samples, snr_mode)`` and not on how many threads ran the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ehrelay.metrics import secrecy_rate
from ehrelay.params import (
    ChannelSample,
    Estimate,
    McEstimate,
    Policy,
    PowerSplitting,
    SystemParams,
    TimeSwitching,
)
from ehrelay.power_splitting import snr_dest_ps_approx, snr_dest_ps_exact, snr_relay_ps
from ehrelay.time_switching import snr_dest_ts_approx, snr_dest_ts_exact, snr_relay_ts

BLOCK_SIZE = 1 << 16
SNR_MODES = ("exact", "high_snr_approx")


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 1_000_000
    seed: int = 0
    snr_mode: str = "exact"
    n_streams: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.snr_mode not in SNR_MODES:
            raise ValueError(f"snr_mode must be one of {SNR_MODES}, got {self.snr_mode!r}")
        if self.n_streams < 1:
            raise ValueError("n_streams must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, block, 0, 0]))


def gain_from_uniform(u, mean: float):
    """Inverse-CDF exponential draw ``-mean * ln(u)`` for u in (0, 1]."""
    return -mean * np.log(u)


def sample_channels(lambda_sr: float, lambda_rd: float, rng: np.random.Generator, n: int) -> ChannelSample:
    if not (lambda_sr > 0 and lambda_rd > 0):
        raise ValueError("mean channel gains must be positive")
    # 1 - U[0,1) lies in (0, 1]; log1p keeps full precision near U = 0
    g_sr = -lambda_sr * np.log1p(-rng.random(n))
    g_rd = -lambda_rd * np.log1p(-rng.random(n))
    return ChannelSample(g_sr, g_rd)


def sample_channel(lambda_sr: float, lambda_rd: float, rng: np.random.Generator) -> ChannelSample:
    s = sample_channels(lambda_sr, lambda_rd, rng, 1)
    return ChannelSample(float(s.g_sr[0]), float(s.g_rd[0]))


def policy_snrs(p: SystemParams, pol: Policy, s: ChannelSample, exact: bool):
    """(gamma_D, gamma_R) for a batch of channel draws, straight from the signal model."""
    if isinstance(pol, PowerSplitting):
        gr = snr_relay_ps(p, pol.beta, s)
        gd = (snr_dest_ps_exact if exact else snr_dest_ps_approx)(p, pol.beta, s)
    elif isinstance(pol, TimeSwitching):
        gr = snr_relay_ts(p, s)
        gd = (snr_dest_ts_exact if exact else snr_dest_ts_approx)(p, pol.alpha, s)
    else:
        raise TypeError(f"unknown policy {pol!r}")
    return np.asarray(gd, dtype=float), np.asarray(gr, dtype=float)


def _block_sums(p: SystemParams, pol: Policy, cfg: McConfig, block: int, n_total: int) -> np.ndarray:
    start = block * BLOCK_SIZE
    m = min(BLOCK_SIZE, n_total - start)
    rng = block_generator(cfg.seed, block)
    s = sample_channels(p.lambda_sr, p.lambda_rd, rng, m)
    active = p.p_s * s.g_sr + p.p_d * s.g_rd >= p.theta_h

    gd, gr = policy_snrs(p, pol, s, cfg.snr_mode == "exact")
    tf = pol.time_factor
    ratio = (1.0 + gd) / (1.0 + gr)
    if tf > 0:
        rate = secrecy_rate(gd, gr, tf)
        # compare the unclamped rate so that R_th = 0 counts gamma_D < gamma_R as outage
        below = ratio < 2.0 ** (p.r_th / tf)
    else:
        rate = np.zeros(m)
        below = np.ones(m, dtype=bool)
    rate = np.where(active, rate, 0.0)
    positive = active & (gd > gr)
    out_total = ~active | below
    out_active = active & below
    return np.array([
        m,
        np.count_nonzero(active),
        np.count_nonzero(out_active),
        np.count_nonzero(out_total),
        np.count_nonzero(positive),
        rate.sum(),
        np.square(rate).sum(),
    ], dtype=float)


def _bernoulli(k: float, n: float) -> Estimate:
    if n <= 0:
        return Estimate(float("nan"), float("nan"))
    q = k / n
    return Estimate(q, math.sqrt(max(q * (1.0 - q), 0.0) / n))


def estimate_metrics(p: SystemParams, pol: Policy, cfg: McConfig = McConfig()) -> McEstimate:
    """Monte Carlo estimates of every metric, with standard errors.

    An inactive harvester counts as a secrecy outage and contributes zero rate,
    so the ergodic estimate already carries the activation probability.
    """
    n = cfg.n_samples
    n_blocks = -(-n // BLOCK_SIZE)

    def run(b: int) -> np.ndarray:
        return _block_sums(p, pol, cfg, b, n)

    if cfg.n_streams > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_streams) as ex:
            parts = list(ex.map(run, range(n_blocks)))
    else:
        parts = [run(b) for b in range(n_blocks)]
    cols = np.stack(parts)
    total = [math.fsum(cols[:, i]) for i in range(cols.shape[1])]
    n_draws, n_active, k_out_active, k_out_total, k_pos, s1, s2 = total

    mean_rate = s1 / n_draws
    if n_draws > 1:
        var = max(s2 - n_draws * mean_rate**2, 0.0) / (n_draws - 1)
        se_rate = math.sqrt(var / n_draws)
    else:
        se_rate = 0.0

    return McEstimate(
        n_samples=int(n_draws),
        n_active=int(n_active),
        p_power_outage=_bernoulli(n_draws - n_active, n_draws),
        p_secrecy_outage_cond=_bernoulli(k_out_active, n_active),
        p_secrecy_outage_total=_bernoulli(k_out_total, n_draws),
        p_pos=_bernoulli(k_pos, n_draws),
        ergodic=Estimate(mean_rate, se_rate),
        snr_mode=cfg.snr_mode,
        seed=cfg.seed,
    )
