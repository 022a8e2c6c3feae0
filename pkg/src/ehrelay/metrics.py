"""Policy-independent metrics: harvester power outage, its density, and rate combiners."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ehrelay.params import SystemParams, require_equal_powers
from ehrelay.special import lower_incomplete_gamma

# relative gap between the two means below which they are treated as equal
EQUAL_MEANS_RTOL = 1e-6


def _means_equal(l1: float, l2: float) -> bool:
    return abs(l1 - l2) <= EQUAL_MEANS_RTOL * max(l1, l2)


@dataclass(frozen=True)
class SumExpDensity:
    """Density of the sum of two independent exponentials with means ``lambda_1``, ``lambda_2``."""

    lambda_1: float
    lambda_2: float

    def __post_init__(self):
        if not (self.lambda_1 > 0 and self.lambda_2 > 0):
            raise ValueError("exponential means must be positive")


def sum_exp_pdf(d: SumExpDensity, z):
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise ValueError("density of a non-negative variable evaluated at z < 0")
    l1, l2 = d.lambda_1, d.lambda_2
    if _means_equal(l1, l2):
        lam = 0.5 * (l1 + l2)
        out = z_arr * np.exp(-z_arr / lam) / lam**2
    else:
        # (e^{-z/l1} - e^{-z/l2}) / (l1 - l2), written to survive l1 ~ l2
        out = -np.exp(-z_arr / l1) * np.expm1(z_arr * (l2 - l1) / (l1 * l2)) / (l1 - l2)
    return float(out) if np.ndim(out) == 0 else out


def _expm1_plus(u: float) -> float:
    """exp(-u) - 1 + u, accurate for small u."""
    if u < 0.1:
        term, total, k = u * u / 2.0, 0.0, 2
        while abs(term) > 1e-18 * abs(total) or total == 0.0:
            total += term
            k += 1
            term *= -u / k
            if term == 0.0:
                break
        return total
    return math.expm1(-u) + u


def sum_exp_cdf(l1: float, l2: float, t: float) -> float:
    """P(G1 + G2 < t) for independent exponentials with means l1, l2."""
    if t <= 0:
        return 0.0
    if _means_equal(l1, l2):
        lam = 0.5 * (l1 + l2)
        return lower_incomplete_gamma(2.0, t / lam)
    # 1 - l1/(l1-l2) e^{-t/l1} - l2/(l2-l1) e^{-t/l2}, regrouped so the leading
    # linear terms cancel analytically
    val = (l2 * _expm1_plus(t / l2) - l1 * _expm1_plus(t / l1)) / (l1 - l2)
    return min(max(val, 0.0), 1.0)


def power_outage_prob(p: SystemParams) -> float:
    """Probability that the total RF power at the relay misses the activation threshold."""
    require_equal_powers(p)
    return sum_exp_cdf(p.lambda_sr, p.lambda_rd, p.theta_h / p.p_s)


def total_secrecy_outage(p_pout: float, p_out_cond: float) -> float:
    for name, v in (("power outage", p_pout), ("secrecy outage", p_out_cond)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} probability {v} outside [0, 1]")
    return p_pout + (1.0 - p_pout) * p_out_cond


def secrecy_rate(gamma_d, gamma_r, time_factor: float):
    """``time_factor * max(log2((1 + gamma_d) / (1 + gamma_r)), 0)``; works elementwise."""
    if not 0.0 < time_factor <= 1.0:
        raise ValueError(f"time factor must lie in (0, 1], got {time_factor}")
    gd = np.asarray(gamma_d, dtype=float)
    gr = np.asarray(gamma_r, dtype=float)
    rate = time_factor * np.maximum(np.log2(np.divide(1.0 + gd, 1.0 + gr)), 0.0)
    return float(rate) if np.ndim(rate) == 0 else rate
