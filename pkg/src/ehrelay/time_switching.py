"""Time-switching relay: harvest for alpha T, then two (1 - alpha) T / 2 sub-slots."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ehrelay import analytic
from ehrelay.params import ChannelSample, SystemParams, TimeSwitching
from ehrelay.quadrature import QuadSpec


def snr_relay_ts(p: SystemParams, s: ChannelSample):
    g_sr, g_rd = np.asarray(s.g_sr, dtype=float), np.asarray(s.g_rd, dtype=float)
    return p.p_s * g_sr / (p.p_d * g_rd + p.n0)


def snr_dest_ts_exact(p: SystemParams, alpha: float, s: ChannelSample):
    """Destination SNR including the (1 - alpha) N0^2 / P_R term.

    alpha = 1 leaves no transmission time and is defined as 0, as is zero received power.
    """
    g_sr, g_rd = np.asarray(s.g_sr, dtype=float), np.asarray(s.g_rd, dtype=float)
    if alpha >= 1.0:
        return np.zeros(np.broadcast(g_sr, g_rd).shape)[()]
    received = p.p_s * g_sr + p.p_d * g_rd
    num = 2 * p.eta * alpha * p.p_s * g_sr * g_rd
    with np.errstate(divide="ignore", invalid="ignore"):
        den = 2 * p.eta * alpha * g_rd * p.n0 + p.n0 * (1 - alpha) + p.n0**2 * (1 - alpha) / received
        out = np.where(received > 0, num / den, 0.0)
    return out[()] if out.ndim == 0 else out


def snr_dest_ts_approx(p: SystemParams, alpha: float, s: ChannelSample):
    g_sr, g_rd = np.asarray(s.g_sr, dtype=float), np.asarray(s.g_rd, dtype=float)
    if alpha >= 1.0:
        return np.zeros(np.broadcast(g_sr, g_rd).shape)[()]
    num = 2 * p.eta * alpha * p.p_s * g_sr * g_rd
    den = p.n0 * (2 * p.eta * alpha * g_rd + (1 - alpha))
    return num / den


@dataclass(frozen=True)
class TsDerived:
    delta: float
    theta1: float
    theta2_limit: float
    theta3: float
    m_x: float
    m_y: float
    m_z: float


def ts_derived(p: SystemParams, alpha: float) -> TsDerived:
    k = analytic.link_kernel(p, TimeSwitching(alpha))
    return TsDerived(k.delta, k.theta1, k.theta2_limit, k.theta3, k.m_x, k.m_y, k.m_z)


def secrecy_outage_ts(p: SystemParams, alpha: float, spec: QuadSpec = QuadSpec()) -> float:
    return analytic.secrecy_outage_cond(p, TimeSwitching(alpha), spec)


def prob_pos_secrecy_ts_exact(p: SystemParams, alpha: float, spec: QuadSpec = QuadSpec()) -> float:
    return analytic.prob_pos_exact(p, TimeSwitching(alpha), spec)


def prob_pos_secrecy_ts_approx(p: SystemParams, alpha: float) -> float:
    return analytic.prob_pos_approx(p, TimeSwitching(alpha))


def ergodic_ts_exact(p: SystemParams, alpha: float, spec: QuadSpec = QuadSpec()) -> float:
    return analytic.ergodic_rate(p, TimeSwitching(alpha), True, spec)


def ergodic_ts_approx(p: SystemParams, alpha: float, spec: QuadSpec = QuadSpec()) -> float:
    return analytic.ergodic_rate(p, TimeSwitching(alpha), False, spec)


def ergodic_ts_lower_bound(p: SystemParams, alpha: float) -> float:
    return analytic.ergodic_lower_bound(p, TimeSwitching(alpha))
