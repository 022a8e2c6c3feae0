"""Power-splitting relay: a fraction beta of the received power is harvested.

The SNR functions follow the signal model term by term and accept unequal
source/jamming powers; the Monte Carlo simulator evaluates them directly.
The metric functions delegate to :mod:`ehrelay.analytic`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ehrelay import analytic
from ehrelay.params import ChannelSample, PowerSplitting, SystemParams
from ehrelay.quadrature import QuadSpec


def snr_relay_ps(p: SystemParams, beta: float, s: ChannelSample):
    """SNR of the relay's eavesdropping attempt; jamming arrives over the reciprocal g_rd."""
    g_sr, g_rd = np.asarray(s.g_sr, dtype=float), np.asarray(s.g_rd, dtype=float)
    return (1 - beta) * p.p_s * g_sr / ((1 - beta) * p.p_d * g_rd + p.n0)


def snr_dest_ps_exact(p: SystemParams, beta: float, s: ChannelSample):
    """Destination SNR after jamming cancellation, including the N0^2 / P_R noise term.

    Zero received power gives 0 by continuity.
    """
    g_sr, g_rd = np.asarray(s.g_sr, dtype=float), np.asarray(s.g_rd, dtype=float)
    received = p.p_s * g_sr + p.p_d * g_rd
    num = p.eta * beta * (1 - beta) * p.p_s * g_sr * g_rd
    with np.errstate(divide="ignore", invalid="ignore"):
        den = p.eta * beta * g_rd * p.n0 + p.n0 * (1 - beta) + p.n0**2 / received
        out = np.where(received > 0, num / den, 0.0)
    return out[()] if out.ndim == 0 else out


def snr_dest_ps_approx(p: SystemParams, beta: float, s: ChannelSample):
    """High-SNR destination SNR: the N0^2 term of the exact form is dropped."""
    g_sr, g_rd = np.asarray(s.g_sr, dtype=float), np.asarray(s.g_rd, dtype=float)
    num = p.eta * beta * (1 - beta) * p.p_s * g_sr * g_rd
    den = p.n0 * (p.eta * beta * g_rd + (1 - beta))
    with np.errstate(invalid="ignore"):
        out = np.where(den > 0, num / den, 0.0)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class PsDerived:
    delta: float
    theta1: float
    theta2_limit: float
    theta3: float
    m_x: float
    m_y: float
    m_z: float


def ps_derived(p: SystemParams, beta: float) -> PsDerived:
    k = analytic.link_kernel(p, PowerSplitting(beta))
    return PsDerived(k.delta, k.theta1, k.theta2_limit, k.theta3, k.m_x, k.m_y, k.m_z)


def secrecy_outage_ps(p: SystemParams, beta: float, spec: QuadSpec = QuadSpec()) -> float:
    return analytic.secrecy_outage_cond(p, PowerSplitting(beta), spec)


def prob_pos_secrecy_ps_exact(p: SystemParams, beta: float, spec: QuadSpec = QuadSpec()) -> float:
    return analytic.prob_pos_exact(p, PowerSplitting(beta), spec)


def prob_pos_secrecy_ps_approx(p: SystemParams, beta: float) -> float:
    return analytic.prob_pos_approx(p, PowerSplitting(beta))


def ergodic_ps_exact(p: SystemParams, beta: float, spec: QuadSpec = QuadSpec()) -> float:
    return analytic.ergodic_rate(p, PowerSplitting(beta), True, spec)


def ergodic_ps_approx(p: SystemParams, beta: float, spec: QuadSpec = QuadSpec()) -> float:
    return analytic.ergodic_rate(p, PowerSplitting(beta), False, spec)


def ergodic_ps_lower_bound(p: SystemParams, beta: float) -> float:
    return analytic.ergodic_lower_bound(p, PowerSplitting(beta))
