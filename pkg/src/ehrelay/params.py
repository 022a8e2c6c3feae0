"""Shared value types: link constants, geometry, relay policies and result bundles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if not watts > 0:
        raise ValueError(f"power must be positive to express in dBm, got {watts!r}")
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class Geometry:
    """Source-relay and relay-destination distances (m) with a path-loss exponent."""

    d_sr: float = 5.0
    d_rd: float = 5.0
    rho: float = 2.7

    def __post_init__(self):
        if not (self.d_sr > 0 and self.d_rd > 0):
            raise ValueError(f"distances must be positive, got d_sr={self.d_sr}, d_rd={self.d_rd}")
        if not self.rho >= 1:
            raise ValueError(f"path-loss exponent must be >= 1, got {self.rho}")


def lambda_from_geometry(g: Geometry) -> tuple[float, float]:
    """Mean channel power gains ``(d_sr**-rho, d_rd**-rho)``."""
    if not (g.d_sr > 0 and g.d_rd > 0):
        raise ValueError("distances must be positive")
    return g.d_sr ** (-g.rho), g.d_rd ** (-g.rho)


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the two-hop link. All powers in watts.

    ``p_s`` is the source power and ``p_d`` the destination jamming power.
    The closed forms only cover ``p_s == p_d``; the Monte Carlo simulator
    accepts unequal powers.
    """

    p_s: float
    p_d: float
    n0: float
    eta: float
    theta_h: float
    r_th: float
    lambda_sr: float
    lambda_rd: float

    def __post_init__(self):
        checks = {
            "p_s": self.p_s > 0,
            "p_d": self.p_d > 0,
            "n0": self.n0 > 0,
            "theta_h": self.theta_h >= 0,
            "r_th": self.r_th >= 0,
            "eta": 0 < self.eta <= 1,
            "lambda_sr": self.lambda_sr > 0,
            "lambda_rd": self.lambda_rd > 0,
        }
        bad = [k for k, ok in checks.items() if not ok]
        if bad:
            raise ValueError(f"invalid SystemParams field(s): {', '.join(bad)}")

    @property
    def power(self) -> float:
        """Common transmit power P; raises unless source and jammer powers match."""
        require_equal_powers(self)
        return self.p_s

    def replace(self, **changes) -> SystemParams:
        from dataclasses import replace

        return replace(self, **changes)


def require_equal_powers(p: SystemParams) -> None:
    if p.p_s != p.p_d:
        raise ValueError(
            "closed-form metrics assume equal source and jamming powers (p_s == p_d); "
            f"got p_s={p.p_s}, p_d={p.p_d}"
        )


def default_params(
    *,
    power_dbm: float = 40.0,
    n0: float = 1e-4,
    eta: float = 0.7,
    theta_h_dbm: float = -30.0,
    r_th: float = 0.5,
    geometry: Geometry = Geometry(),
) -> SystemParams:
    """Reference operating point: 40 dBm, eta 0.7, -30 dBm threshold, 5 m hops, rho 2.7."""
    p = dbm_to_watts(power_dbm)
    lam_sr, lam_rd = lambda_from_geometry(geometry)
    return SystemParams(
        p_s=p,
        p_d=p,
        n0=n0,
        eta=eta,
        theta_h=dbm_to_watts(theta_h_dbm),
        r_th=r_th,
        lambda_sr=lam_sr,
        lambda_rd=lam_rd,
    )


@dataclass(frozen=True)
class PowerSplitting:
    beta: float

    kind = "ps"

    def __post_init__(self):
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")

    @property
    def value(self) -> float:
        return self.beta

    @property
    def time_factor(self) -> float:
        return 0.5


@dataclass(frozen=True)
class TimeSwitching:
    alpha: float

    kind = "ts"

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def value(self) -> float:
        return self.alpha

    @property
    def time_factor(self) -> float:
        return (1.0 - self.alpha) / 2.0


Policy = Union[PowerSplitting, TimeSwitching]


def make_policy(kind: str, value: float) -> Policy:
    kind = kind.lower()
    if kind == "ps":
        return PowerSplitting(value)
    if kind == "ts":
        return TimeSwitching(value)
    raise ValueError(f"unknown policy kind {kind!r} (expected 'ps' or 'ts')")


@dataclass(frozen=True)
class ChannelSample:
    """Channel power gains |h_SR|^2 and |h_RD|^2 (scalars or equal-shape arrays).

    The relay-destination channel is reciprocal, so the jamming link reuses ``g_rd``.
    """

    g_sr: float | np.ndarray
    g_rd: float | np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.g_sr) < 0) or np.any(np.asarray(self.g_rd) < 0):
            raise ValueError("channel power gains must be non-negative")


@dataclass(frozen=True)
class MetricReport:
    p_power_outage: float
    p_secrecy_outage_cond: float
    p_secrecy_outage_total: float
    p_pos_exact: float
    p_pos_approx: float
    ergodic_exact: float
    ergodic_approx: float
    ergodic_lower_bound: float

    def as_dict(self) -> dict[str, float]:
        from dataclasses import asdict

        return asdict(self)


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("standard error must be non-negative")


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo counterparts of the :class:`MetricReport` fields.

    ``p_secrecy_outage_cond`` is conditioned on the harvester being active;
    its sample count is ``n_active``. Every other estimate uses all draws.
    """

    n_samples: int
    n_active: int
    p_power_outage: Estimate
    p_secrecy_outage_cond: Estimate
    p_secrecy_outage_total: Estimate
    p_pos: Estimate
    ergodic: Estimate
    snr_mode: str = "exact"
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    def as_dict(self) -> dict[str, float]:
        out: dict[str, float] = {"n_samples": self.n_samples, "n_active": self.n_active}
        for name in ("p_power_outage", "p_secrecy_outage_cond", "p_secrecy_outage_total", "p_pos", "ergodic"):
            est = getattr(self, name)
            out[name] = est.mean
            out[name + "_se"] = est.std_error
        return out
