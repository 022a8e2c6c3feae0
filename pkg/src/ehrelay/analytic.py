"""Closed-form and quadrature secrecy metrics shared by both relay policies.

With equal source and jamming power ``P`` both policies reduce to the same
normalised link. Write ``x = |h_SR|^2`` and ``y = |h_RD|^2``. Let ``s`` be
the effective transmit SNR and ``c`` the harvesting gain of the relay's
forward power. Then

    gamma_R       = s x / (s y + 1)
    gamma_D       = c s x y / ((c y + 1) + 1 / (s (x + y)))     (exact)
    gamma_D_high  = c s x y / (c y + 1)                         (high SNR)

Power splitting uses ``s = (1 - beta) P / N0`` and ``c = eta beta / (1 - beta)``
with rate prefactor 1/2. Time switching uses ``s = P / N0`` and
``c = 2 eta alpha / (1 - alpha)`` with prefactor ``(1 - alpha) / 2``. Every
threshold, integration limit and lower-bound mean below is a function of
``(s, c)`` alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ehrelay.metrics import power_outage_prob, total_secrecy_outage
from ehrelay.params import (
    MetricReport,
    Policy,
    PowerSplitting,
    SystemParams,
    TimeSwitching,
    require_equal_powers,
)
from ehrelay.quadrature import (
    QuadSpec,
    integrate_batch,
    semi_infinite_edges,
)
from ehrelay.special import (
    CubicCoeffs,
    cubic_positive_root,
    euler_constant,
    exp_scaled_ei,
)

LN2 = math.log(2.0)

# |m_y / m_x - 1| below which the equal-means form of T2 is used
EQUAL_RATIO_TOL = 1e-6


@dataclass(frozen=True)
class LinkKernel:
    """Normalised link for one policy setting; see the module docstring."""

    snr_scale: float
    harvest_gain: float
    time_factor: float
    lambda_sr: float
    lambda_rd: float
    r_th: float

    # --- thresholds -------------------------------------------------------
    @property
    def delta(self) -> float:
        """Required ratio (1 + gamma_D) / (1 + gamma_R) for the target rate."""
        expo = self.r_th / self.time_factor
        # beyond 2^1000 no finite SNR ratio can meet the target
        return math.inf if expo > 1000.0 else 2.0**expo

    @property
    def theta1(self) -> float:
        """Positive root of nu(y); below it the secrecy rate target is unreachable."""
        s, c, d = self.snr_scale, self.harvest_gain, self.delta
        # hypot keeps (delta - 1)^2 from overflowing for very large delta
        return ((d - 1.0) + math.hypot(d - 1.0, 2.0 * math.sqrt(d * s / c))) / (2.0 * s)

    @property
    def theta2_limit(self) -> float:
        """Root of c s y^2 = 1: gamma_D can exceed gamma_R only for y above this."""
        return 1.0 / math.sqrt(self.harvest_gain * self.snr_scale)

    @property
    def cubic(self) -> CubicCoeffs:
        s, c = self.snr_scale, self.harvest_gain
        return CubicCoeffs(a_coef=1.0 / (c * s), b_coef=1.0 / (c * s * s))

    @property
    def theta3(self) -> float:
        """Root of psi(y); above it gamma_D > gamma_R for every x."""
        return cubic_positive_root(self.cubic)

    @property
    def m_x(self) -> float:
        return self.snr_scale * self.lambda_sr

    @property
    def m_y(self) -> float:
        return self.snr_scale * self.lambda_rd

    @property
    def m_z(self) -> float:
        return self.harvest_gain * self.lambda_rd

    # --- pointwise functions ----------------------------------------------
    def nu(self, y):
        """Outage holds iff ``nu(y) * x < delta - 1`` (high-SNR destination SNR)."""
        s, c, d = self.snr_scale, self.harvest_gain, self.delta
        y = np.asarray(y, dtype=float)
        return c * s * y / (c * y + 1.0) - d * s / (s * y + 1.0)

    def psi(self, y):
        """Exact-SNR positivity boundary: gamma_D > gamma_R iff x > psi(y), for y > theta2."""
        s, c = self.snr_scale, self.harvest_gain
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / (s * (c * s * y * y - 1.0)) - y

    def gamma_r(self, x, y):
        s = self.snr_scale
        return s * x / (s * y + 1.0)

    def gamma_d(self, x, y, exact: bool = True):
        s, c = self.snr_scale, self.harvest_gain
        den = c * y + 1.0
        if exact:
            with np.errstate(divide="ignore"):
                den = den + 1.0 / (s * (x + y))
        return c * s * x * y / den

    def rate(self, x, y, exact: bool = True):
        ratio = (1.0 + self.gamma_d(x, y, exact)) / (1.0 + self.gamma_r(x, y))
        return self.time_factor * np.maximum(np.log2(ratio), 0.0)


def link_kernel(p: SystemParams, policy: Policy) -> LinkKernel:
    """Kernel for an interior policy parameter (0 < beta, alpha < 1)."""
    require_equal_powers(p)
    P = p.p_s
    if isinstance(policy, PowerSplitting):
        b = policy.beta
        if not 0.0 < b < 1.0:
            raise ValueError(f"kernel needs 0 < beta < 1, got {b}")
        s = (1.0 - b) * P / p.n0
        c = p.eta * b / (1.0 - b)
    elif isinstance(policy, TimeSwitching):
        a = policy.alpha
        if not 0.0 < a < 1.0:
            raise ValueError(f"kernel needs 0 < alpha < 1, got {a}")
        s = P / p.n0
        c = 2.0 * p.eta * a / (1.0 - a)
    else:
        raise TypeError(f"unknown policy {policy!r}")
    return LinkKernel(
        snr_scale=float(s),
        harvest_gain=float(c),
        time_factor=float(policy.time_factor),
        lambda_sr=float(p.lambda_sr),
        lambda_rd=float(p.lambda_rd),
        r_th=float(p.r_th),
    )


def _is_degenerate(policy: Policy) -> bool:
    return policy.value <= 0.0 or policy.value >= 1.0


# --- secrecy outage (conditioned on an active harvester) ---------------------
def secrecy_outage(k: LinkKernel, spec: QuadSpec = QuadSpec()) -> float:
    """High-SNR secrecy outage probability given the harvester is active.

    ``1 - (1/lambda_RD) * int_{theta1}^inf exp(-(delta-1)/(nu(y) lambda_SR) - y/lambda_RD) dy``
    """
    dm1 = k.delta - 1.0
    if math.isinf(dm1):
        return 1.0
    t1 = k.theta1
    lam_sr, lam_rd = k.lambda_sr, k.lambda_rd
    tail = math.exp(-t1 / lam_rd)
    if dm1 == 0.0:
        return 1.0 - tail
    if tail == 0.0:
        return 1.0

    def integrand(u, _j):
        # u = y - theta1; exp(-theta1/lambda_RD) is factored out
        nu = k.nu(u + t1)
        pos = nu > 0
        out = np.zeros_like(u)
        out[pos] = np.exp(-dm1 / (nu[pos] * lam_sr) - u[pos] / lam_rd) / lam_rd
        return out

    edges = semi_infinite_edges(np.array([0.0]), lam_rd)
    inner, _ = integrate_batch(integrand, edges, spec)
    return float(min(max(1.0 - tail * inner[0], 0.0), 1.0))


# --- probability of a strictly positive secrecy rate -------------------------
def prob_positive_exact(k: LinkKernel, spec: QuadSpec = QuadSpec()) -> float:
    """P(gamma_D > gamma_R) with the exact destination SNR, harvester active."""
    t2, t3 = k.theta2_limit, k.theta3
    lam_sr, lam_rd = k.lambda_sr, k.lambda_rd

    def integrand(y, _j):
        psi = k.psi(y)
        ok = np.isfinite(psi) & (psi >= 0) & (y > t2)
        out = np.zeros_like(y)
        out[ok] = np.exp(-psi[ok] / lam_sr - (y[ok] - t2) / lam_rd) / lam_rd
        return out

    val, _ = integrate_batch(integrand, np.array([[t2, t3]]), spec)
    return float(min(math.exp(-t3 / lam_rd) + math.exp(-t2 / lam_rd) * val[0], 1.0))


def prob_positive_approx(k: LinkKernel) -> float:
    """High-SNR P(gamma_D > gamma_R) = P(y > theta2) = exp(-theta2 / lambda_RD)."""
    return math.exp(-k.theta2_limit / k.lambda_rd)


# --- ergodic secrecy rate -----------------------------------------------------
def mean_secrecy_rate(k: LinkKernel, exact: bool = True, spec: QuadSpec = QuadSpec()) -> float:
    """E{R_sec} over both fading gains, harvester active, by nested quadrature.

    The clamp in the rate is only active where gamma_D <= gamma_R. That
    region is known in closed form, so the integration ranges start where
    the rate turns positive. The outer range starts at theta2. With the exact
    SNR the inner range starts at max(psi(y), 0), with a kink at theta3.
    With the high-SNR form the inner range starts at 0.
    """
    lam_sr, lam_rd = k.lambda_sr, k.lambda_rd
    t2 = k.theta2_limit
    inner_spec = QuadSpec(spec.abs_tol / 10.0, spec.rel_tol / 10.0, spec.max_subdivisions)
    # beyond this lower limit exp(-x / lambda_SR) underflows
    x_cap = 700.0 * lam_sr
    s, c = k.snr_scale, k.harvest_gain

    def outer(y, _j):
        y = np.asarray(y, dtype=float)
        if exact:
            above = c * s * y * y - 1.0 > 0
            with np.errstate(divide="ignore", invalid="ignore"):
                lower = np.where(above, np.maximum(k.psi(y), 0.0), np.inf)
        else:
            lower = np.zeros_like(y)
        live = lower < x_cap
        vals = np.zeros_like(y)
        if np.any(live):
            ys = y[live]
            lo = lower[live]

            def inner(x, j):
                yy = ys[j]
                return k.rate(x, yy, exact) * np.exp(-(x - lo[j]) / lam_sr) / lam_sr

            edges = semi_infinite_edges(lo, lam_sr)
            iv, _ = integrate_batch(inner, edges, inner_spec)
            vals[live] = iv * np.exp(-lo / lam_sr)
        return vals * np.exp(-(y - t2) / lam_rd) / lam_rd

    bps = np.array([[k.theta3]]) if exact else None
    edges = semi_infinite_edges(np.array([t2]), lam_rd, breakpoints=bps)
    val, _ = integrate_batch(outer, edges, spec)
    return float(max(val[0], 0.0) * math.exp(-t2 / lam_rd))


# --- closed-form lower bound on the high-SNR ergodic rate -------------------
def t1_lower_bound(m_x: float, m_z: float) -> float:
    """Jensen bound ln(1 + exp(J1 - J2)) on E{ln(1 + X Z / (Z + 1))}."""
    j1 = -2.0 * euler_constant() + math.log(m_x * m_z)
    j2 = -exp_scaled_ei(-1.0 / m_z)
    return float(np.logaddexp(0.0, j1 - j2))


def t2_closed_form(m_x: float, m_y: float) -> float:
    """E{ln(1 + X / (Y + 1))} for independent exponentials X, Y with means m_x, m_y."""
    if abs(m_y / m_x - 1.0) <= EQUAL_RATIO_TOL:
        return 1.0 + exp_scaled_ei(-1.0 / m_x) / m_x
    return m_x / (m_x - m_y) * (exp_scaled_ei(-1.0 / m_y) - exp_scaled_ei(-1.0 / m_x))


def ergodic_lower_bound_terms(k: LinkKernel) -> tuple[float, float]:
    return t1_lower_bound(k.m_x, k.m_z), t2_closed_form(k.m_x, k.m_y)


def mean_rate_lower_bound(k: LinkKernel) -> float:
    """Lower bound on E{R_sec} (high-SNR form), harvester active."""
    t1, t2 = ergodic_lower_bound_terms(k)
    return max(k.time_factor * (t1 - t2) / LN2, 0.0)


# --- policy-level wrappers that include the power outage ---------------------
def secrecy_outage_cond(p: SystemParams, policy: Policy, spec: QuadSpec = QuadSpec()) -> float:
    if _is_degenerate(policy):
        require_equal_powers(p)
        return 1.0
    return secrecy_outage(link_kernel(p, policy), spec)


def secrecy_outage_total(p: SystemParams, policy: Policy, spec: QuadSpec = QuadSpec()) -> float:
    return total_secrecy_outage(power_outage_prob(p), secrecy_outage_cond(p, policy, spec))


def prob_pos_exact(p: SystemParams, policy: Policy, spec: QuadSpec = QuadSpec()) -> float:
    if _is_degenerate(policy):
        require_equal_powers(p)
        return 0.0
    return (1.0 - power_outage_prob(p)) * prob_positive_exact(link_kernel(p, policy), spec)


def prob_pos_approx(p: SystemParams, policy: Policy) -> float:
    if _is_degenerate(policy):
        require_equal_powers(p)
        return 0.0
    return (1.0 - power_outage_prob(p)) * prob_positive_approx(link_kernel(p, policy))


def ergodic_rate(
    p: SystemParams, policy: Policy, exact: bool = True, spec: QuadSpec = QuadSpec()
) -> float:
    if _is_degenerate(policy):
        require_equal_powers(p)
        return 0.0
    k = link_kernel(p, policy)
    return (1.0 - power_outage_prob(p)) * mean_secrecy_rate(k, exact, spec)


def ergodic_lower_bound(p: SystemParams, policy: Policy) -> float:
    if _is_degenerate(policy):
        require_equal_powers(p)
        return 0.0
    return (1.0 - power_outage_prob(p)) * mean_rate_lower_bound(link_kernel(p, policy))


def evaluate_policy(p: SystemParams, policy: Policy, spec: QuadSpec = QuadSpec()) -> MetricReport:
    """Every analytic metric at one operating point."""
    require_equal_powers(p)
    p_pout = power_outage_prob(p)
    p_cond = secrecy_outage_cond(p, policy, spec)
    return MetricReport(
        p_power_outage=p_pout,
        p_secrecy_outage_cond=p_cond,
        p_secrecy_outage_total=total_secrecy_outage(p_pout, p_cond),
        p_pos_exact=prob_pos_exact(p, policy, spec),
        p_pos_approx=prob_pos_approx(p, policy),
        ergodic_exact=ergodic_rate(p, policy, True, spec),
        ergodic_approx=ergodic_rate(p, policy, False, spec),
        ergodic_lower_bound=ergodic_lower_bound(p, policy),
    )
