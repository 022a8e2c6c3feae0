import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ehrelay import analytic
from ehrelay.params import Geometry, PowerSplitting, TimeSwitching, default_params, make_policy

from oracles import t2_literal


def _expect_ln1p(scale):
    """E{ln(1 + scale X)} for X ~ Exp(1) at 30 digits."""
    return -mpmath.exp(1 / scale) * mpmath.ei(-1 / scale)


@pytest.mark.parametrize("m_z", [1e-3, 0.05, 1.0, 30.0])
def test_j_terms_against_quadrature(m_z):
    m_x = 200.0
    with mpmath.workdps(30):
        j1 = mpmath.quad(lambda x: mpmath.log(x) * mpmath.exp(-x / m_x) / m_x, [0, m_x, mpmath.inf]) + mpmath.quad(
            lambda z: mpmath.log(z) * mpmath.exp(-z / m_z) / m_z, [0, m_z, mpmath.inf]
        )
        j2 = mpmath.quad(lambda z: mpmath.log1p(z) * mpmath.exp(-z / m_z) / m_z, [0, m_z, mpmath.inf])
    ref = math.log1p(math.exp(float(j1 - j2)))
    assert analytic.t1_lower_bound(m_x, m_z) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("m_x, m_z", [(1e3, 0.02), (50.0, 1.0), (1e5, 0.3), (2.0, 5.0)])
def test_t1_is_a_lower_bound(m_x, m_z):
    # E{ln(1 + X Z / (Z + 1))}: the inner expectation over X is closed form
    with mpmath.workdps(30):
        f = lambda z: _expect_ln1p(m_x * z / (z + 1)) * mpmath.exp(-z / m_z) / m_z
        exact = float(mpmath.quad(f, [0, m_z, 10 * m_z, mpmath.inf]))
    assert analytic.t1_lower_bound(m_x, m_z) <= exact + 1e-6


@pytest.mark.parametrize(
    "m_x, m_y, tol",
    [
        (100.0, 100.0, 1e-9),
        (100.0, 30.0, 1e-9),
        (3.0, 40.0, 1e-9),
        # inside the equal-means switch the first-order error is about the ratio gap
        (1e4, 1e4 * (1 + 1e-8), 1e-6),
    ],
)
def test_t2_against_quadrature(m_x, m_y, tol):
    with mpmath.workdps(30):
        f = lambda y: _expect_ln1p(m_x / (y + 1)) * mpmath.exp(-y / m_y) / m_y
        ref = float(mpmath.quad(f, [0, m_y, 10 * m_y, mpmath.inf]))
    assert analytic.t2_closed_form(m_x, m_y) == pytest.approx(ref, rel=tol)


@pytest.mark.parametrize("m_x, m_y", [(1e3, 1e3), (1e3, 250.0), (20.0, 500.0)])
def test_t2_against_relay_snr_cdf(m_x, m_y):
    # T2 = E{ln(1 + gamma_R)} = int_0^inf (1 - F(u)) / (1 + u) du,
    # with 1 - F(u) = exp(-u / m_x) / (1 + u m_y / m_x)
    with mpmath.workdps(30):
        f = lambda u: mpmath.exp(-u / m_x) / ((1 + u * m_y / m_x) * (1 + u))
        ref = float(mpmath.quad(f, [0, 1, m_x, 10 * m_x, mpmath.inf]))
    assert analytic.t2_closed_form(m_x, m_y) == pytest.approx(ref, abs=1e-6)


@given(st.floats(0.5, 1e5), st.floats(1e-7, 1e-5))
def test_t2_continuous_at_equal_means(m_x, eps):
    a = analytic.t2_closed_form(m_x, m_x * (1 + eps))
    b = analytic.t2_closed_form(m_x, m_x)
    assert a == pytest.approx(b, rel=1e-4)


def test_t2_literal_branches():
    assert analytic.t2_closed_form(40.0, 40.0) == pytest.approx(t2_literal(40.0, 40.0), rel=1e-12)
    assert analytic.t2_closed_form(40.0, 7.0) == pytest.approx(t2_literal(40.0, 7.0), rel=1e-12)


def test_lower_bound_survives_huge_means():
    # exp(1/m) Ei(-1/m) with m tiny would overflow if formed naively
    assert math.isfinite(analytic.t2_closed_form(1e-4, 2e-4))
    assert math.isfinite(analytic.t1_lower_bound(1e-3, 1e-4))


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["ps", "ts"]),
    st.floats(0.05, 0.95),
    st.floats(25.0, 55.0),
    st.floats(0.1, 1.0),
    st.floats(0.0, 2.0),
    st.floats(2.0, 8.0),
)
def test_metric_report_invariants(kind, v, pdbm, eta, r_th, d_sr):
    p = default_params(power_dbm=pdbm, eta=eta, r_th=r_th, geometry=Geometry(d_sr, 10 - d_sr, 2.7))
    rep = analytic.evaluate_policy(p, make_policy(kind, v))
    for name in ("p_power_outage", "p_secrecy_outage_cond", "p_secrecy_outage_total", "p_pos_exact", "p_pos_approx"):
        assert 0.0 <= getattr(rep, name) <= 1.0
    assert rep.p_secrecy_outage_total == pytest.approx(
        rep.p_power_outage + (1 - rep.p_power_outage) * rep.p_secrecy_outage_cond, abs=1e-15
    )
    assert rep.p_secrecy_outage_total >= rep.p_secrecy_outage_cond - 1e-15
    # the high-SNR destination SNR dominates the exact one pointwise
    assert rep.p_pos_approx >= rep.p_pos_exact - 1e-7
    assert rep.ergodic_approx >= rep.ergodic_exact - 1e-7
    assert 0.0 <= rep.ergodic_lower_bound <= rep.ergodic_approx + 1e-9


def test_kernel_requires_interior_parameter(params):
    with pytest.raises(ValueError):
        analytic.link_kernel(params, PowerSplitting(1.0))
    with pytest.raises(ValueError):
        analytic.link_kernel(params, TimeSwitching(0.0))


def test_huge_rate_target_is_certain_outage(params):
    k = analytic.link_kernel(params.replace(r_th=1e4), PowerSplitting(0.5))
    assert k.delta == math.inf
    assert analytic.secrecy_outage(k) == 1.0


def test_theta_ordering(params):
    for pol in (PowerSplitting(0.3), TimeSwitching(0.6)):
        k = analytic.link_kernel(params, pol)
        assert k.theta2_limit < k.theta3
        assert k.theta1 > k.theta2_limit  # target rate > 0 needs more than positivity
        y = np.linspace(k.theta2_limit * 1.001, k.theta3 * 0.999, 50)
        assert np.all(k.psi(y) >= 0)
        assert np.all(k.psi(np.linspace(k.theta3 * 1.001, 10 * k.theta3, 50)) < 0)


def test_rate_clamped_and_time_scaled(params):
    k = analytic.link_kernel(params, TimeSwitching(0.4))
    x = np.array([1e-3, 0.0, 0.05])
    y = np.array([1e-5, 0.05, 0.05])
    r = k.rate(x, y)
    assert np.all(r >= 0) and r[0] == 0.0
    ref = 0.3 * math.log2((1 + k.gamma_d(0.05, 0.05)) / (1 + k.gamma_r(0.05, 0.05)))
    assert r[2] == pytest.approx(ref, rel=1e-14)
