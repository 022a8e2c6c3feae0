"""Scalar special functions used by the closed forms.

Exponential integral on the negative axis, lower incomplete gamma, Euler's
constant and the positive root of a depressed cubic ``x^3 - a x - b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EULER_GAMMA = 0.57721566490153286060651209008240243

# |x| at which Ei switches from the power series to the continued fraction.
EI_SERIES_LIMIT = 6.0

_EPS = 2.220446049250313e-16


def euler_constant() -> float:
    return EULER_GAMMA


def _ei_series(x: float) -> float:
    # Ei(x) = gamma + ln|x| + sum_k x^k / (k k!)
    total = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total) or k > 500:
            break
    return EULER_GAMMA + math.log(abs(x)) + total


def _e1_scaled_cf(z: float) -> float:
    """exp(z) * E1(z) for z > 1 by the modified Lentz continued fraction."""
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"continued fraction for E1({z}) did not converge")


def exp_integral_ei(x: float) -> float:
    """Exponential integral Ei(x) for x < 0, i.e. -E1(-x)."""
    x = float(x)
    if not x < 0:
        raise ValueError(f"exp_integral_ei is defined here for x < 0 only, got {x}")
    if -x <= EI_SERIES_LIMIT:
        return _ei_series(x)
    z = -x
    if z > 745.0:
        return -0.0
    return -math.exp(-z) * _e1_scaled_cf(z)


def exp_scaled_ei(x: float) -> float:
    """``exp(-x) * Ei(x)`` for x < 0 without overflow for very negative x."""
    x = float(x)
    if not x < 0:
        raise ValueError(f"exp_scaled_ei requires x < 0, got {x}")
    if -x <= EI_SERIES_LIMIT:
        return math.exp(-x) * _ei_series(x)
    return -_e1_scaled_cf(-x)


def lower_incomplete_gamma(a: float, t: float) -> float:
    """Lower incomplete gamma integral of x^(a-1) exp(-x) over [0, t] (not normalised)."""
    if not a > 0:
        raise ValueError(f"shape a must be positive, got {a}")
    if not t >= 0:
        raise ValueError(f"upper limit t must be non-negative, got {t}")
    if t == 0:
        return 0.0
    if math.isinf(t):
        return math.gamma(a)
    if a == 2.0 and t > 1e-2:
        return -math.expm1(-t) - t * math.exp(-t)
    if t < a + 1.0:
        # series: t^a e^-t sum t^n / (a (a+1) ... (a+n))
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(10000):
            ap += 1.0
            term *= t / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        return total * math.exp(-t + a * math.log(t))
    # continued fraction for the upper tail, then complement
    tiny = 1e-300
    b = t + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    upper = math.exp(-t + a * math.log(t)) * h
    return math.gamma(a) - upper


@dataclass(frozen=True)
class CubicCoeffs:
    """Coefficients of ``x^3 - a_coef x - b_coef = 0``."""

    a_coef: float
    b_coef: float

    def __post_init__(self):
        if not (self.a_coef > 0 and self.b_coef > 0):
            raise ValueError(f"cubic coefficients must be positive, got {self.a_coef}, {self.b_coef}")

    def residual(self, x: float) -> float:
        return x**3 - self.a_coef * x - self.b_coef


def cubic_positive_root(c: CubicCoeffs) -> float:
    """Unique positive root of ``x^3 - a x - b`` (a, b > 0); always exceeds sqrt(a).

    Cardano's formula when the discriminant is non-negative, the
    trigonometric form otherwise (three real roots, largest one taken).
    One Newton step polishes the result.
    """
    a, b = c.a_coef, c.b_coef
    p3 = a / 3.0
    half_b = b / 2.0
    disc = half_b * half_b - p3 * p3 * p3
    if disc >= 0:
        u = (half_b + math.sqrt(disc)) ** (1.0 / 3.0)
        # u * v = a / 3 avoids cancellation in the second cube root
        x = u + p3 / u
    else:
        r = math.sqrt(p3)
        arg = half_b / (p3 * r)
        x = 2.0 * r * math.cos(math.acos(min(1.0, arg)) / 3.0)
    fprime = 3.0 * x * x - a
    if fprime > 0:
        x_new = x - c.residual(x) / fprime
        if abs(c.residual(x_new)) <= abs(c.residual(x)):
            x = x_new
    return x
