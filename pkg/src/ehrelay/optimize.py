"""Choose the power-splitting ratio or harvesting time that optimises a secrecy metric.

The objectives are only empirically unimodal, so a coarse grid picks the
basin and golden-section search refines inside the bracketing grid cell.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ehrelay import analytic
from ehrelay.params import SystemParams, make_policy
from ehrelay.quadrature import QuadSpec

OBJECTIVES = ("min_secrecy_outage", "max_ergodic_rate")
ERGODIC_FORMS = ("exact", "approx", "lower_bound")

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizeSpec:
    objective: str = "min_secrecy_outage"
    coarse_grid_points: int = 41
    refine_tol: float = 1e-4
    bounds: tuple[float, float] = (0.001, 0.999)
    ergodic_form: str = "exact"

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.ergodic_form not in ERGODIC_FORMS:
            raise ValueError(f"ergodic_form must be one of {ERGODIC_FORMS}")
        if self.coarse_grid_points < 5:
            raise ValueError("coarse_grid_points must be >= 5")
        lo, hi = self.bounds
        if not 0.0 < lo < hi < 1.0:
            raise ValueError(f"bounds must satisfy 0 < lo < hi < 1, got {self.bounds}")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")


@dataclass(frozen=True)
class OptimizeResult:
    param: float
    value: float
    boundary: bool
    n_evaluations: int
    grid: tuple[float, ...] = ()
    grid_values: tuple[float, ...] = ()


def policy_objective(
    p: SystemParams, kind: str, spec: OptimizeSpec, quad: QuadSpec = QuadSpec()
) -> Callable[[float], float]:
    """The metric being optimised, as a function of the policy parameter."""
    if spec.objective == "min_secrecy_outage":
        return lambda v: analytic.secrecy_outage_total(p, make_policy(kind, v), quad)
    if spec.ergodic_form == "lower_bound":
        return lambda v: analytic.ergodic_lower_bound(p, make_policy(kind, v))
    exact = spec.ergodic_form == "exact"
    return lambda v: analytic.ergodic_rate(p, make_policy(kind, v), exact, quad)


def golden_section_min(f: Callable[[float], float], lo: float, hi: float, tol: float):
    """Minimise ``f`` on [lo, hi] to a bracket width of ``tol``; returns (x, f(x), n_evals)."""
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    n = 2
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        n += 1
    return (x1, f1, n) if f1 <= f2 else (x2, f2, n)


def minimise_on_grid(
    f: Callable[[float], float],
    spec: OptimizeSpec,
    workers: int = 1,
) -> OptimizeResult:
    """Grid scan plus golden refinement of ``f`` (minimisation)."""
    grid = np.linspace(spec.bounds[0], spec.bounds[1], spec.coarse_grid_points)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = np.array(list(ex.map(f, grid)), dtype=float)
    else:
        vals = np.array([f(v) for v in grid], dtype=float)
    # argmin returns the first minimum: ties go to the smaller parameter
    i = int(np.argmin(vals))
    n_evals = grid.size
    best_x, best_f = float(grid[i]), float(vals[i])
    if i == 0 or i == grid.size - 1:
        return OptimizeResult(best_x, best_f, True, n_evals, tuple(grid), tuple(vals))

    x, fx, n = golden_section_min(f, float(grid[i - 1]), float(grid[i + 1]), spec.refine_tol)
    n_evals += n
    if fx < best_f:
        best_x, best_f = x, fx
    return OptimizeResult(best_x, best_f, False, n_evals, tuple(grid), tuple(vals))


def optimize_policy(
    p: SystemParams,
    kind: str,
    spec: OptimizeSpec = OptimizeSpec(),
    quad: QuadSpec = QuadSpec(),
    objective: Callable[[float], float] | None = None,
    workers: int = 1,
) -> OptimizeResult:
    """Optimal beta (``kind='ps'``) or alpha (``kind='ts'``) and the optimal metric value.

    ``objective`` replaces the analytic metric; it is minimised or maximised
    according to ``spec.objective``.
    """
    f = objective if objective is not None else policy_objective(p, kind, spec, quad)
    if spec.objective == "max_ergodic_rate":
        res = minimise_on_grid(lambda v: -f(v), spec, workers)
        return OptimizeResult(
            res.param, -res.value, res.boundary, res.n_evaluations,
            res.grid, tuple(-v for v in res.grid_values),
        )
    return minimise_on_grid(f, spec, workers)
