"""Command-line front end: ``eval``, ``sweep``, ``validate`` and ``optimize``.

Settings are layered: built-in defaults, then an optional flat ``key = value``
config file (``--config``), then command-line flags. Config keys are the
:class:`RunConfig` field names; ``p_dbm`` is shorthand for setting both
``p_s_dbm`` and ``p_d_dbm``.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 quadrature
did not converge.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Sequence

from ehrelay import __version__, analytic
from ehrelay.montecarlo import SNR_MODES, McConfig, estimate_metrics
from ehrelay.optimize import ERGODIC_FORMS, OBJECTIVES, OptimizeSpec, optimize_policy
from ehrelay.params import (
    Geometry,
    MetricReport,
    SystemParams,
    dbm_to_watts,
    lambda_from_geometry,
    make_policy,
    require_equal_powers,
)
from ehrelay.quadrature import QuadratureError, QuadSpec

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_VARS = ("beta", "alpha", "r_th", "snr_db", "d_sr", "rho", "eta")
POLICIES = ("ps", "ts", "both")
FORMATS = ("csv", "json")
MAX_SWEEP_POINTS = 10_000

# validation tolerances
OUTAGE_ABS_TOL = 0.015
P_POS_ABS_TOL = 0.01
N_SIGMA = 3.0
VALIDATE_GRID = tuple(round(0.1 * i, 12) for i in range(1, 10))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    policy: str = "ps"
    param: float = 0.5
    p_s_dbm: float = 40.0
    p_d_dbm: float = 40.0
    n0_dbm: float = -10.0
    eta: float = 0.7
    theta_h_dbm: float = -30.0
    r_th: float = 0.5
    d_sr: float = 5.0
    d_rd: float = 5.0
    rho: float = 2.7
    total_distance: float = 10.0
    sweep: str | None = None
    start: float | None = None
    stop: float | None = None
    step: float | None = None
    optimize: bool = False
    objective: str = "min_secrecy_outage"
    ergodic_form: str = "exact"
    grid_points: int = 41
    refine_tol: float = 1e-4
    bound_lo: float = 0.001
    bound_hi: float = 0.999
    mc: bool = False
    mc_samples: int = 1_000_000
    seed: int = 0
    snr_mode: str = "exact"
    workers: int = 1
    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    format: str = "csv"
    output: str | None = None
    sidecar: str | None = None
    # test hook: scales eta on the analytic side of `validate` only
    analytic_eta_scale: float = 1.0


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_count(text: str) -> int:
    """Integer that also accepts integral scientific notation such as ``1e6``."""
    try:
        return int(text)
    except ValueError:
        x = float(text)
        if not x.is_integer():
            raise ValueError(f"not an integer: {text!r}") from None
        return int(x)


def _optional(conv: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str):
        return None if text.strip().lower() in ("", "none") else conv(text)

    return parse


_CONVERTERS: dict[str, Callable[[str], Any]] = {}
for _f in fields(RunConfig):
    _t = str(_f.type)
    _base = float if "float" in _t else _parse_count if "int" in _t else _parse_bool if "bool" in _t else str
    _CONVERTERS[_f.name] = _optional(_base) if "None" in _t else _base


def convert_value(key: str, text: str) -> Any:
    if key not in _CONVERTERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return _CONVERTERS[key](text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from None


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    out: dict[str, Any] = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value', got {raw!r}")
        key, text = (s.strip() for s in line.split("=", 1))
        if key == "p_dbm":
            out["p_s_dbm"] = out["p_d_dbm"] = convert_value("p_s_dbm", text)
        else:
            out[key] = convert_value(key, text)
    return out


def resolve_config(file_values: dict[str, Any], flag_values: dict[str, Any]) -> RunConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    merged = asdict(RunConfig())
    merged.update(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    cfg = RunConfig(**merged)
    check_config(cfg)
    return cfg


def check_config(cfg: RunConfig) -> None:
    choices = {
        "policy": POLICIES,
        "objective": OBJECTIVES,
        "ergodic_form": ERGODIC_FORMS,
        "snr_mode": SNR_MODES,
        "format": FORMATS,
    }
    for key, allowed in choices.items():
        if getattr(cfg, key) not in allowed:
            raise ConfigError(f"{key} must be one of {allowed}, got {getattr(cfg, key)!r}")
    if cfg.sweep is not None and cfg.sweep not in SWEEP_VARS:
        raise ConfigError(f"sweep must be one of {SWEEP_VARS}, got {cfg.sweep!r}")
    positive = ("mc_samples", "workers", "abs_tol", "rel_tol", "refine_tol", "total_distance", "analytic_eta_scale")
    for key in positive:
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"{key} must be positive, got {getattr(cfg, key)!r}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    if not 0.0 < cfg.bound_lo < cfg.bound_hi < 1.0:
        raise ConfigError(f"bound_lo/bound_hi must satisfy 0 < lo < hi < 1, got {cfg.bound_lo}, {cfg.bound_hi}")
    if cfg.grid_points < 5:
        raise ConfigError("grid_points must be >= 5")
    if not 0.0 <= cfg.param <= 1.0:
        raise ConfigError(f"param must lie in [0, 1], got {cfg.param}")
    try:
        require_equal_powers(system_params(cfg))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def system_params(cfg: RunConfig) -> SystemParams:
    try:
        geometry = Geometry(cfg.d_sr, cfg.d_rd, cfg.rho)
        lam_sr, lam_rd = lambda_from_geometry(geometry)
        return SystemParams(
            p_s=dbm_to_watts(cfg.p_s_dbm),
            p_d=dbm_to_watts(cfg.p_d_dbm),
            n0=dbm_to_watts(cfg.n0_dbm),
            eta=cfg.eta,
            theta_h=dbm_to_watts(cfg.theta_h_dbm),
            r_th=cfg.r_th,
            lambda_sr=lam_sr,
            lambda_rd=lam_rd,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def sweep_values(cfg: RunConfig) -> list[float]:
    """The arithmetic progression start, start + step, ... up to stop."""
    if cfg.sweep is None:
        raise ConfigError("sweep requires a sweep variable (--var)")
    missing = [k for k in ("start", "stop", "step") if getattr(cfg, k) is None]
    if missing:
        raise ConfigError(f"sweep range needs {', '.join(missing)}")
    start, stop, step = cfg.start, cfg.stop, cfg.step
    if not all(math.isfinite(v) for v in (start, stop, step)):
        raise ConfigError("sweep range must be finite")
    if not step > 0:
        raise ConfigError(f"step must be positive, got {step}")
    if stop < start:
        raise ConfigError(f"stop ({stop}) is below start ({start})")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n > MAX_SWEEP_POINTS:
        raise ConfigError(f"sweep has {n} points; the limit is {MAX_SWEEP_POINTS}")
    return [round(start + i * step, 12) for i in range(n)]


def point_config(cfg: RunConfig, var: str, value: float) -> RunConfig:
    """Config for one sweep point."""
    if var == "beta":
        return replace(cfg, policy="ps", param=value)
    if var == "alpha":
        return replace(cfg, policy="ts", param=value)
    if var == "snr_db":
        p = cfg.n0_dbm + value
        return replace(cfg, p_s_dbm=p, p_d_dbm=p)
    if var == "d_sr":
        d_rd = cfg.total_distance - value
        if not (value > 0 and d_rd > 0):
            raise ConfigError(
                f"d_sr={value} leaves no room for the relay on a {cfg.total_distance} m link"
            )
        return replace(cfg, d_sr=value, d_rd=d_rd)
    return replace(cfg, **{var: value})


def policy_kinds(cfg: RunConfig) -> tuple[str, ...]:
    return ("ps", "ts") if cfg.policy == "both" else (cfg.policy,)


def quad_spec(cfg: RunConfig) -> QuadSpec:
    return QuadSpec(abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol)


def optimize_spec(cfg: RunConfig) -> OptimizeSpec:
    return OptimizeSpec(
        objective=cfg.objective,
        coarse_grid_points=cfg.grid_points,
        refine_tol=cfg.refine_tol,
        bounds=(cfg.bound_lo, cfg.bound_hi),
        ergodic_form=cfg.ergodic_form,
    )


# --- row builders -----------------------------------------------------------
INPUT_COLUMNS = (
    "policy", "param", "p_s_dbm", "p_d_dbm", "n0_dbm", "eta", "theta_h_dbm",
    "r_th", "d_sr", "d_rd", "rho",
)
METRIC_COLUMNS = tuple(f.name for f in fields(MetricReport))
MC_COLUMNS = tuple(
    "mc_" + k for k in (
        "n_samples", "n_active", "p_power_outage", "p_power_outage_se",
        "p_secrecy_outage_cond", "p_secrecy_outage_cond_se",
        "p_secrecy_outage_total", "p_secrecy_outage_total_se",
        "p_pos", "p_pos_se", "ergodic", "ergodic_se",
    )
)
OPTIMIZE_COLUMNS = ("objective", "ergodic_form", "param_star", "value_star", "boundary", "n_evaluations")
VALIDATE_COLUMNS = (
    "policy", "param", "metric", "snr_mode", "analytic", "mc", "mc_se",
    "abs_gap", "tolerance", "verdict",
)


def _inputs(cfg: RunConfig, kind: str, with_param: bool = True) -> dict[str, Any]:
    row = {k: getattr(cfg, k) for k in INPUT_COLUMNS}
    row["policy"] = kind
    if not with_param:
        del row["param"]
    return row


def eval_rows(cfg: RunConfig) -> list[dict[str, Any]]:
    p = system_params(cfg)
    rows = []
    for kind in policy_kinds(cfg):
        policy = make_policy(kind, cfg.param)
        row = _inputs(cfg, kind)
        row.update(analytic.evaluate_policy(p, policy, quad_spec(cfg)).as_dict())
        if cfg.mc:
            est = estimate_metrics(
                p, policy, McConfig(cfg.mc_samples, cfg.seed, cfg.snr_mode, cfg.workers)
            )
            row.update({"mc_" + k: v for k, v in est.as_dict().items()})
        rows.append(row)
    return rows


def optimize_rows(cfg: RunConfig, workers: int = 1) -> list[dict[str, Any]]:
    p = system_params(cfg)
    spec = optimize_spec(cfg)
    rows = []
    for kind in policy_kinds(cfg):
        res = optimize_policy(p, kind, spec, quad_spec(cfg), workers=workers)
        row = _inputs(cfg, kind, with_param=False)
        row.update(
            objective=spec.objective,
            ergodic_form=spec.ergodic_form,
            param_star=res.param,
            value_star=res.value,
            boundary=res.boundary,
            n_evaluations=res.n_evaluations,
        )
        rows.append(row)
    return rows


def sweep_rows(cfg: RunConfig) -> list[dict[str, Any]]:
    var = cfg.sweep
    if cfg.optimize and var in ("beta", "alpha"):
        raise ConfigError(f"cannot optimise over the swept variable {var!r}")
    points = [point_config(cfg, var, v) for v in sweep_values(cfg)]
    for pc in points:
        check_config(pc)

    def run(pc: RunConfig) -> list[dict[str, Any]]:
        rows = optimize_rows(pc) if pc.optimize else eval_rows(replace(pc, workers=1))
        value = pc.param if var in ("beta", "alpha") else (
            pc.p_s_dbm - pc.n0_dbm if var == "snr_db" else getattr(pc, var)
        )
        return [{var: value, **r} for r in rows]

    if cfg.workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(run, points))
    else:
        parts = [run(pc) for pc in points]
    return [r for part in parts for r in part]


def _check(kind, param, metric, mode, a, est, n, tol=None) -> dict[str, Any]:
    """One validation row. Without ``tol`` the test is N_SIGMA standard errors.

    For probabilities the standard error uses the larger of the observed and
    the analytic Bernoulli variance, so an MC count of zero still has a
    meaningful spread.
    """
    se = est.std_error
    if metric != "ergodic":
        se = max(se, math.sqrt(max(a * (1.0 - a), 0.0) / n))
    if tol is None:
        tol = N_SIGMA * se
    gap = abs(a - est.mean)
    return {
        "policy": kind, "param": param, "metric": metric, "snr_mode": mode,
        "analytic": a, "mc": est.mean, "mc_se": se, "abs_gap": gap,
        "tolerance": tol, "verdict": "PASS" if gap <= tol else "FAIL",
    }


def validate_rows(cfg: RunConfig) -> list[dict[str, Any]]:
    """Analytic metrics against exact-SNR and approx-SNR Monte Carlo runs."""
    p = system_params(cfg)
    p_an = p.replace(eta=min(p.eta * cfg.analytic_eta_scale, 1.0))
    quad = quad_spec(cfg)
    if cfg.sweep in ("beta", "alpha"):
        kinds = ("ps",) if cfg.sweep == "beta" else ("ts",)
        grid = tuple(sweep_values(cfg))
    elif cfg.sweep is None:
        kinds, grid = policy_kinds(cfg), VALIDATE_GRID
    else:
        raise ConfigError("validate sweeps only over beta or alpha")

    rows = []
    for kind in kinds:
        for v in grid:
            pol = make_policy(kind, v)
            rep = analytic.evaluate_policy(p_an, pol, quad)
            ex = estimate_metrics(p, pol, McConfig(cfg.mc_samples, cfg.seed, "exact", cfg.workers))
            ap = estimate_metrics(p, pol, McConfig(cfg.mc_samples, cfg.seed, "high_snr_approx", cfg.workers))
            n = ex.n_samples
            rows += [
                _check(kind, v, "p_power_outage", "exact", rep.p_power_outage, ex.p_power_outage, n),
                _check(kind, v, "p_secrecy_outage_total", "exact", rep.p_secrecy_outage_total,
                       ex.p_secrecy_outage_total, n, OUTAGE_ABS_TOL),
                _check(kind, v, "p_secrecy_outage_total", "high_snr_approx", rep.p_secrecy_outage_total,
                       ap.p_secrecy_outage_total, n),
                _check(kind, v, "p_pos", "exact", rep.p_pos_exact, ex.p_pos, n, P_POS_ABS_TOL),
                _check(kind, v, "p_pos", "high_snr_approx", rep.p_pos_approx, ap.p_pos, n),
                _check(kind, v, "ergodic", "exact", rep.ergodic_exact, ex.ergodic, n),
                _check(kind, v, "ergodic", "high_snr_approx", rep.ergodic_approx, ap.ergodic, n),
            ]
    return rows


# --- output -----------------------------------------------------------------
def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the settings that affect results (not output paths or thread count)."""
    d = asdict(cfg)
    for k in ("output", "sidecar", "format", "workers"):
        d.pop(k)
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


def format_cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".9g")
    return str(v)


def render(command: str, cfg: RunConfig, rows: list[dict[str, Any]]) -> str:
    columns = list(rows[0]) if rows else []
    prov = {"tool": f"ehrelay {__version__}", "command": command, "seed": cfg.seed,
            "config_sha256": config_hash(cfg)}
    if cfg.format == "json":
        return json.dumps({"provenance": prov, "columns": columns, "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    for k, v in prov.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_cell(r[c]) for c in columns])
    return buf.getvalue()


def sidecar_path(command: str, cfg: RunConfig) -> Path:
    if cfg.sidecar:
        return Path(cfg.sidecar)
    if cfg.output:
        return Path(cfg.output + ".config.json")
    return Path(f"ehrelay-{command}.config.json")


def write_outputs(command: str, cfg: RunConfig, rows: list[dict[str, Any]], stdout) -> None:
    text = render(command, cfg, rows)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    meta = {"tool": f"ehrelay {__version__}", "command": command,
            "config_sha256": config_hash(cfg), "config": asdict(cfg)}
    sidecar_path(command, cfg).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


# --- argument parsing ---------------------------------------------------------
def _common_args(ap: argparse.ArgumentParser) -> None:
    g = ap.add_argument_group("system")
    g.add_argument("--config", help="flat key = value file; flags override it")
    g.add_argument("--policy", choices=POLICIES)
    g.add_argument("--param", type=float, help="beta (ps) or alpha (ts)")
    g.add_argument("--p-dbm", type=float, dest="p_dbm", help="sets both source and jamming power")
    g.add_argument("--p-s-dbm", type=float)
    g.add_argument("--p-d-dbm", type=float)
    g.add_argument("--n0-dbm", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--theta-h-dbm", type=float)
    g.add_argument("--r-th", type=float)
    g.add_argument("--d-sr", type=float)
    g.add_argument("--d-rd", type=float)
    g.add_argument("--rho", type=float)
    g.add_argument("--total-distance", type=float, help="link length used by d_sr sweeps")
    n = ap.add_argument_group("numerics and output")
    n.add_argument("--abs-tol", type=float)
    n.add_argument("--rel-tol", type=float)
    n.add_argument("--workers", type=int)
    n.add_argument("--format", choices=FORMATS)
    n.add_argument("--output", "-o")
    n.add_argument("--sidecar", help="where to write the resolved config (default: next to output)")


def _mc_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--mc-samples", type=_parse_count)
    ap.add_argument("--seed", type=int)


def _range_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--var", dest="sweep", choices=SWEEP_VARS)
    ap.add_argument("--start", type=float)
    ap.add_argument("--stop", type=float)
    ap.add_argument("--step", type=float)


def _optimize_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--objective", choices=OBJECTIVES)
    ap.add_argument("--ergodic-form", choices=ERGODIC_FORMS)
    ap.add_argument("--grid-points", type=int)
    ap.add_argument("--refine-tol", type=float)
    ap.add_argument("--bound-lo", type=float)
    ap.add_argument("--bound-hi", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ehrelay", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"ehrelay {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="every metric at one operating point")
    _common_args(ev)
    ev.add_argument("--mc", action="store_const", const=True, help="add Monte Carlo columns")
    ev.add_argument("--snr-mode", choices=SNR_MODES)
    _mc_args(ev)

    sw = sub.add_parser("sweep", help="one row per point of a parameter range")
    _common_args(sw)
    _range_args(sw)
    sw.add_argument("--optimize", action="store_const", const=True,
                    help="report the optimal beta/alpha at each point instead")
    _optimize_args(sw)

    va = sub.add_parser("validate", help="analytic metrics against Monte Carlo")
    _common_args(va)
    _range_args(va)
    _mc_args(va)
    va.add_argument("--analytic-eta-scale", type=float, help=argparse.SUPPRESS)

    op = sub.add_parser("optimize", help="optimal beta or alpha")
    _common_args(op)
    _optimize_args(op)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    flags = {k: v for k, v in vars(ns).items() if k in _CONVERTERS}
    if getattr(ns, "p_dbm", None) is not None:
        for k in ("p_s_dbm", "p_d_dbm"):
            flags[k] = ns.p_dbm if flags.get(k) is None else flags[k]
    file_values = read_config_file(ns.config) if ns.config else {}
    return resolve_config(file_values, flags)


COMMANDS = {
    "eval": eval_rows,
    "sweep": sweep_rows,
    "validate": validate_rows,
    "optimize": lambda cfg: optimize_rows(cfg, cfg.workers),
}


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        rows = COMMANDS[ns.command](cfg)
        write_outputs(ns.command, cfg, rows, stdout)
    except ConfigError as exc:
        print(f"ehrelay: config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"ehrelay: numerical integration failed: {exc}", file=stderr)
        return EXIT_NUMERIC
    if ns.command == "validate":
        failed = [r for r in rows if r["verdict"] == "FAIL"]
        if failed:
            print(f"ehrelay: {len(failed)} of {len(rows)} checks FAILED", file=stderr)
            return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
