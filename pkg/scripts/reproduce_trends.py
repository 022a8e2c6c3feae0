"""Regenerate the trend sweeps (optimal outage / ergodic rate vs a system variable).

Each sweep is one ``ehrelay sweep`` run, with ``--optimize`` everywhere except
the raw beta sweep. CSVs land in the output directory, one per trend, with
config sidecars next to them.

    python scripts/reproduce_trends.py --out results/
"""

import argparse
import sys
from pathlib import Path

from ehrelay.cli import main as cli

SWEEPS = {
    "beta": ["--var", "beta", "--start", "0.05", "--stop", "0.95", "--step", "0.05", "--r-th", "0.5"],
    "r_th": ["--policy", "both", "--optimize", "--var", "r_th", "--start", "0.1", "--stop", "2", "--step", "0.1"],
    "snr_outage": ["--policy", "both", "--optimize", "--var", "snr_db", "--start", "10", "--stop", "60", "--step", "5"],
    "snr_ergodic": ["--policy", "both", "--optimize", "--objective", "max_ergodic_rate",
                    "--var", "snr_db", "--start", "10", "--stop", "60", "--step", "5"],
    "d_sr": ["--policy", "both", "--optimize", "--var", "d_sr", "--start", "1", "--stop", "9", "--step", "1"],
    "rho": ["--policy", "both", "--optimize", "--var", "rho", "--start", "2", "--stop", "4", "--step", "0.25"],
    "eta": ["--policy", "both", "--optimize", "--objective", "max_ergodic_rate",
            "--var", "eta", "--start", "0.1", "--stop", "1", "--step", "0.1"],
}


def run(out: Path, names, workers: int) -> int:
    out.mkdir(parents=True, exist_ok=True)
    status = 0
    for name in names:
        path = out / f"{name}.csv"
        rc = cli(["sweep", *SWEEPS[name], "--workers", str(workers), "-o", str(path)])
        print(f"{name:12s} -> {path} (exit {rc})")
        status = max(status, rc)
    return status


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--only", nargs="*", choices=sorted(SWEEPS), default=list(SWEEPS))
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    sys.exit(run(args.out, args.only, args.workers))
