"""Analytic vs Monte Carlo check over the default beta and alpha grids.

Thin wrapper around ``ehrelay validate`` that runs both policies and exits
nonzero if any comparison fails.

    python scripts/validate_grid.py --samples 1e6 --seed 0
"""

import argparse
import sys

from ehrelay.cli import main as cli

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", default="1e6")
    ap.add_argument("--seed", default="0")
    ap.add_argument("--r-th", default="0.5")
    ap.add_argument("-o", "--output", default=None)
    args = ap.parse_args()
    argv = ["validate", "--policy", "both", "--mc-samples", args.samples, "--seed", args.seed, "--r-th", args.r_th]
    if args.output:
        argv += ["-o", args.output]
    sys.exit(cli(argv))
