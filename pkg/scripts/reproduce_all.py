#!/usr/bin/env python3
"""Run all eight experiments with canonical settings and write results.

Usage: python scripts/reproduce_all.py [output_dir] [--seed N]

Writes one CSV and one JSON file per experiment into the output directory
(default: results/). Equivalent to invoking `difga run <id>` for every id.
"""

import argparse
import sys
import time

from difga.cli import main as difga_main
from difga.experiments import EXPERIMENT_IDS


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output_dir", nargs="?", default="results")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    worst = 0
    for experiment_id in EXPERIMENT_IDS:
        argv = ["run", experiment_id, "--out", args.output_dir]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        started = time.perf_counter()
        code = difga_main(argv)
        print(f"{experiment_id}: exit {code} ({time.perf_counter() - started:.1f}s)")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
