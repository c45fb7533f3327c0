#!/usr/bin/env python3
"""Run every registered experiment with its default configuration and print a
summary verdict table.  Reports and CSV tables land under results/<name>/.

    python scripts/run_all_experiments.py [--seed N] [--workers K]
"""

import argparse
import sys
import time

from myproc.cli import main as cli_main
from myproc.experiments import EXPERIMENTS


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    summary = []
    for name in sorted(EXPERIMENTS):
        argv = ["run", name]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        if args.workers is not None:
            argv += ["--workers", str(args.workers)]
        t0 = time.time()
        rc = cli_main(argv)
        summary.append((name, rc, time.time() - t0))

    print("\n== summary ==")
    for name, rc, dt in summary:
        print(f"{'PASS' if rc == 0 else 'FAIL':4s}  {name:20s}  {dt:8.1f} s")
    return 0 if all(rc == 0 for _, rc, _ in summary) else 1


if __name__ == "__main__":
    sys.exit(main())
