#!/usr/bin/env python3
"""Run every shipped scenario through the CLI.

The basin and sweep scenarios integrate 201x201 grids and take minutes
per case on a single core; pass --fast to skip them (or --grid N to
shrink them).  Outputs land in each scenario's configured directory
(default ./out).
"""

import argparse
import sys
import time
from pathlib import Path

from vaxgame.cli import main as cli_main
from vaxgame.config import load_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fast", action="store_true", help="skip basin/sweep grids")
    ap.add_argument("--grid", type=int, default=None, help="override grid_n")
    ap.add_argument("--out", default=None, help="output directory override")
    args = ap.parse_args()

    failures = 0
    for path in sorted(SCENARIOS.glob("*.toml")):
        sc = load_scenario(path)
        if args.fast and sc.analysis in ("basin", "sweep"):
            print(f"skip {path.name} (--fast)")
            continue
        argv = [sc.analysis, str(path)]
        if args.grid is not None:
            argv += ["--grid", str(args.grid)]
        if args.out is not None:
            argv += ["--out", args.out]
        print(f"== {path.name}")
        t0 = time.time()
        rc = cli_main(argv)
        print(f"   exit {rc} in {time.time() - t0:.1f}s")
        failures += rc != 0
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
