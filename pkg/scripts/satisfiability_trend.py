"""Satisfiable / unique / R_opt fractions and stable-matching counts over a
(n, couples fraction) grid.  Writes one CSV row per cell.

    python scripts/satisfiability_trend.py --n 200 500 1000 --instances 50 --jobs 4 --out trend.csv
"""

import argparse
import sys
import time

from smpc.bench import Toggles, grid, run_batch
from smpc.satio import SolverConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[200, 500, 1000])
    ap.add_argument("--couples-pct", type=float, nargs="+", default=[0.01, 0.05, 0.10, 0.20])
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--sat-timeout", type=float, default=300.0)
    ap.add_argument("--json", help="also write full per-instance JSON here")
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    toggles = Toggles(run_da=False, solver=SolverConfig(timeout=args.sat_timeout))
    report = run_batch(grid(args.n, args.couples_pct, base_seed=args.seed), args.instances, toggles, jobs=args.jobs)
    text = report.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report.to_json())
    print(f"# {len(report.records)} instances in {time.perf_counter() - t0:.1f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
