"""Compare RP99 and KPR against full enumeration: failure rate among
satisfiable instances and how often a solved run lands on a resident
Pareto optimal matching when there is a choice.

    python scripts/da_table.py --n 200 --instances 50
"""

import argparse
import time

from smpc.bench import DA_ALGOS, Toggles, grid, run_batch


def fmt(x):
    return "   n/a" if x is None else f"{100 * x:6.2f}"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--couples-pct", type=float, nargs="+", default=[0.01, 0.05, 0.10, 0.20])
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--couple-order", type=int, help="seed for shuffling RP99's couple insertion order")
    ap.add_argument("--da-cap", type=int)
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    toggles = Toggles(couple_order_seed=args.couple_order, da_cap=args.da_cap)
    report = run_batch(grid([args.n], args.couples_pct, base_seed=args.seed), args.instances, toggles, jobs=args.jobs)
    head = "  x%  " + "".join(f"| {a:>5} fail% {a:>5} rpopt% " for a in DA_ALGOS)
    print(head)
    print("-" * len(head))
    for cell in report.cells:
        row = f"{100 * cell['couples_pct']:5.1f} "
        for a in DA_ALGOS:
            s = cell["da"].get(a, {})
            row += f"|      {fmt(s.get('frac_timeouts'))}       {fmt(s.get('frac_rpopt_found_among_multi_solved'))} "
        print(row)
    print(f"# {len(report.records)} instances, {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
