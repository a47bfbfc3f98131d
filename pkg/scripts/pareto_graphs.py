"""Write Pareto improvement graphs (DOT) for generated markets that have
several stable matchings, and report how many basis moves each has.

    python scripts/pareto_graphs.py --n 200 --couples-pct 0.05 --instances 50 --outdir graphs
"""

import argparse
from pathlib import Path

from smpc import da
from smpc.algos import build_pareto_graph, enumerate_all
from smpc.bench import instance_seed
from smpc.gen import GenConfig, generate
from smpc.model import preprocess


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--couples-pct", type=float, default=0.05)
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-stable", type=int, default=2)
    ap.add_argument("--outdir", default="graphs")
    args = ap.parse_args(argv)

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    edges = []
    for k in range(args.instances):
        seed = instance_seed(args.seed, args.n, args.couples_pct, k)
        inst = preprocess(generate(GenConfig(args.n, args.couples_pct, seed=seed)))
        stable = enumerate_all(inst)
        if len(stable) < args.min_stable:
            continue
        graph = build_pareto_graph(stable, inst)
        mark = da.run_kpr(inst).matching
        (out / f"n{args.n}_x{args.couples_pct:g}_{k}.dot").write_text(graph.to_dot(mark))
        edges.append(len(graph.edges))
        print(f"instance {k}: {len(stable)} stable, {stable.n_rp_opt} RP-optimal, {len(graph.edges)} moves")
    if edges:
        print(f"# {len(edges)} graphs, {sum(edges) / len(edges):.2f} moves per graph")


if __name__ == "__main__":
    main()
