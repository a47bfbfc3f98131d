"""Batch experiments: generate, enumerate, classify, run the DA heuristics,
aggregate per (n, couples fraction) cell."""

from __future__ import annotations

import csv
import io
import json
import statistics
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import da
from .algos import enumerate_all
from .gen import GenConfig, generate
from .satio import SolverConfig

DA_ALGOS = ("rp99", "kpr")


@dataclass(frozen=True)
class Toggles:
    run_da: bool = True
    couple_order_seed: int | None = None
    da_cap: int | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)


def instance_seed(base: int, n: int, pct: float, k: int) -> int:
    bp = int(round(pct * 10_000))
    return int(np.random.SeedSequence([base, n, bp, k]).generate_state(1, np.uint64)[0])


def grid(ns, pcts, base_seed: int = 0, **kw) -> list[GenConfig]:
    return [GenConfig(n, p, seed=base_seed, **kw) for n in ns for p in pcts]


def run_instance(cfg: GenConfig, toggles: Toggles) -> dict:
    inst = generate(cfg)
    t0 = time.perf_counter()
    stable = enumerate_all(inst, config=toggles.solver)
    rec = {
        "n": cfg.n,
        "couples_pct": cfg.couples_pct,
        "seed": cfg.seed,
        "complete": stable.complete,
        "n_stable": len(stable),
        "n_rp_opt": stable.n_rp_opt,
        "has_ropt": stable.has_ropt,
        "solves": stable.n_solves,
        "enum_seconds": time.perf_counter() - t0,
        "da": {},
    }
    if toggles.run_da:
        rp = frozenset(stable.rp_opt_matchings())
        for algo in DA_ALGOS:
            order = None
            if algo == "rp99":
                order = da.couple_order(inst, toggles.couple_order_seed)
            out = da.run(algo, inst, cap=toggles.da_cap, order=order)
            rec["da"][algo] = {
                "status": out.status.value,
                "iterations": out.iterations,
                "rp_opt": out.matching in rp,
            }
    return rec


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def aggregate(records: list[dict]) -> dict:
    known = [r for r in records if r["complete"]]
    sat = [r for r in known if r["n_stable"] > 0]
    counts = [r["n_stable"] for r in known]
    hist = Counter(str(r["n_stable"]) if r["complete"] else "unknown" for r in records)
    by_count: dict[str, Counter] = {}
    for r in known:
        by_count.setdefault(str(r["n_stable"]), Counter())[str(r["n_rp_opt"])] += 1
    cell = {
        "instances": len(records),
        "unknown": len(records) - len(known),
        "frac_satisfiable": _ratio(len(sat), len(known)),
        "frac_unique_among_sat": _ratio(sum(r["n_stable"] == 1 for r in sat), len(sat)),
        "frac_ropt_among_sat": _ratio(sum(r["has_ropt"] for r in sat), len(sat)),
        "histogram": dict(sorted(hist.items(), key=lambda kv: (kv[0] == "unknown", int(kv[0]) if kv[0] != "unknown" else 0))),
        "mean_stable_count": statistics.fmean(counts) if counts else None,
        "stdev_stable_count": statistics.stdev(counts) if len(counts) > 1 else 0.0,
        "rpopt_by_stable_count": {k: dict(sorted(v.items())) for k, v in sorted(by_count.items(), key=lambda kv: int(kv[0]))},
        "da": {},
    }
    for algo in DA_ALGOS:
        runs = [(r, r["da"][algo]) for r in sat if algo in r["da"]]
        if not runs:
            continue
        failed = sum(d["status"] != da.DaStatus.MATCHED.value for _, d in runs)
        multi = [d for r, d in runs if r["n_stable"] > 1 and d["status"] == da.DaStatus.MATCHED.value]
        cell["da"][algo] = {
            "frac_rpopt_found_among_multi_solved": _ratio(sum(d["rp_opt"] for d in multi), len(multi)),
            "frac_timeouts": _ratio(failed, len(runs)),
            "multi_solved": len(multi),
            "failed": failed,
        }
    return cell


@dataclass
class BatchReport:
    cells: list[dict]
    records: list[dict]

    def cell(self, n: int, pct: float) -> dict:
        for c in self.cells:
            if c["n"] == n and abs(c["couples_pct"] - pct) < 1e-12:
                return c
        raise KeyError((n, pct))

    def to_json(self) -> str:
        return json.dumps({"cells": self.cells, "instances": self.records}, indent=2)

    def to_csv(self) -> str:
        cols = ["n", "couples_pct", "instances", "unknown", "frac_satisfiable",
                "frac_unique_among_sat", "frac_ropt_among_sat", "mean_stable_count",
                "stdev_stable_count"]
        da_cols = [f"{a}_{k}" for a in DA_ALGOS for k in ("frac_timeouts", "frac_rpopt_found_among_multi_solved")]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols + da_cols + ["histogram"])
        for c in self.cells:
            row = [c[k] for k in cols]
            row += [c["da"].get(a, {}).get(k) for a in DA_ALGOS for k in ("frac_timeouts", "frac_rpopt_found_among_multi_solved")]
            row.append(" ".join(f"{k}:{v}" for k, v in c["histogram"].items()))
            w.writerow(["" if v is None else v for v in row])
        return buf.getvalue()


def _task(args):
    return run_instance(*args)


def run_batch(cells: list[GenConfig], instances_per_cell: int, toggles: Toggles | None = None,
              jobs: int = 1) -> BatchReport:
    """Each cell's ``seed`` is the batch base seed; instance seeds derive from
    it together with n, the couples fraction and the instance index."""
    toggles = toggles or Toggles()
    tasks = []
    for cfg in cells:
        cfg.validate()
        for k in range(instances_per_cell):
            s = instance_seed(cfg.seed, cfg.n, cfg.couples_pct, k)
            tasks.append((GenConfig(cfg.n, cfg.couples_pct, cfg.single_rol_len, cfg.couple_rol_len, cfg.quota, s), toggles))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            records = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        records = [_task(t) for t in tasks]
    out = []
    for i, cfg in enumerate(cells):
        rs = records[i * instances_per_cell : (i + 1) * instances_per_cell]
        out.append({"n": cfg.n, "couples_pct": cfg.couples_pct, **aggregate(rs)})
    return BatchReport(out, records)


def toggles_dict(t: Toggles) -> dict:
    return asdict(t)
