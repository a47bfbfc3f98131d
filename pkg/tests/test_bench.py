import csv
import io
import json
from collections import Counter

import pytest

from smpc.bench import Toggles, aggregate, grid, instance_seed, run_batch
from smpc.gen import GenConfig, generate
from smpc.oracle import brute_force_stable_set

SMALL = dict(single_rol_len=4, couple_rol_len=6)


def oracle_cell(n, pct, count, **kw):
    sets = [
        brute_force_stable_set(generate(GenConfig(n, pct, seed=instance_seed(0, n, pct, k), **kw)))
        for k in range(count)
    ]
    sat = [s for s in sets if s.satisfiable]
    return {
        "frac_satisfiable": len(sat) / len(sets),
        "frac_unique_among_sat": sum(s.has_unique for s in sat) / len(sat) if sat else None,
        "frac_ropt_among_sat": sum(s.has_ropt for s in sat) / len(sat) if sat else None,
        "histogram": dict(Counter(str(len(s)) for s in sets)),
    }


def test_degenerate_grid():
    report = run_batch(grid([4], [0.0], single_rol_len=4), 3)
    cell = report.cell(4, 0.0)
    # frozen from the oracle on these three seeds: stable counts 2, 1, 1
    assert cell["frac_satisfiable"] == 1.0
    assert cell["frac_unique_among_sat"] == pytest.approx(2 / 3)
    assert cell["frac_ropt_among_sat"] == 1.0
    assert cell["histogram"] == {"1": 2, "2": 1}
    assert cell["rpopt_by_stable_count"] == {"1": {"1": 2}, "2": {"1": 1}}


@pytest.mark.parametrize("n,pct", [(4, 0.0), (8, 0.5), (6, 1 / 3)])
def test_small_cells_match_oracle(n, pct):
    report = run_batch(grid([n], [pct], **SMALL), 12)
    cell = report.cell(n, pct)
    expect = oracle_cell(n, pct, 12, **SMALL)
    for key, value in expect.items():
        assert cell[key] == (pytest.approx(value) if isinstance(value, float) else value), key


def test_report_consistency_and_reproducibility():
    cells = grid([30], [0.0, 0.2], **SMALL)
    a = run_batch(cells, 8)
    b = run_batch(cells, 8, jobs=2)
    assert a.cells == b.cells
    strip = lambda recs: [{k: v for k, v in r.items() if k != "enum_seconds"} for r in recs]  # noqa: E731
    assert strip(a.records) == strip(b.records)
    for cell in a.cells:
        assert sum(cell["histogram"].values()) == cell["instances"] == 8
        for key in ("frac_satisfiable", "frac_unique_among_sat", "frac_ropt_among_sat"):
            if cell[key] is not None:
                assert 0.0 <= cell[key] <= 1.0
        if cell["frac_unique_among_sat"] is not None:
            assert cell["frac_ropt_among_sat"] >= cell["frac_unique_among_sat"]
        counted = sum(sum(v.values()) for v in cell["rpopt_by_stable_count"].values())
        assert counted == cell["instances"] - cell["unknown"]
        for stats in cell["da"].values():
            assert 0.0 <= stats["frac_timeouts"] <= 1.0


def test_da_stats_convention():
    # failures count over satisfiable instances; RP_opt hits only over solved multi-matching ones
    recs = [
        {"complete": True, "n_stable": 2, "n_rp_opt": 1, "has_ropt": True,
         "da": {"kpr": {"status": "MATCHED", "rp_opt": True}}},
        {"complete": True, "n_stable": 3, "n_rp_opt": 2, "has_ropt": False,
         "da": {"kpr": {"status": "MATCHED", "rp_opt": False}}},
        {"complete": True, "n_stable": 1, "n_rp_opt": 1, "has_ropt": True,
         "da": {"kpr": {"status": "FAILED_CYCLE", "rp_opt": False}}},
        {"complete": True, "n_stable": 0, "n_rp_opt": 0, "has_ropt": False,
         "da": {"kpr": {"status": "FAILED_CYCLE", "rp_opt": False}}},
    ]
    cell = aggregate(recs)
    assert cell["frac_satisfiable"] == 0.75
    assert cell["da"]["kpr"]["frac_timeouts"] == pytest.approx(1 / 3)
    assert cell["da"]["kpr"]["frac_rpopt_found_among_multi_solved"] == 0.5
    assert cell["mean_stable_count"] == 1.5


def test_outputs():
    report = run_batch(grid([20], [0.0, 0.1], **SMALL), 3, Toggles(run_da=False))
    rows = list(csv.DictReader(io.StringIO(report.to_csv())))
    assert [r["couples_pct"] for r in rows] == ["0.0", "0.1"]
    assert rows[0]["kpr_frac_timeouts"] == ""
    obj = json.loads(report.to_json())
    assert len(obj["cells"]) == 2 and len(obj["instances"]) == 6


def test_instance_seeds_differ_across_cells():
    seeds = {instance_seed(0, n, p, k) for n in (200, 500) for p in (0.01, 0.05) for k in range(5)}
    assert len(seeds) == 20
    assert instance_seed(0, 200, 0.01, 0) == instance_seed(0, 200, 0.01, 0)
