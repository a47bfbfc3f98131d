"""Acceptance criteria, one test each.  Run alone with

    pytest tests/test_acceptance.py -v

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import functools
import time

from acceptance_log import criterion
from corpus import corpus
from instances import misreport_matching, misreported, truthful
from smpc import da
from smpc.algos import enumerate_all, pareto_improve
from smpc.bench import grid, instance_seed, run_batch
from smpc.encode import decode, encode, encode_instance
from smpc.gen import GenConfig, generate
from smpc.model import Matching, is_stable, preprocess, weakly_dominates
from smpc.oracle import brute_force_stable_set, naive_dominates
from smpc.satio import Session, SolverConfig, Status, solve_cnf

CORPUS_SIZE = 500
TREND_PCTS = [0.01, 0.05, 0.10, 0.20]
CELL = 50
N = 200


@functools.cache
def corpus_results():
    t0 = time.perf_counter()
    out = []
    for inst in corpus(CORPUS_SIZE):
        out.append((inst, enumerate_all(inst), brute_force_stable_set(inst)))
    return out, time.perf_counter() - t0


@functools.cache
def trend_report():
    return run_batch(grid([N], TREND_PCTS), CELL)


def names(inst, mu):
    return inst.describe(mu)


@criterion(1, "truthful example has exactly the table matching")
def test_c01_truthful_example():
    t0 = time.perf_counter()
    inst = truthful()
    st = enumerate_all(inst)
    elapsed = time.perf_counter() - t0
    assert st.complete and len(st) == 1
    assert names(inst, st.matchings[0]) == {"r0": "c", "r1": "b", "r2": "e", "r3": "a", "r4": "d"}
    assert elapsed < 1.0, elapsed
    return f"1 matching in {elapsed * 1000:.0f} ms"


@criterion(2, "misreported example has the table matching, unstable under truth")
def test_c02_misreport_example():
    t0 = time.perf_counter()
    lie = misreported()
    st = enumerate_all(lie)
    assert st.complete and len(st) == 1
    mu = st.matchings[0]
    assert names(lie, mu) == {"r0": "b", "r1": "a", "r2": "d", "r3": "c", "r4": "e"}
    assert mu == misreport_matching(lie)
    truth = truthful()
    assert not is_stable(Matching(mu.assignment), truth)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, elapsed
    return f"1 matching, unstable under truthful lists, {elapsed * 1000:.0f} ms"


@criterion(3, "SAT enumeration equals brute force on the small corpus")
def test_c03_oracle_equivalence():
    results, elapsed = corpus_results()
    assert len(results) >= 500
    bad = []
    for k, (inst, sat, brute) in enumerate(results):
        assert inst.n_doctors <= 8 and len(inst.couples) <= 2
        same = (
            sat.complete
            and sat.matchings == brute.matchings
            and len(sat) == len(brute)
            and sat.rp_opt == brute.rp_opt
            and sat.has_ropt == brute.has_ropt
        )
        if not same:
            bad.append(k)
    assert not bad, f"mismatches at corpus indices {bad[:10]}"
    assert elapsed < 300, elapsed
    multi = sum(len(s) > 1 for _, s, _ in results)
    unsat = sum(not s.satisfiable for _, s, _ in results)
    return f"{len(results)} instances ({multi} with several matchings, {unsat} with none), 0 mismatches, {elapsed:.1f}s total"


@criterion(4, "Pareto improvement lands on a stable undominated matching")
def test_c04_pareto_improvement():
    results, _ = corpus_results()
    checked = moved = 0
    for inst, _, brute in results:
        p = preprocess(inst)
        for mu in brute.matchings:
            top = pareto_improve(inst, mu)
            assert is_stable(top, p)
            assert weakly_dominates(top, mu, p)
            assert not any(naive_dominates(inst, o, top) for o in brute.matchings)
            checked += 1
            moved += top != mu
    return f"{checked} starting matchings, {moved} improved"


@criterion(5, "deferred acceptance results are stable; couple-free runs give R_opt")
def test_c05_da_soundness():
    matched = total = 0
    for pct in TREND_PCTS:
        for k in range(CELL):
            inst = generate(GenConfig(N, pct, seed=instance_seed(0, N, pct, k)))
            for algo in ("rp99", "kpr"):
                out = da.run(algo, inst)
                total += 1
                if out.matched:
                    matched += 1
                    assert is_stable(out.matching, inst)
    free = 0
    for k in range(CELL):
        inst = generate(GenConfig(N, 0.0, seed=instance_seed(0, N, 0.0, k)))
        best = enumerate_all(inst).the_ropt
        assert best is not None
        assert da.run_rp99(inst).matching == best
        assert da.run_kpr(inst).matching == best
        free += 1
    assert total // 2 >= 200
    return f"{matched}/{total} runs matched, all stable; {free} couple-free instances equal R_opt"


@criterion(6, "satisfiable fraction falls with the share of couples")
def test_c06_trend():
    report = trend_report()
    fracs = [report.cell(N, p)["frac_satisfiable"] for p in TREND_PCTS]
    rises = [b - a for a, b in zip(fracs, fracs[1:]) if b > a]
    assert len(rises) <= 1 and all(r <= 0.05 for r in rises), fracs
    assert fracs[0] >= 0.90, fracs
    return "x=" + ", ".join(f"{p:.0%}:{f:.2f}" for p, f in zip(TREND_PCTS, fracs))


@criterion(7, "R_opt share is at least the unique share in every cell")
def test_c07_ropt_vs_unique():
    report = trend_report()
    pairs = []
    for cell in report.cells:
        u, r = cell["frac_unique_among_sat"], cell["frac_ropt_among_sat"]
        assert r >= u, cell
        pairs.append(f"{cell['couples_pct']:.0%}:{r:.2f}>={u:.2f}")
    return ", ".join(pairs)


@criterion(8, "RP99 fails more often than KPR at 20% couples")
def test_c08_da_failures():
    cell = trend_report().cell(N, 0.20)
    rp, kpr = cell["da"]["rp99"]["frac_timeouts"], cell["da"]["kpr"]["frac_timeouts"]
    assert rp > kpr or (rp < 0.02 and kpr < 0.02), (rp, kpr)
    return f"RP99 {rp:.2%} vs KPR {kpr:.2%} of satisfiable instances"


@criterion(9, "counting variables agree with recomputed fills")
def test_c09_counting_audit():
    results, _ = corpus_results()
    audited = 0
    for inst, _, _ in results:
        if audited >= 100:
            break
        p = preprocess(inst)
        cnf, reg = encode(p)
        with Session(cnf, SolverConfig(backend="pysat")) as s:
            res = s.solve()
        if not res.sat:
            continue
        true = {v for v in res.literals() if v > 0}
        mu = decode(res.literals(), reg)
        for (prog, i, fill), v in reg.m_p.items():
            actual = sum(1 for d in p.program_rols[prog][: i + 1] if mu[d] == prog)
            assert (v in true) == (actual == fill), (prog, i, fill)
        for (c, i), v in reg.m_c.items():
            assert (v in true) == (p.rank_couple(c, mu.pair(p.couples[c])) <= i), (c, i)
        audited += 1
    assert audited == 100
    return f"{audited} models audited"


@criterion(10, "n=1000, 10% couples: encode and first solve with the external solver")
def test_c10_performance():
    inst = generate(GenConfig(1000, 0.10, seed=instance_seed(0, 1000, 0.10, 0)))
    t0 = time.perf_counter()
    cnf, _ = encode_instance(inst)
    res = solve_cnf(cnf, SolverConfig(backend="external", timeout=60))
    elapsed = time.perf_counter() - t0
    assert res.status is not Status.UNKNOWN
    assert elapsed < 60, elapsed
    return f"{cnf.n_vars} vars, {len(cnf.clauses)} clauses, {res.status.value} in {elapsed:.1f}s"


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
