import sys

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import corpus, small_instance
from instances import misreport_matching, misreported, truthful, truthful_matching
from smpc.algos import (
    SolverFailure,
    StableSet,
    build_pareto_graph,
    classify,
    enumerate_all,
    pareto_chain,
    pareto_improve,
)
from smpc.model import Instance, Matching, dominates, is_stable, preprocess, resident_ranks, weakly_dominates
from smpc.oracle import brute_force_stable_set, naive_dominates
from smpc.satio import SolverConfig

MULTI = [inst for inst in corpus(200) if len(brute_force_stable_set(inst)) > 1]


def two_by_two() -> Instance:
    return Instance.from_names(
        {"a": 1, "b": 1},
        {"x": ["a", "b"], "y": ["b", "a"]},
        {},
        {"a": ["y", "x"], "b": ["x", "y"]},
    )


def test_multi_corpus_is_not_empty():
    assert len(MULTI) >= 10


def test_fig_truthful_unique():
    inst = truthful()
    st_ = enumerate_all(inst)
    assert st_.matchings == [truthful_matching(inst)]
    assert st_.complete and st_.has_unique and st_.has_ropt
    assert st_.the_ropt == truthful_matching(inst)


def test_fig_misreport_unique():
    inst = misreported()
    st_ = enumerate_all(inst)
    assert st_.matchings == [misreport_matching(inst)]


def test_two_stable_matchings_one_ropt():
    inst = two_by_two()
    st_ = enumerate_all(inst)
    assert len(st_) == 2 and st_.n_rp_opt == 1
    assert st_.the_ropt == Matching.from_names(inst, {"x": "a", "y": "b"})


def test_external_backend_same_set():
    ext = SolverConfig(backend="external")
    for inst in MULTI[:5]:
        assert enumerate_all(inst, config=ext).as_set() == enumerate_all(inst).as_set()


def test_limit_marks_incomplete():
    inst = two_by_two()
    st_ = enumerate_all(inst, limit=1)
    assert len(st_) == 1 and not st_.complete


def test_unsat_instance_is_complete_and_empty():
    unsat = [inst for inst in corpus(200) if not brute_force_stable_set(inst).satisfiable]
    assert unsat
    st_ = enumerate_all(unsat[0])
    assert st_.complete and not st_.satisfiable and st_.the_ropt is None


def test_classify_flags():
    inst = two_by_two()
    good = Matching.from_names(inst, {"x": "a", "y": "b"})
    bad = Matching.from_names(inst, {"x": "b", "y": "a"})
    st_ = classify(StableSet([bad, good]), inst)
    assert st_.rp_opt == [False, True]
    assert st_.rp_opt_matchings() == [good]


def test_unknown_stops_enumeration(tmp_path):
    script = tmp_path / "mute.py"
    script.write_text("print('c no answer')\n")
    config = SolverConfig(backend="external", command=f"{sys.executable} {script}")
    st_ = enumerate_all(two_by_two(), config=config)
    assert not st_.complete and len(st_) == 0
    with pytest.raises(SolverFailure):
        pareto_chain(two_by_two(), Matching.from_names(two_by_two(), {"x": "b", "y": "a"}), config)


# -- improvement --------------------------------------------------------------------


def test_pareto_rejects_unstable_start():
    inst = truthful()
    with pytest.raises(ValueError):
        pareto_improve(inst, Matching.unmatched(inst))


def test_pareto_two_by_two():
    inst = two_by_two()
    bad = Matching.from_names(inst, {"x": "b", "y": "a"})
    chain = pareto_chain(inst, bad)
    assert chain == [bad, Matching.from_names(inst, {"x": "a", "y": "b"})]


@pytest.mark.parametrize("incremental", [False, True])
def test_pareto_reaches_undominated(incremental):
    for inst in MULTI[:12]:
        oracle = brute_force_stable_set(inst)
        p = preprocess(inst)
        for mu in oracle.matchings:
            chain = pareto_chain(inst, mu, incremental=incremental)
            for prev, nxt in zip(chain, chain[1:]):
                assert is_stable(nxt, p) and dominates(nxt, prev, p)
            top = chain[-1]
            assert weakly_dominates(top, mu, p)
            assert not any(naive_dominates(inst, o, top) for o in oracle.matchings)


# -- graph --------------------------------------------------------------------------


def reference_reduction(stable: StableSet, inst: Instance) -> set[tuple[int, int]]:
    g = nx.DiGraph()
    g.add_nodes_from(range(len(stable)))
    ms = stable.matchings
    for a, mu in enumerate(ms):
        for b, nu in enumerate(ms):
            if naive_dominates(inst, nu, mu):
                g.add_edge(a, b)
    return set(nx.transitive_reduction(g).edges())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_graph_matches_networkx_reduction(seed):
    inst = small_instance(seed, max_doctors=6, dense=True)
    stable = enumerate_all(inst)
    graph = build_pareto_graph(stable, inst)
    assert {(a, b) for a, b, *_ in graph.edges} == reference_reduction(stable, preprocess(inst))


def test_graph_edge_labels_and_dot():
    inst = two_by_two()
    stable = enumerate_all(inst)
    graph = build_pareto_graph(stable, inst)
    good = stable.the_ropt
    g, b = stable.matchings.index(good), 1 - stable.matchings.index(good)
    assert graph.edges == [(b, g, 1, 0)]
    assert graph.averages[g] == (0.0, 0.0) and graph.averages[b] == (1.0, 0.0)
    assert graph.components() == [{0, 1}]
    dot = graph.to_dot(highlight=good)
    assert dot.startswith("digraph")
    assert f"n{b} -> n{g}" in dot and 'label="(1, 0)"' in dot
    node = next(line for line in dot.splitlines() if line.strip().startswith(f"n{g} ["))
    assert "shape=box" in node and "peripheries=2" in node


def test_graph_labels_are_largest_rank_gain():
    for inst in MULTI[:15]:
        p = preprocess(inst)
        stable = enumerate_all(inst)
        graph = build_pareto_graph(stable, inst)
        for a, b, gs, gc in graph.edges:
            (sa, ca), (sb, cb) = resident_ranks(stable.matchings[a], p), resident_ranks(stable.matchings[b], p)
            assert gs == max((x - y for x, y in zip(sa, sb)), default=0)
            assert gc == max((x - y for x, y in zip(ca, cb)), default=0)
            assert gs > 0 or gc > 0
