import pytest

from corpus import small_instance
from instances import empty, truthful, truthful_matching
from smpc.model import Instance, Matching
from smpc.oracle import OracleTooLarge, all_stable_matchings, brute_force_stable_set, naive_dominates, search_space


def test_fig_single_table_matching():
    inst = truthful()
    st = brute_force_stable_set(inst)
    assert st.matchings == [truthful_matching(inst)]
    assert st.rp_opt == [True]


def test_empty_instance():
    st = brute_force_stable_set(empty())
    assert st.matchings == [Matching(())]


def test_guard():
    inst = small_instance(11, dense=True)
    assert search_space(inst) > 1
    with pytest.raises(OracleTooLarge):
        all_stable_matchings(inst, guard=1)


def test_counts_only_whole_couple_entries():
    # the couple can only sit at (p, q) or nowhere; (q, p) is not on its list
    inst = Instance.from_names(
        {"p": 1, "q": 1},
        {},
        {("x", "y"): [("p", "q")]},
        {"p": ["x", "y"], "q": ["x", "y"]},
    )
    assert search_space(inst) == 2
    assert all_stable_matchings(inst) == [Matching((0, 1))]


def test_naive_dominance():
    inst = Instance.from_names({"a": 1, "b": 1}, {"x": ["a", "b"]}, {}, {"a": ["x"], "b": ["x"]})
    first, second = Matching((0,)), Matching((1,))
    assert naive_dominates(inst, first, second)
    assert not naive_dominates(inst, second, first)
    assert not naive_dominates(inst, first, first)
