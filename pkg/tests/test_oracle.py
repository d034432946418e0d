"""Sanity checks on the brute-force references, against hand-derived values."""
import pytest

import oracle
from gen import fig3
from pgplan.pgraph import ACTION, OBSERVATION, PGraph

IDENT = {"a1": "a1", "a2": "a2", "o1": "o1"}


def test_fig3_executions():
    W = fig3()
    assert oracle.language(W, 2) == {(), ("a1",), ("a2",), ("a1", "o1"), ("a2", "o1")}
    assert oracle.reaching(W, "w3", 6) == {("a1", "o1"), ("a2", "o1")}
    assert oracle.exact_reach(W, {"w3"}, 6) == {("a1", "o1")}
    assert oracle.exact_reach(W, {"w3", "w4"}, 6) == {("a2", "o1")}
    assert oracle.exact_reach(W, {"w4"}, 6) == set()
    assert oracle.reached(W, ("a2", "o1")) == {"w3", "w4"}
    assert oracle.transitions_to(W, "v0", ("a2", "o1"), "w4")
    assert oracle.longest_path(W) == 3


def test_fig3_beliefs():
    W = fig3()
    assert oracle.belief_bruteforce(W, W, W, IDENT, {"w3"}) == {"w3"}
    assert oracle.belief_bruteforce(W, W, W, IDENT, {"w3", "w4"}) == {"w3", "w4"}
    assert oracle.belief_bruteforce(W, W, W, IDENT, set()) == frozenset()


def test_merged_map_blurs_branches():
    W = fig3()
    h = {"a1": "a", "a2": "a", "o1": "o1"}
    I = oracle.image_graph(W, h)
    # after a·o1 the observer cannot tell the two action branches apart
    B = oracle.reached(I, ("a", "o1"))
    assert oracle.belief_bruteforce(I, W, W, h, B) == {"w3", "w4"}


def test_truth():
    clauses = [[("a", False), ("b", True)], [("c", False)]]
    assert oracle.truth(clauses, {"a", "c"})
    assert not oracle.truth(clauses, {"b", "c"})
    assert not oracle.truth(clauses, {"a"})


def test_partitions_and_maps():
    assert len(list(oracle.set_partitions("abcd"))) == 15
    assert len(list(oracle.all_maps(["a1", "a2"], ["o1", "o2", "o3"]))) == 2 * 5


def route_world():
    v = {"s": ACTION, "y1": OBSERVATION, "y2": OBSERVATION, "g1": ACTION, "g2": ACTION}
    e = {("s", "y1"): {"a1"}, ("s", "y2"): {"a2"}, ("y1", "g1"): {"o1"}, ("y2", "g2"): {"o1"}}
    return PGraph(v, [(s, d, sorted(l)) for (s, d), l in e.items()], ["s"],
                  ["a1", "a2"], ["o1"])


def test_seek_p_oracle_small():
    W = route_world()
    goal = {"g1", "g2"}
    assert oracle.seek_p_oracle(W, goal, W, W, IDENT, [[("g1", True)]])
    assert not oracle.seek_p_oracle(W, goal, W, W, IDENT, [[("g1", True)], [("g2", True)]])


def test_check_oracle_small():
    W = route_world()
    plan = PGraph({"p": ACTION, "q": OBSERVATION, "r": ACTION},
                  [("p", "q", ["a2"]), ("q", "r", ["o1"])], ["p"], ["a1", "a2"], ["o1"])
    goal = {"g1", "g2"}
    assert oracle.check_oracle(W, goal, plan, {"r"}, W, W, IDENT, [[("g1", True)]])
    assert not oracle.check_oracle(W, goal, plan, {"r"}, W, W, IDENT, [[("g2", True)]])
    assert not oracle.check_oracle(W, goal, plan, {"p"}, W, W, IDENT, [[("g1", True)]])


def test_seek_plm_oracle_small():
    W = PGraph({"y": OBSERVATION, "g1": ACTION, "g2": ACTION},
               [("y", "g1", ["o1"]), ("y", "g2", ["o2"])], ["y"], ["a"], ["o1", "o2"])
    together = [[("g1", False), ("g2", True)], [("g2", False), ("g1", True)]]
    assert oracle.seek_plm_oracle(W, {"g1", "g2"}, together)
    assert not oracle.seek_plm_oracle(W, {"g1", "g2"}, [[("g1", True)]])


def test_refuses_cycles_and_large_instances():
    cyc = PGraph({"u": ACTION, "y": OBSERVATION}, [("u", "y", ["a"]), ("y", "u", ["o"])],
                 ["u"], ["a"], ["o"])
    with pytest.raises(oracle.BudgetRefused):
        oracle.longest_path(cyc)
    big = PGraph({f"v{i}": ACTION for i in range(oracle.MAX_VERTICES * 4 + 1)}, [], ["v0"],
                 ["a"], [])
    with pytest.raises(oracle.BudgetRefused):
        oracle.belief_bruteforce(big, big, big, {"a": "a"}, {"v0"})
