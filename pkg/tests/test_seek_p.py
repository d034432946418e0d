import random

import pytest
from hypothesis import given, settings, strategies as st

import oracle
from gen import fig3, quotient, random_formula, random_map, random_subgraph, toy_world
from pgplan.labelmap import LabelMap
from pgplan.pgraph import ACTION, OBSERVATION, PGraph, PGraphError, image_graph, sde
from pgplan.planning import Plan, PlanningProblem, is_c_bounded
from pgplan.seek_p import (SearchBudgetExceeded, SearchStats, SeekPConfig, TripleGraph,
                           annotate_triple, check, seek_plan)
from pgplan.stipulation import always_true, parse


def identity(g):
    return LabelMap.identity(g.actions, g.observations)


def two_route_world():
    """From s the robot may take a1 (revealing route) or a2 (hidden route);
    both lead to goal vertices g1 / g2."""
    v = {"s": ACTION, "y1": OBSERVATION, "y2": OBSERVATION, "g1": ACTION, "g2": ACTION}
    e = [("s", "y1", ["a1"]), ("s", "y2", ["a2"]), ("y1", "g1", ["o1"]), ("y2", "g2", ["o1"])]
    return PlanningProblem(PGraph(v, e, ["s"], ["a1", "a2"], ["o1"]), frozenset({"g1", "g2"}))


def random_instance(rng):
    W = toy_world(rng, rng.randint(2, 6))
    goal = frozenset(v for v in W.vertices if rng.random() < 0.4)
    h = random_map(rng, W.actions, W.observations)
    I = image_graph(h, W) if rng.random() < 0.5 else image_graph(h, quotient(rng, W))
    D = W if rng.random() < 0.5 else random_subgraph(rng, W)
    f = random_formula(rng, W.vertices)
    return PlanningProblem(W, goal), D, I, h, f


class TestCheck:
    def test_fig3_plan_keeps_w4_hidden_only_through_a1(self):
        W = fig3()
        prob = PlanningProblem(W, frozenset({"w3", "w4"}))
        h = identity(W)
        via_a1 = PGraph({"p0": ACTION, "p1": OBSERVATION, "p2": ACTION},
                        [("p0", "p1", ["a1"]), ("p1", "p2", ["o1"])], ["p0"], ["a1", "a2"], ["o1"])
        via_a2 = PGraph({"p0": ACTION, "p1": OBSERVATION, "p2": ACTION},
                        [("p0", "p1", ["a2"]), ("p1", "p2", ["o1"])], ["p0"], ["a1", "a2"], ["o1"])
        f = parse("!w4")
        assert check(prob, Plan(via_a1, frozenset({"p2"})), W, W, h, f)
        verdict = check(prob, Plan(via_a2, frozenset({"p2"})), W, W, h, f)
        assert not verdict and verdict.condition == "stipulation"
        assert verdict.execution == ("a2", "o1")

    def test_task_failure_reported_before_stipulation(self):
        prob = two_route_world()
        plan = Plan(PGraph({"p": ACTION}, [], ["p"], ["a1", "a2"], ["o1"]), frozenset({"p"}))
        verdict = check(prob, plan, prob.world, prob.world, identity(prob.world), parse("s"))
        assert not verdict and verdict.condition == "3"

    def test_unknown_symbol_rejected(self):
        prob = two_route_world()
        plan = Plan(prob.world, frozenset({"g1"}))
        with pytest.raises(ValueError):
            check(prob, plan, prob.world, prob.world, identity(prob.world), parse("nope"))


class TestTripleGraph:
    def test_needs_state_determined_world(self):
        W = fig3()
        with pytest.raises(PGraphError):
            TripleGraph(PlanningProblem(W, frozenset()), W, W, identity(W))

    def test_annotation(self):
        prob = two_route_world()
        W = prob.world
        T = TripleGraph(prob, W, W, identity(W))
        marks = annotate_triple(T, prob.goal, parse("!g1"))
        by_world = {t.w: m for t, m in marks.items()}
        assert by_world["g1"] == (True, False)
        assert by_world["g2"] == (True, True)
        assert by_world["s"] == (False, True)
        assert len(T) == 5

    def test_leaving_divulged_plan_empties_d(self):
        prob = two_route_world()
        W = prob.world
        D = PGraph({"d": ACTION, "e": OBSERVATION}, [("d", "e", ["a1"])], ["d"], ["a1", "a2"], ["o1"])
        T = TripleGraph(prob, D, W, identity(W))
        assert any(t.w == "y2" and not t.d for t in T.succ)
        assert any(t.w == "y1" and t.d == {"e"} for t in T.succ)


class TestSeekPlan:
    def test_picks_the_compliant_route(self):
        prob = two_route_world()
        W = prob.world
        plan = seek_plan(prob, W, W, identity(W), parse("!g1"))
        assert plan is not None
        assert check(prob, plan, W, W, identity(W), parse("!g1"))
        assert ("a2",) in {tuple(sorted(labs)) for labs in plan.graph.edges.values()}

    def test_none_when_every_route_reveals(self):
        prob = two_route_world()
        W = prob.world
        assert seek_plan(prob, W, W, identity(W), parse("!g1 & !g2")) is None

    def test_merged_label_hides_route(self):
        prob = two_route_world()
        W = prob.world
        h = LabelMap({"a1": "a", "a2": "a", "o1": "o1"}, W.actions, W.observations)
        f = parse("(g1 | !g2) & (g2 | !g1)")
        assert seek_plan(prob, W, W, identity(W), f) is None
        plan = seek_plan(prob, W, image_graph(h, W), h, f)
        assert plan is not None and check(prob, plan, W, image_graph(h, W), h, f)

    def test_trivial_goal_start(self):
        W = PGraph({"u": ACTION}, [], ["u"], ["a"], [])
        prob = PlanningProblem(W, frozenset({"u"}))
        plan = seek_plan(prob, W, W, identity(W), always_true("u"))
        assert plan is not None and plan.term == plan.graph.initial

    def test_depth_bound(self):
        prob = two_route_world()
        W = prob.world
        assert seek_plan(prob, W, W, identity(W), always_true("s"), SeekPConfig(depth_bound=1)) is None
        assert seek_plan(prob, W, W, identity(W), always_true("s"), SeekPConfig(depth_bound=2))

    def test_budget(self):
        prob = two_route_world()
        W = prob.world
        with pytest.raises(SearchBudgetExceeded) as info:
            seek_plan(prob, W, W, identity(W), always_true("s"), SeekPConfig(budget=1))
        assert info.value.budget == 1 and info.value.stats["nodes_expanded"] == 2

    def test_stats_filled(self):
        prob = two_route_world()
        W = prob.world
        stats = SearchStats()
        seek_plan(prob, W, W, identity(W), always_true("s"), stats=stats)
        assert stats.triples == 5 and stats.nodes_expanded > 0 and stats.elapsed >= 0

    def test_sde_world_from_fig3(self):
        W = sde(fig3())
        goal = frozenset(v for v, sub in W.subsets.items() if sub & {"w3", "w4"})
        prob = PlanningProblem(W, goal)
        f = always_true(next(iter(W.vertices)))
        plan = seek_plan(prob, W, W, identity(W), f)
        assert plan is not None and check(prob, plan, W, W, identity(W), f)
        assert len(plan.graph) == 3


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_agrees_with_oracle(seed):
    rng = random.Random(seed)
    prob, D, I, h, f = random_instance(rng)
    plan = seek_plan(prob, D, I, h, f)
    expected = oracle.seek_p_oracle(prob.world, prob.goal, D, I, dict(h.mapping),
                                    oracle.clauses_of(f))
    assert (plan is not None) == expected
    if plan is not None:
        assert check(prob, plan, D, I, h, f)
        assert oracle.check_oracle(prob.world, prob.goal, plan.graph, plan.term, D, I,
                                   dict(h.mapping), oracle.clauses_of(f))
        parents = set()
        for (_, d) in plan.graph.edges:
            assert d not in parents
            parents.add(d)
        assert is_c_bounded(plan, 2 * len(prob.world))
