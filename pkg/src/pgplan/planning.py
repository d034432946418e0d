"""Planning problems, plans and the plan-solves-problem verifier."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .pgraph import ACTION, OBSERVATION, PGraph, PGraphError, dumps, loads, validate


@dataclass(frozen=True)
class PlanningProblem:
    world: PGraph
    goal: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "goal", frozenset(self.goal))
        unknown = self.goal - set(self.world.vertices)
        if unknown:
            raise PGraphError(f"goal vertices not in the world: {sorted(unknown)}")

    def to_json(self) -> str:
        return dumps(self.world, goal=sorted(self.goal))

    @classmethod
    def from_json(cls, text: str) -> PlanningProblem:
        graph, extra = loads(text, extra_keys=("goal",))
        if "goal" not in extra:
            raise PGraphError("problem document needs a 'goal' list")
        return cls(graph, frozenset(extra["goal"]))


@dataclass(frozen=True)
class Plan:
    graph: PGraph
    term: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "term", frozenset(self.term))
        unknown = self.term - set(self.graph.vertices)
        if unknown:
            raise PGraphError(f"termination vertices not in the plan: {sorted(unknown)}")

    def to_json(self) -> str:
        return dumps(self.graph, term=sorted(self.term))

    @classmethod
    def from_json(cls, text: str) -> Plan:
        graph, extra = loads(text, extra_keys=("term",))
        if "term" not in extra:
            raise PGraphError("plan document needs a 'term' list")
        return cls(graph, frozenset(extra["term"]))


@dataclass
class Verdict:
    """Outcome of a verification.  Truthy iff ``ok``.

    ``condition`` names the first violated requirement, ``witness`` holds the
    offending (plan vertex, world vertex) pair and ``execution`` a joint
    execution reaching it.
    """

    ok: bool
    condition: str | None = None
    message: str = ""
    witness: tuple[str, str] | None = None
    execution: tuple[str, ...] | None = None
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def joint_states(plan: Plan, world: PGraph):
    """Breadth-first traversal of the reachable plan x world pairs.

    Yields ``(pair, execution, successors)``; pairs whose plan vertex is in
    the termination region get no successors.
    """
    p, w = plan.graph, world
    if p.initial_kind() != w.initial_kind():
        raise PGraphError("plan and world must start at vertices of the same kind")
    start = [(a, b) for a in sorted(p.initial) for b in sorted(w.initial)]
    seen = {pair: () for pair in start}
    queue = deque(start)
    while queue:
        pair = queue.popleft()
        a, b = pair
        succ = []
        if a not in plan.term:
            out_p, out_w = p.out(a), w.out(b)
            for lab in sorted(out_p.keys() & out_w.keys()):
                for ta in sorted(out_p[lab]):
                    for tb in sorted(out_w[lab]):
                        succ.append((lab, (ta, tb)))
                        if (ta, tb) not in seen:
                            seen[(ta, tb)] = seen[pair] + (lab,)
                            queue.append((ta, tb))
        yield pair, seen[pair], succ


def check_solves(plan: Plan, problem: PlanningProblem) -> Verdict:
    """Whether ``plan`` solves ``problem``.

    Over the reachable joint states (plan execution halts on entering the
    termination region): plan actions must be available in the world, world
    observations must be handled by the plan, termination only at goals,
    termination reachable from every non-terminated state, and no cycle
    before termination.
    """
    for g, name in ((plan.graph, "plan"), (problem.world, "world")):
        problems = validate(g)
        if problems:
            raise PGraphError(f"{name} graph is malformed: {problems[0]}")
    p, w = plan.graph, problem.world
    succ: dict[tuple[str, str], list[tuple[str, str]]] = {}
    paths: dict[tuple[str, str], tuple[str, ...]] = {}
    for pair, path, nexts in joint_states(plan, w):
        a, b = pair
        paths[pair] = path
        succ[pair] = [t for _, t in nexts]
        if a in plan.term:
            if b not in problem.goal:
                return Verdict(False, "3", f"plan terminates at {a} while the world is at "
                               f"non-goal {b}", pair, path)
            continue
        kind = p.vertices[a]
        if kind == ACTION:
            missing = sorted(p.labels_from(a) - w.labels_from(b))
            if missing:
                return Verdict(False, "1", f"plan action {missing[0]!r} at {a} is not "
                               f"available at world vertex {b}", pair, path)
        elif kind == OBSERVATION:
            missing = sorted(w.labels_from(b) - p.labels_from(a))
            if missing:
                return Verdict(False, "2", f"world observation {missing[0]!r} at {b} is "
                               f"not handled at plan vertex {a}", pair, path)
    # liveness: every non-terminated pair can still reach termination
    pred: dict[tuple[str, str], list[tuple[str, str]]] = {s: [] for s in succ}
    for s, ts in succ.items():
        for t in ts:
            pred[t].append(s)
    live = {s for s in succ if s[0] in plan.term}
    queue = deque(live)
    while queue:
        t = queue.popleft()
        for s in pred[t]:
            if s not in live:
                live.add(s)
                queue.append(s)
    for pair in paths:
        if pair not in live:
            return Verdict(False, "4", f"no continuation from {pair} reaches termination",
                           pair, paths[pair])
    cycle = _find_cycle(succ)
    if cycle is not None:
        return Verdict(False, "bound", "joint executions are unbounded: a cycle is "
                       f"reachable through {cycle}", cycle, paths[cycle])
    return Verdict(True)


def _find_cycle(succ: dict) -> object | None:
    """A vertex on some cycle of the successor relation, or None."""
    indeg = {s: 0 for s in succ}
    for ts in succ.values():
        for t in ts:
            indeg[t] += 1
    queue = deque(s for s, d in indeg.items() if d == 0)
    removed = 0
    while queue:
        s = queue.popleft()
        removed += 1
        for t in succ[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    if removed == len(succ):
        return None
    return min(s for s, d in indeg.items() if d > 0)


def longest_execution(graph: PGraph) -> int | None:
    """Length of the longest execution, or None when unbounded."""
    from .pgraph import reachable_vertices
    reach = reachable_vertices(graph)
    succ = {v: sorted({t for ts in graph.out(v).values() for t in ts}) for v in reach}
    if _find_cycle(succ) is not None:
        return None
    depth: dict[str, int] = {}
    order = _topological(succ)
    for v in reversed(order):
        depth[v] = max((1 + depth[t] for t in succ[v]), default=0)
    return max((depth[v] for v in graph.initial), default=0)


def _topological(succ: dict) -> list:
    indeg = {s: 0 for s in succ}
    for ts in succ.values():
        for t in ts:
            indeg[t] += 1
    queue = deque(sorted(s for s, d in indeg.items() if d == 0))
    order = []
    while queue:
        s = queue.popleft()
        order.append(s)
        for t in succ[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    return order


def is_c_bounded(plan: Plan, c: int) -> bool:
    """Every execution of the plan has length at most ``c``."""
    n = longest_execution(plan.graph)
    return n is not None and n <= c


def congruent_tree(plan: Plan, k: int) -> Plan:
    """Unfold ``plan`` breadth-first into a tree truncated at depth ``k``.

    Each tree vertex corresponds to the set of plan vertices its execution
    reaches; it is a termination vertex when that set meets the plan's
    termination region.  No two executions of the result reach the same
    vertex.
    """
    g = plan.graph
    kind = g.initial_kind()
    if kind is None:
        raise PGraphError("plan must have a nonempty initial set of one kind")
    vertices = {"t0": kind}
    corr = {"t0": g.initial}
    edges = []
    queue = deque([("t0", 0)])
    while queue:
        node, depth = queue.popleft()
        if depth >= k:
            continue
        labels = set()
        for v in corr[node]:
            labels.update(g.out(v))
        for lab in sorted(labels):
            child = f"t{len(vertices)}"
            targets = g.step(corr[node], lab)
            vertices[child] = g.vertices[next(iter(targets))]
            corr[child] = targets
            edges.append((node, child, (lab,)))
            queue.append((child, depth + 1))
    term = [t for t, vs in corr.items() if vs & plan.term]
    tree = PGraph(vertices, edges, ["t0"], g.actions, g.observations)
    return Plan(tree, frozenset(term))


def term_vertices_of(plan: Plan) -> Iterable[str]:
    return sorted(plan.term)
