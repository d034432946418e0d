"""Plan synthesis for a fixed observer and label map.

The search runs on the triple graph: the product of the world ``W``, the
expanded divulged plan ``sde(D)`` and the expanded preimage filter
``sde(h^-1<I>)``.  Every triple carries the observer's belief at its filter
component.  A triple is *winning* when some tree plan started there keeps
the stipulation true at every step and reaches termination at a goal.
Winning triples and their minimal depths are computed backwards
(attractor style), so the synthesized plan is as shallow as possible and
the answer "none" is exact.
"""
from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass, field

from .labelmap import LabelMap
from .observer import BeliefEstimator
from .pgraph import ACTION, OBSERVATION, PGraph, PGraphError, sde
from .planning import Plan, PlanningProblem, Verdict, check_solves
from .stipulation import Formula, bind, evaluate


class SearchBudgetExceeded(RuntimeError):
    """The search hit its node budget before reaching an answer."""

    def __init__(self, budget: int, stats: dict | None = None) -> None:
        self.budget = budget
        self.stats = stats or {}
        super().__init__(f"inconclusive: node budget of {budget} exhausted")


@dataclass(frozen=True, order=True)
class TripleState:
    """World vertex, reached set of divulged-plan vertices (empty once the
    execution leaves ``L(D)``) and filter vertex (None once the observer's
    filter has no transition)."""

    w: str
    d: frozenset[str]
    i: str | None


@dataclass
class SeekPConfig:
    depth_bound: int | None = None
    budget: int | None = None


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    beliefs_evaluated: int = 0
    triples: int = 0
    elapsed: float = 0.0
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"nodes_expanded": self.nodes_expanded,
                "beliefs_evaluated": self.beliefs_evaluated,
                "triples": self.triples, "elapsed": round(self.elapsed, 6),
                "notes": list(self.notes)}


# ---------------------------------------------------------------------------
# checking


def check(problem: PlanningProblem, plan: Plan, D: PGraph, I: PGraph, h: LabelMap,
          f: Formula) -> Verdict:
    """Whether ``plan`` solves ``problem`` and keeps ``f`` true of the
    observer's belief after every joint prefix."""
    world = problem.world
    bind(f, world.vertices)
    verdict = check_solves(plan, problem)
    if not verdict:
        return verdict
    estimator = BeliefEstimator(I, D, world, h)
    notes = []
    start = [(p, w, I.initial) for p in sorted(plan.graph.initial) for w in sorted(world.initial)]
    seen = {s: () for s in start}
    queue = deque(start)
    while queue:
        state = queue.popleft()
        p, w, iset = state
        belief = estimator.belief(iset)
        if not belief and "empty belief" not in " ".join(notes):
            notes.append("empty belief reached: the execution left L(D) or L(I)")
        if not evaluate(f, belief):
            return Verdict(False, "stipulation",
                           f"stipulation fails on belief {sorted(belief)}",
                           (p, w), seen[state], notes)
        if p in plan.term:
            continue
        out_p, out_w = plan.graph.out(p), world.out(w)
        for lab in sorted(out_p.keys() & out_w.keys()):
            nxt_i = I.step(iset, h.image(lab))
            for tp in sorted(out_p[lab]):
                for tw in sorted(out_w[lab]):
                    nxt = (tp, tw, nxt_i)
                    if nxt not in seen:
                        seen[nxt] = seen[state] + (lab,)
                        queue.append(nxt)
    return Verdict(True, notes=notes)


# ---------------------------------------------------------------------------
# triple graph


class TripleGraph:
    """Reachable triples with their transitions and beliefs."""

    def __init__(self, problem: PlanningProblem, D: PGraph, I: PGraph, h: LabelMap) -> None:
        world = problem.world
        if not world.is_state_determined():
            raise PGraphError("the world must be state-determined; apply sde first")
        self.world = world
        self.h = h
        self.estimator = BeliefEstimator(I, D, world, h)
        self.filter = self.estimator.filter
        self.divulged = D
        (w0,) = world.initial
        (f0,) = self.filter.initial
        self.initial = TripleState(w0, D.initial, f0)
        self.succ: dict[TripleState, dict[str, TripleState]] = {}
        self._explore()

    def kind(self, t: TripleState) -> str:
        return self.world.vertices[t.w]

    def subset(self, t: TripleState) -> frozenset[str]:
        """The observer's I-state set at ``t``."""
        return frozenset() if t.i is None else self.filter.subsets[t.i]

    def belief(self, t: TripleState) -> frozenset[str]:
        return self.estimator.belief(self.subset(t))

    def _explore(self) -> None:
        W, D, F = self.world, self.divulged, self.filter
        queue = deque([self.initial])
        self.succ[self.initial] = {}
        while queue:
            t = queue.popleft()
            moves = {}
            for lab, targets in W.out(t.w).items():
                (nw,) = targets
                nd = D.step(t.d, lab)
                ni = None
                if t.i is not None:
                    nxt = F.out(t.i).get(lab)
                    ni = next(iter(nxt)) if nxt else None
                nt = TripleState(nw, nd, ni)
                moves[lab] = nt
                if nt not in self.succ:
                    self.succ[nt] = {}
                    queue.append(nt)
            self.succ[t] = moves

    def __len__(self) -> int:
        return len(self.succ)


def annotate_triple(T: TripleGraph, goal, f: Formula) -> dict[TripleState, tuple[bool, bool]]:
    """Mark every triple with ``(is_goal, stipulation_holds)``."""
    goal = frozenset(goal)
    cache: dict[frozenset[str], bool] = {}
    marks = {}
    for t in T.succ:
        sub = T.subset(t)
        if sub not in cache:
            cache[sub] = evaluate(f, T.belief(t))
        marks[t] = (t.w in goal, cache[sub])
    return marks


# ---------------------------------------------------------------------------
# search


def default_depth_bound(world: PGraph, D: PGraph, I: PGraph, h: LabelMap) -> int:
    """|V(W)| * |V(D)| * |V(sde(h^-1<I>))|."""
    from .pgraph import preimage_graph
    return len(world) * len(D) * len(sde(preimage_graph(h, I)))


def _ranks(T: TripleGraph, marks, budget: int | None, stats: SearchStats) -> dict:
    """Minimal depth of a winning strategy from each winning triple."""
    pred: dict[TripleState, list[TripleState]] = {t: [] for t in T.succ}
    for t, moves in T.succ.items():
        for nt in moves.values():
            pred[nt].append(t)
    pending = {}
    heap: list[tuple[int, TripleState]] = []
    for t, moves in T.succ.items():
        is_goal, ok = marks[t]
        if not ok:
            continue
        if T.kind(t) == ACTION:
            if is_goal:
                heapq.heappush(heap, (0, t))
        else:
            # an observation triple needs all of its successors winning
            pending[t] = len(set(moves.values()))
    rank: dict[TripleState, int] = {}
    while heap:
        r, t = heapq.heappop(heap)
        if t in rank:
            continue
        stats.nodes_expanded += 1
        if budget is not None and stats.nodes_expanded > budget:
            raise SearchBudgetExceeded(budget, stats.as_dict())
        rank[t] = r
        for p in set(pred[t]):
            if p in rank or not marks[p][1]:
                continue
            if T.kind(p) == ACTION:
                heapq.heappush(heap, (r + 1, p))
            elif p in pending and pending[p] > 0:
                pending[p] -= 1
                if pending[p] == 0 and T.succ[p]:
                    heapq.heappush(heap, (r + 1, p))
    return rank


def seek_plan(problem: PlanningProblem, D: PGraph, I: PGraph, h: LabelMap, f: Formula,
              config: SeekPConfig | None = None,
              stats: SearchStats | None = None) -> Plan | None:
    """A tree plan solving ``problem`` whose every prefix keeps ``f`` true of
    the belief of observer ``(I, D)``, or None when no plan exists.

    Raises :class:`SearchBudgetExceeded` when ``config.budget`` expansions
    are not enough to decide.
    """
    config = config or SeekPConfig()
    stats = stats if stats is not None else SearchStats()
    began = time.perf_counter()
    bind(f, problem.world.vertices)
    T = TripleGraph(problem, D, I, h)
    stats.triples = len(T)
    marks = annotate_triple(T, problem.goal, f)
    stats.beliefs_evaluated = len({T.subset(t) for t in T.succ})
    rank = _ranks(T, marks, config.budget, stats)
    bound = config.depth_bound
    if bound is None:
        bound = len(problem.world) * max(len(D), 1) * len(T.filter)
    stats.elapsed = time.perf_counter() - began
    r0 = rank.get(T.initial)
    if r0 is None or r0 > bound:
        return None
    plan = _unfold(T, rank, problem.goal)
    for t in T.succ:
        if t in rank and not t.d and "left L(D)" not in " ".join(stats.notes):
            stats.notes.append("some triples have left L(D); plans may do the same")
    stats.elapsed = time.perf_counter() - began
    return plan


def _unfold(T: TripleGraph, rank: dict, goal) -> Plan:
    """Expand the minimal-depth strategy into a tree plan."""
    vertices: dict[str, str] = {}
    edges = []
    term = []
    counter = 0

    def new(kind: str) -> str:
        nonlocal counter
        vid = f"n{counter}"
        counter += 1
        vertices[vid] = kind
        return vid

    root = new(T.kind(T.initial))
    stack = [(root, T.initial)]
    while stack:
        vid, t = stack.pop()
        if T.kind(t) == ACTION:
            if rank[t] == 0:
                term.append(vid)
                continue
            best = min((rank[nt], lab) for lab, nt in T.succ[t].items() if nt in rank)
            lab = best[1]
            child = new(OBSERVATION)
            edges.append((vid, child, [lab]))
            stack.append((child, T.succ[t][lab]))
        else:
            for lab in sorted(T.succ[t]):
                child = new(ACTION)
                edges.append((vid, child, [lab]))
                stack.append((child, T.succ[t][lab]))
    world = T.world
    graph = PGraph(vertices, edges, [root], world.actions, world.observations)
    return Plan(graph, frozenset(term))
