"""Joint synthesis of a plan and a label map for the finest observer when
the plan itself is divulged.

The search alternates two tiers.  At an action node the robot picks, for
every world state the observer considers possible, either termination or a
nonempty set of actions; the chosen actions are then partitioned into
image classes, each class leading to one successor belief.  At an
observation node the available observations are partitioned the same way.
Partitions are committed to a running partial label map; a partition that
contradicts earlier commitments is skipped, which backtracks the search.

Beliefs are propagated with the one-step equations (successors of
non-terminated states through events of one image class).  Each complete
candidate is verified end to end with :func:`pgplan.seek_p.check`, and the
search resumes if verification fails, so every returned pair is sound.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import chain, combinations, product
from typing import Iterable, Iterator

from .labelmap import (LabelConflict, LabelMap, PartialLabelMap, consolidate,
                       enumerate_partitions, finalize)
from .pgraph import ACTION, OBSERVATION, PGraph, PGraphError, image_graph
from .planning import Plan, PlanningProblem
from .seek_p import SearchBudgetExceeded, SearchStats, check
from .stipulation import Formula, bind, evaluate

TERM = "TERM"


def belief_step_action(world: PGraph, belief: Iterable[str], actions_chosen,
                       block: Iterable[str], term_states: Iterable[str] = ()) -> frozenset[str]:
    """Successor belief when the observer sees the image shared by ``block``.

    ``actions_chosen`` maps world states to their chosen action sets;
    states in ``term_states`` have stopped and contribute nothing.
    """
    block, stopped = frozenset(block), frozenset(term_states)
    result: set[str] = set()
    for w in belief:
        if w in stopped:
            continue
        chosen = actions_chosen.get(w)
        if not chosen or chosen == TERM:
            continue
        for a in frozenset(chosen) & block:
            result |= world.successors(w, a)
    return frozenset(result)


def belief_step_observation(world: PGraph, belief: Iterable[str], block: Iterable[str],
                            term_states: Iterable[str] = ()) -> frozenset[str]:
    """Successor belief after an observation from ``block``."""
    block, stopped = frozenset(block), frozenset(term_states)
    result: set[str] = set()
    for w in belief:
        if w in stopped:
            continue
        for o in world.labels_from(w) & block:
            result |= world.successors(w, o)
    return frozenset(result)


@dataclass
class SearchNode:
    """One node of the synthesized tree: a belief, the per-state choice (at
    action nodes) and one child per image class."""

    kind: str
    belief: frozenset[str]
    choice: dict[str, object] = field(default_factory=dict)
    children: list[tuple[frozenset[str], "SearchNode"]] = field(default_factory=list)


@dataclass
class PLMConfig:
    budget: int | None = None
    action_order: str = "coarse"
    observation_order: str = "fine"
    # how often one (kind, belief) node may occur on a root-to-leaf path
    revisit_limit: int = 1


class _Search:
    def __init__(self, problem: PlanningProblem, f: Formula, config: PLMConfig,
                 stats: SearchStats) -> None:
        self.world = problem.world
        self.goal = problem.goal
        self.f = f
        self.config = config
        self.stats = stats
        self.partitions_tried = 0
        self._sat: dict[frozenset[str], bool] = {}

    def holds(self, belief: frozenset[str]) -> bool:
        if belief not in self._sat:
            self.stats.beliefs_evaluated += 1
            self._sat[belief] = evaluate(self.f, belief)
        return self._sat[belief]

    def expand(self) -> None:
        self.stats.nodes_expanded += 1
        budget = self.config.budget
        if budget is not None and self.stats.nodes_expanded > budget:
            raise SearchBudgetExceeded(budget, self.stats.as_dict())

    def solve(self, kind: str, belief: frozenset[str], pmap: PartialLabelMap,
              path: tuple) -> Iterator[tuple[SearchNode, PartialLabelMap]]:
        key = (kind, belief)
        if path.count(key) >= self.config.revisit_limit or not self.holds(belief):
            return
        self.expand()
        path = path + (key,)
        if kind == ACTION:
            yield from self._action(belief, pmap, path)
        else:
            yield from self._observation(belief, pmap, path)

    def _action_options(self, w: str, may_stop: bool) -> list:
        acts = sorted(self.world.labels_from(w))
        subsets = [frozenset(c) for r in range(1, len(acts) + 1)
                   for c in combinations(acts, r)]
        return ([TERM] if may_stop else []) + subsets

    def _action(self, belief, pmap, path):
        states = sorted(belief)
        may_stop = belief <= self.goal
        options = [self._action_options(w, may_stop) for w in states]
        if any(not opts for opts in options):
            return

        def weight(combo):
            sizes = [0 if c == TERM else len(c) for c in combo]
            return (sum(sizes), [sorted(c) if c != TERM else [] for c in combo])

        for combo in sorted(product(*options), key=weight):
            choice = dict(zip(states, combo))
            live = {w: c for w, c in choice.items() if c != TERM}
            if not live:
                yield SearchNode(ACTION, belief, choice), pmap
                continue
            events = frozenset(chain.from_iterable(live.values()))
            for part in enumerate_partitions(events, order=self.config.action_order):
                self.partitions_tried += 1
                try:
                    merged = consolidate(pmap, part)
                except LabelConflict:
                    continue
                items = []
                for block in sorted(part.blocks, key=sorted):
                    nxt = belief_step_action(self.world, belief, choice, block)
                    items.append((block, OBSERVATION, nxt))
                for children, pm in self._all(items, 0, merged, path, []):
                    yield SearchNode(ACTION, belief, choice, children), pm

    def _observation(self, belief, pmap, path):
        events: set[str] = set()
        for w in belief:
            labels = self.world.labels_from(w)
            if not labels:
                return
            events |= labels
        for part in enumerate_partitions(events, order=self.config.observation_order):
            self.partitions_tried += 1
            try:
                merged = consolidate(pmap, part)
            except LabelConflict:
                continue
            items = []
            for block in sorted(part.blocks, key=sorted):
                nxt = belief_step_observation(self.world, belief, block)
                items.append((block, ACTION, nxt))
            for children, pm in self._all(items, 0, merged, path, []):
                yield SearchNode(OBSERVATION, belief, {}, children), pm

    def _all(self, items, idx, pmap, path, acc):
        if idx == len(items):
            yield list(acc), pmap
            return
        block, kind, nxt = items[idx]
        for sub, pm in self.solve(kind, nxt, pmap, path):
            acc.append((block, sub))
            yield from self._all(items, idx + 1, pm, path, acc)
            acc.pop()


def build_plan(world: PGraph, root: SearchNode) -> Plan:
    """Turn a search tree into a plan over (node, world state) vertices."""
    vertices: dict[str, str] = {}
    edges = []
    term = []
    counter = 0
    stack = [(root, None)]
    ids: dict[int, int] = {}
    order = []
    while stack:
        node, _ = stack.pop()
        ids[id(node)] = counter
        counter += 1
        order.append(node)
        for _, child in reversed(node.children):
            stack.append((child, node))

    def vid(node: SearchNode, w: str) -> str:
        return f"n{ids[id(node)]}:{w}"

    for node in order:
        for w in sorted(node.belief):
            vertices[vid(node, w)] = node.kind
        if node.kind == ACTION:
            for w in sorted(node.belief):
                c = node.choice[w]
                if c == TERM:
                    term.append(vid(node, w))
                    continue
                for a in sorted(c):
                    child = next(ch for blk, ch in node.children if a in blk)
                    for t in world.successors(w, a):
                        edges.append((vid(node, w), vid(child, t), [a]))
        else:
            for w in sorted(node.belief):
                for o in sorted(world.labels_from(w)):
                    child = next(ch for blk, ch in node.children if o in blk)
                    for t in world.successors(w, o):
                        edges.append((vid(node, w), vid(child, t), [o]))
    initial = [vid(root, w) for w in sorted(root.belief)]
    graph = PGraph(vertices, edges, initial, world.actions, world.observations)
    return Plan(graph, frozenset(term))


def seek_plan_and_map(problem: PlanningProblem, f: Formula, budget: int | None = None, *,
                      config: PLMConfig | None = None,
                      stats: SearchStats | None = None) -> tuple[Plan, LabelMap] | None:
    """A plan and label map such that the plan solves ``problem`` and ``f``
    holds of the finest observer's belief at every step, the plan being
    known to the observer.  Returns None when the search space is exhausted.
    """
    config = config or PLMConfig(budget=budget)
    if budget is not None:
        config.budget = budget
    stats = stats if stats is not None else SearchStats()
    world = problem.world
    if not world.is_state_determined():
        raise PGraphError("the world must be state-determined; apply sde first")
    bind(f, world.vertices)
    began = time.perf_counter()
    search = _Search(problem, f, config, stats)
    kind = world.initial_kind()
    rejected = 0
    try:
        for root, pmap in search.solve(kind, world.initial, PartialLabelMap(), ()):
            plan = build_plan(world, root)
            h = finalize(pmap, world.actions, world.observations)
            verdict = check(problem, plan, plan.graph, image_graph(h, world), h, f)
            if verdict:
                if rejected:
                    stats.notes.append(f"{rejected} candidate(s) failed end-to-end verification")
                return plan, h
            rejected += 1
    finally:
        stats.elapsed = time.perf_counter() - began
        stats.notes.append(f"partitions tried: {search.partitions_tried}")
    if rejected:
        stats.notes.append(f"{rejected} candidate(s) failed end-to-end verification")
    return None
