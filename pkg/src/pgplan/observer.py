"""Observers: I-state graphs, divulged plans and estimated world states."""
from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

from .labelmap import LabelMap
from .pgraph import (PGraph, PGraphError, disjoint_union, image_graph, preimage_graph,
                     reached_vertices, sde)

EXACT_PLAN = "I"
PLAN_SET = "II"
WANDERING = "IV"


def finest_observer(world: PGraph, h: LabelMap) -> PGraph:
    """The I-state graph of the strongest observer: the world seen through h."""
    return image_graph(h, world)


def divulged_plan(case: str, payload) -> PGraph:
    """What the observer knows of the plan.

    Case ``"I"``: ``payload`` is the plan (a :class:`~pgplan.planning.Plan`
    or graph) and is divulged exactly.  Case ``"II"``: ``payload`` is a
    nonempty sequence of plans, one of which runs.  Case ``"IV"``: ``payload``
    is the world; nothing beyond the world is known.  Case III (the robot
    runs *some* goal-directed plan) has no construction here; pass the world
    (case IV) as a conservative substitute.
    """
    if case == EXACT_PLAN:
        return _as_graph(payload)
    if case == PLAN_SET:
        graphs = [_as_graph(p) for p in payload]
        if not graphs:
            raise PGraphError("case II needs at least one plan")
        if len(graphs) == 1:
            return graphs[0]
        return disjoint_union(graphs, [f"p{i}" for i in range(len(graphs))])
    if case == WANDERING:
        return _as_graph(payload)
    if case == "III":
        raise NotImplementedError(
            "case III is not constructed; use case IV (the world) as a conservative choice")
    raise ValueError(f"unknown divulged-plan case {case!r}")


def _as_graph(obj) -> PGraph:
    return obj if isinstance(obj, PGraph) else obj.graph


class BeliefEstimator:
    """Estimated world states for every I-state set of one observer setup.

    Builds, once, the reachable product of the expanded preimage filter
    ``sde(h^-1<I>)``, the divulged plan ``D`` and the world ``W``.  The
    estimate for ``B`` collects the world components of product states whose
    filter component stands for exactly ``B``.
    """

    def __init__(self, istate: PGraph, divulged: PGraph, world: PGraph, h: LabelMap) -> None:
        self.istate = istate
        self.divulged = divulged
        self.world = world
        self.h = h
        self.filter = sde(preimage_graph(h, istate))
        self._beliefs: dict[frozenset[str], set[str]] = {}
        self.product_size = self._explore()

    def _explore(self) -> int:
        f, d, w = self.filter, self.divulged, self.world
        (f0,) = f.initial
        start = [(f0, dv, wv) for dv in sorted(d.initial) for wv in sorted(w.initial)
                 if f.vertices[f0] == d.vertices[dv] == w.vertices[wv]]
        seen = set(start)
        queue = deque(start)
        beliefs = self._beliefs
        subsets = f.subsets
        while queue:
            fv, dv, wv = queue.popleft()
            beliefs.setdefault(subsets[fv], set()).add(wv)
            out_f, out_d, out_w = f.out(fv), d.out(dv), w.out(wv)
            for lab in out_w.keys() & out_d.keys() & out_f.keys():
                (fn,) = out_f[lab]
                for dn in out_d[lab]:
                    for wn in out_w[lab]:
                        state = (fn, dn, wn)
                        if state not in seen:
                            seen.add(state)
                            queue.append(state)
        return len(seen)

    def belief(self, B: Iterable[str]) -> frozenset[str]:
        """Estimated world states at I-states ``B``; empty if no execution
        of ``D`` and ``W`` drives the filter to exactly ``B``."""
        B = frozenset(B)
        for v in B:
            if v not in self.istate.vertices:
                raise PGraphError(f"{v!r} is not a vertex of the I-state graph")
        return frozenset(self._beliefs.get(B, ()))

    def is_witnessed(self, B: Iterable[str]) -> bool:
        return frozenset(B) in self._beliefs

    def witnessed_sets(self) -> list[frozenset[str]]:
        return list(self._beliefs)

    def belief_after(self, s: Sequence[str]) -> frozenset[str]:
        """Estimate after the robot executes ``s`` (in the world's alphabet)."""
        if not reached_vertices(self.world, s):
            raise PGraphError(f"{list(s)} is not an execution of the world")
        return self.belief(reached_vertices(self.istate, self.h.apply(s)))


def estimated_world_states(I: PGraph, D: PGraph, W: PGraph, h: LabelMap,
                           B: Iterable[str]) -> frozenset[str]:
    return BeliefEstimator(I, D, W, h).belief(B)


def belief_after(I: PGraph, D: PGraph, W: PGraph, h: LabelMap,
                 s: Sequence[str]) -> frozenset[str]:
    return BeliefEstimator(I, D, W, h).belief_after(s)
