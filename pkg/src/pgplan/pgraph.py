"""P-graphs: bipartite, edge-labelled transition structures.

A p-graph alternates between *action vertices* (edges leaving them carry
action labels) and *observation vertices* (edges leaving them carry
observation labels).  The same structure is used for worlds, plans,
observer filters and divulged plans.

All graphs are immutable.  Every operation in this module is a pure
function returning a new graph.
"""
from __future__ import annotations

import json
from collections import deque
from types import MappingProxyType
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Sequence

if TYPE_CHECKING:
    from .labelmap import LabelMap

ACTION = "action"
OBSERVATION = "observation"
KINDS = (ACTION, OBSERVATION)

Execution = tuple[str, ...]


class PGraphError(ValueError):
    """Malformed graph input or an operation applied outside its domain."""


class PGraph:
    """An immutable p-graph.

    ``vertices`` maps vertex id to its kind (``"action"`` or
    ``"observation"``).  ``edges`` is an iterable of ``(src, dst, labels)``;
    edges sharing endpoints are merged by unioning their labels.  Graphs
    produced by :func:`sde` additionally record, for each vertex, the set of
    underlying vertices it stands for (``subsets``); products record the
    component tuple (``components``).
    """

    __slots__ = ("_kinds", "_edges", "_initial", "_actions", "_observations",
                 "_out", "_subsets", "_components", "_hash")

    def __init__(
        self,
        vertices: Mapping[str, str],
        edges: Iterable[tuple[str, str, Iterable[str]]],
        initial: Iterable[str],
        actions: Iterable[str],
        observations: Iterable[str],
        *,
        subsets: Mapping[str, frozenset[str]] | None = None,
        components: Mapping[str, tuple[str, ...]] | None = None,
    ) -> None:
        kinds = {}
        for v, kind in vertices.items():
            if kind not in KINDS:
                raise PGraphError(f"vertex {v!r}: unknown kind {kind!r}")
            kinds[str(v)] = kind
        merged: dict[tuple[str, str], set[str]] = {}
        for src, dst, labels in edges:
            if src not in kinds:
                raise PGraphError(f"edge source {src!r} is not a vertex")
            if dst not in kinds:
                raise PGraphError(f"edge target {dst!r} is not a vertex")
            labels = set(labels)
            if labels:
                merged.setdefault((src, dst), set()).update(labels)
        init = frozenset(initial)
        for v in init:
            if v not in kinds:
                raise PGraphError(f"initial vertex {v!r} is not a vertex")
        self._kinds = MappingProxyType(dict(sorted(kinds.items())))
        self._edges = MappingProxyType(
            {k: frozenset(merged[k]) for k in sorted(merged)})
        self._initial = init
        self._actions = frozenset(actions)
        self._observations = frozenset(observations)
        out: dict[str, dict[str, set[str]]] = {v: {} for v in kinds}
        for (src, dst), labels in self._edges.items():
            for lab in labels:
                out[src].setdefault(lab, set()).add(dst)
        self._out = {v: {lab: frozenset(ts) for lab, ts in d.items()}
                     for v, d in out.items()}
        self._subsets = (MappingProxyType(dict(subsets))
                         if subsets is not None else None)
        self._components = (MappingProxyType(dict(components))
                            if components is not None else None)
        self._hash: int | None = None

    # -- accessors -------------------------------------------------------

    @property
    def vertices(self) -> Mapping[str, str]:
        return self._kinds

    @property
    def edges(self) -> Mapping[tuple[str, str], frozenset[str]]:
        return self._edges

    @property
    def initial(self) -> frozenset[str]:
        return self._initial

    @property
    def actions(self) -> frozenset[str]:
        return self._actions

    @property
    def observations(self) -> frozenset[str]:
        return self._observations

    @property
    def alphabet(self) -> frozenset[str]:
        return self._actions | self._observations

    @property
    def subsets(self) -> Mapping[str, frozenset[str]] | None:
        return self._subsets

    @property
    def components(self) -> Mapping[str, tuple[str, ...]] | None:
        return self._components

    def kind(self, v: str) -> str:
        try:
            return self._kinds[v]
        except KeyError:
            raise PGraphError(f"unknown vertex {v!r}") from None

    def out(self, v: str) -> Mapping[str, frozenset[str]]:
        """Outgoing transitions of ``v`` as ``{label: targets}``."""
        try:
            return self._out[v]
        except KeyError:
            raise PGraphError(f"unknown vertex {v!r}") from None

    def labels_from(self, v: str) -> frozenset[str]:
        return frozenset(self.out(v))

    def successors(self, v: str, label: str) -> frozenset[str]:
        return self.out(v).get(label, frozenset())

    def step(self, current: Iterable[str], label: str) -> frozenset[str]:
        """Image of a vertex set under one event."""
        result: set[str] = set()
        for v in current:
            result.update(self._out[v].get(label, ()))
        return frozenset(result)

    def initial_kind(self) -> str | None:
        kinds = {self._kinds[v] for v in self._initial}
        return kinds.pop() if len(kinds) == 1 else None

    def is_state_determined(self) -> bool:
        """True when every execution reaches exactly one vertex."""
        if len(self._initial) != 1:
            return False
        for v in reachable_vertices(self):
            if any(len(ts) > 1 for ts in self._out[v].values()):
                return False
        return True

    def with_initial(self, initial: Iterable[str]) -> PGraph:
        return PGraph(self._kinds, self.edge_list(), initial, self._actions,
                      self._observations, subsets=self._subsets,
                      components=self._components)

    def edge_list(self) -> list[tuple[str, str, frozenset[str]]]:
        return [(s, d, labs) for (s, d), labs in self._edges.items()]

    # -- identity --------------------------------------------------------

    def _key(self):
        return (tuple(self._kinds.items()), tuple(self._edges.items()),
                tuple(sorted(self._initial)), tuple(sorted(self._actions)),
                tuple(sorted(self._observations)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PGraph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self) -> str:
        return (f"PGraph(|V|={len(self._kinds)}, |E|={len(self._edges)}, "
                f"initial={sorted(self._initial)})")

    def __len__(self) -> int:
        return len(self._kinds)


# ---------------------------------------------------------------------------
# validation


def validate(graph: PGraph) -> list[str]:
    """Return descriptions of every violated structural invariant.

    An empty list means the graph is a well-formed p-graph.  Unreachable
    vertices are not violations; see :func:`unreachable_vertices`.
    """
    problems = []
    overlap = graph.actions & graph.observations
    for lab in sorted(overlap):
        problems.append(f"label {lab!r} declared both as action and observation")
    for (src, dst), labels in graph.edges.items():
        sk, dk = graph.vertices[src], graph.vertices[dst]
        alphabet = graph.actions if sk == ACTION else graph.observations
        for lab in sorted(labels):
            if lab not in graph.alphabet:
                problems.append(f"edge {src}->{dst}: label {lab!r} not in any alphabet")
            elif lab not in alphabet:
                problems.append(
                    f"edge {src}->{dst}: label-kind mismatch, {lab!r} leaves {sk} vertex")
        if sk == dk:
            problems.append(f"edge {src}->{dst}: joins two {sk} vertices")
    if not graph.initial:
        problems.append("initial set is empty")
    elif graph.initial_kind() is None:
        problems.append(
            "mixed initial kinds: " + ", ".join(
                f"{v} ({graph.vertices[v]})" for v in sorted(graph.initial)))
    return problems


def reachable_vertices(graph: PGraph) -> frozenset[str]:
    seen = set(graph.initial)
    queue = deque(graph.initial)
    while queue:
        v = queue.popleft()
        for targets in graph.out(v).values():
            for t in targets:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
    return frozenset(seen)


def unreachable_vertices(graph: PGraph) -> list[str]:
    """Vertices no execution reaches; reported as warnings only."""
    reach = reachable_vertices(graph)
    return [v for v in graph.vertices if v not in reach]


# ---------------------------------------------------------------------------
# executions and languages


def _check_labels(graph: PGraph, s: Sequence[str]) -> None:
    for lab in s:
        if lab not in graph.alphabet:
            raise PGraphError(f"label {lab!r} is not in the graph's alphabet")


def transitions_to(graph: PGraph, v: str, s: Sequence[str], w: str) -> bool:
    """Whether ``s`` can be traced in ``graph`` from ``v`` ending at ``w``."""
    graph.kind(v)
    graph.kind(w)
    current = frozenset([v])
    for lab in s:
        current = graph.step(current, lab)
        if not current:
            return False
    return w in current


def reached_vertices(graph: PGraph, s: Sequence[str]) -> frozenset[str]:
    """Vertices reached from some initial vertex by ``s`` (empty if s is not
    an execution)."""
    _check_labels(graph, s)
    current = graph.initial
    for lab in s:
        current = graph.step(current, lab)
        if not current:
            break
    return current


def in_language(graph: PGraph, s: Sequence[str]) -> bool:
    return bool(reached_vertices(graph, s))


def iter_executions(graph: PGraph, k: int) -> Iterator[tuple[Execution, frozenset[str]]]:
    """Yield ``(execution, reached set)`` for every execution of length <= k."""
    stack: list[tuple[Execution, frozenset[str]]] = [((), graph.initial)]
    while stack:
        s, current = stack.pop()
        yield s, current
        if len(s) == k:
            continue
        labels: set[str] = set()
        for v in current:
            labels.update(graph.out(v))
        for lab in sorted(labels, reverse=True):
            stack.append((s + (lab,), graph.step(current, lab)))


def language_upto(graph: PGraph, k: int) -> set[Execution]:
    """All executions of length at most ``k``."""
    if k < 0:
        raise PGraphError("length bound must be nonnegative")
    if not graph.initial:
        return set()
    return {s for s, _ in iter_executions(graph, k)}


def exact_reaching_executions(graph: PGraph, B: Iterable[str], k: int) -> set[Execution]:
    """Executions of length <= k that reach exactly the vertex set ``B``.

    Decided on the state-determined expansion: ``s`` reaches exactly ``B``
    iff it reaches the expansion vertex whose underlying subset is ``B``.
    An unreachable ``B`` yields the empty set.
    """
    target = frozenset(B)
    if not target:
        raise PGraphError("exact-reach set must be nonempty")
    for v in target:
        graph.kind(v)
    expanded = sde(graph)
    wanted = {v for v, sub in expanded.subsets.items() if sub == target}
    if not wanted:
        return set()
    result = set()
    for s, current in iter_executions(expanded, k):
        if current & wanted:
            result.add(s)
    return result


def reaches_exactly(graph: PGraph, B: Iterable[str]) -> bool:
    """Whether some execution (of any length) reaches exactly ``B``."""
    target = frozenset(B)
    return any(sub == target for sub in sde(graph).subsets.values())


# ---------------------------------------------------------------------------
# constructions


def subset_id(members: Iterable[str]) -> str:
    return "{" + ",".join(sorted(members)) + "}"


def tuple_id(parts: Sequence[str]) -> str:
    return "(" + ",".join(parts) + ")"


def tensor_product(g1: PGraph, g2: PGraph) -> PGraph:
    """Product graph whose language is ``L(g1) & L(g2)``.

    Only pairs reachable from ``initial(g1) x initial(g2)`` are built.
    """
    k1, k2 = g1.initial_kind(), g2.initial_kind()
    if k1 is None or k2 is None or k1 != k2:
        raise PGraphError("initial sets must be nonempty and of one common kind")
    for lab in (g1.actions & g2.observations) | (g1.observations & g2.actions):
        raise PGraphError(f"label {lab!r} has different kinds in the two graphs")
    start = [(a, b) for a in sorted(g1.initial) for b in sorted(g2.initial)]
    seen = set(start)
    queue = deque(start)
    edges = []
    while queue:
        a, b = queue.popleft()
        out_a, out_b = g1.out(a), g2.out(b)
        for lab in out_a.keys() & out_b.keys():
            for ta in out_a[lab]:
                for tb in out_b[lab]:
                    edges.append(((a, b), (ta, tb), lab))
                    if (ta, tb) not in seen:
                        seen.add((ta, tb))
                        queue.append((ta, tb))
    ids = {p: tuple_id(p) for p in seen}
    return PGraph(
        {ids[p]: g1.vertices[p[0]] for p in seen},
        [(ids[s], ids[d], (lab,)) for s, d, lab in edges],
        [ids[p] for p in start],
        g1.actions & g2.actions,
        g1.observations & g2.observations,
        components={ids[p]: p for p in seen},
    )


def sde(graph: PGraph) -> PGraph:
    """State-determined expansion by subset construction.

    Each result vertex stands for a nonempty set of input vertices (recorded
    in ``result.subsets``); the unique vertex reached by an execution in the
    result stands for exactly the set it reaches in the input.
    """
    if not graph.initial:
        raise PGraphError("graph has no initial vertices")
    start = graph.initial
    seen = {start}
    queue = deque([start])
    edges = []
    kinds = {}
    while queue:
        current = queue.popleft()
        ks = {graph.vertices[v] for v in current}
        if len(ks) != 1:
            raise PGraphError(f"subset {subset_id(current)} mixes vertex kinds")
        kinds[current] = ks.pop()
        labels: set[str] = set()
        for v in current:
            labels.update(graph.out(v))
        for lab in labels:
            nxt = graph.step(current, lab)
            edges.append((current, nxt, lab))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    ids = {sub: subset_id(sub) for sub in seen}
    return PGraph(
        {ids[sub]: kinds[sub] for sub in seen},
        [(ids[s], ids[d], (lab,)) for s, d, lab in edges],
        [ids[start]],
        graph.actions,
        graph.observations,
        subsets={ids[sub]: sub for sub in seen},
    )


def image_graph(h: LabelMap, graph: PGraph) -> PGraph:
    """Apply a label map to every edge of ``graph``."""
    for lab in graph.alphabet:
        if lab not in h.domain:
            raise PGraphError(f"label {lab!r} is missing from the label map")
    return PGraph(
        graph.vertices,
        [(s, d, {h.image(lab) for lab in labs}) for s, d, labs in graph.edge_list()],
        graph.initial,
        {h.image(a) for a in graph.actions},
        {h.image(o) for o in graph.observations},
        subsets=graph.subsets,
        components=graph.components,
    )


def preimage_graph(h: LabelMap, igraph: PGraph) -> PGraph:
    """Replace every image symbol on ``igraph`` by its full preimage."""
    for x in igraph.alphabet:
        if not h.preimage(x):
            raise PGraphError(f"image symbol {x!r} has an empty preimage")
    return PGraph(
        igraph.vertices,
        [(s, d, h.preimage_set(labs)) for s, d, labs in igraph.edge_list()],
        igraph.initial,
        h.preimage_set(igraph.actions),
        h.preimage_set(igraph.observations),
        subsets=igraph.subsets,
        components=igraph.components,
    )


def disjoint_union(graphs: Sequence[PGraph], tags: Sequence[str] | None = None) -> PGraph:
    """Union of graphs with vertex ids prefixed by a per-graph tag."""
    if not graphs:
        raise PGraphError("need at least one graph")
    tags = list(tags) if tags is not None else [f"g{i}" for i in range(len(graphs))]
    vertices, edges, initial = {}, [], []
    for tag, g in zip(tags, graphs):
        ren = {v: f"{tag}:{v}" for v in g.vertices}
        vertices.update({ren[v]: k for v, k in g.vertices.items()})
        edges.extend((ren[s], ren[d], labs) for s, d, labs in g.edge_list())
        initial.extend(ren[v] for v in g.initial)
    return PGraph(
        vertices, edges, initial,
        frozenset().union(*(g.actions for g in graphs)),
        frozenset().union(*(g.observations for g in graphs)),
    )


# ---------------------------------------------------------------------------
# serialization

_GRAPH_KEYS = {"vertices", "edges", "actions", "observations"}
_VERTEX_KEYS = {"id", "kind", "initial"}
_EDGE_KEYS = {"from", "to", "labels"}


def to_dict(graph: PGraph) -> dict:
    return {
        "vertices": [{"id": v, "kind": k, "initial": v in graph.initial}
                     for v, k in graph.vertices.items()],
        "edges": [{"from": s, "to": d, "labels": sorted(labs)}
                  for (s, d), labs in graph.edges.items()],
        "actions": sorted(graph.actions),
        "observations": sorted(graph.observations),
    }


def from_dict(data: Mapping, extra_keys: Iterable[str] = ()) -> PGraph:
    """Build a graph from its JSON object form.  Unknown keys are rejected."""
    if not isinstance(data, Mapping):
        raise PGraphError("graph document must be a JSON object")
    allowed = _GRAPH_KEYS | set(extra_keys)
    unknown = set(data) - allowed
    if unknown:
        raise PGraphError(f"unknown keys: {sorted(unknown)}")
    missing = _GRAPH_KEYS - set(data)
    if missing:
        raise PGraphError(f"missing keys: {sorted(missing)}")
    vertices, initial = {}, []
    for i, entry in enumerate(data["vertices"]):
        _check_entry(entry, _VERTEX_KEYS, f"vertices[{i}]")
        if entry["id"] in vertices:
            raise PGraphError(f"vertices[{i}]: duplicate id {entry['id']!r}")
        vertices[entry["id"]] = entry["kind"]
        if not isinstance(entry["initial"], bool):
            raise PGraphError(f"vertices[{i}]: 'initial' must be a boolean")
        if entry["initial"]:
            initial.append(entry["id"])
    edges = []
    for i, entry in enumerate(data["edges"]):
        _check_entry(entry, _EDGE_KEYS, f"edges[{i}]")
        if not entry["labels"]:
            raise PGraphError(f"edges[{i}]: empty label set")
        edges.append((entry["from"], entry["to"], entry["labels"]))
    try:
        return PGraph(vertices, edges, initial, data["actions"], data["observations"])
    except PGraphError as exc:
        raise PGraphError(f"invalid graph: {exc}") from None


def _check_entry(entry, keys: set[str], where: str) -> None:
    if not isinstance(entry, Mapping):
        raise PGraphError(f"{where}: expected an object")
    if set(entry) != keys:
        raise PGraphError(f"{where}: expected keys {sorted(keys)}, got {sorted(entry)}")


def dumps(graph: PGraph, **extra) -> str:
    doc = to_dict(graph)
    doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str, extra_keys: Iterable[str] = ()) -> tuple[PGraph, dict]:
    """Parse a graph document; returns the graph and the extra keys' values."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PGraphError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    graph = from_dict(data, extra_keys)
    return graph, {k: data[k] for k in extra_keys if k in data}


def to_dot(graph: PGraph, name: str = "G") -> str:
    """Graphviz rendering: observation vertices are circles, action vertices
    squares, initial vertices doubled."""
    lines = [f"digraph {json.dumps(name)} {{"]
    for v, kind in graph.vertices.items():
        shape = "circle" if kind == OBSERVATION else "square"
        if v in graph.initial:
            shape = "doublecircle" if kind == OBSERVATION else "doubleoctagon"
            lines.append(f"  {json.dumps(v)} [shape={shape}, peripheries=2];")
        else:
            lines.append(f"  {json.dumps(v)} [shape={shape}];")
    for (s, d), labs in graph.edges.items():
        label = ",".join(sorted(labs))
        lines.append(f"  {json.dumps(s)} -> {json.dumps(d)} [label={json.dumps(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
