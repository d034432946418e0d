"""Disclosure policies as label maps, and partial maps as partitions."""
from __future__ import annotations

import json
from itertools import combinations
from math import comb
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

from .pgraph import ACTION, OBSERVATION, Execution


class LabelMapError(ValueError):
    pass


class LabelConflict(Exception):
    """Two partial maps disagree on whether a pair of events share an image."""

    def __init__(self, first: str, second: str) -> None:
        self.pair = tuple(sorted((first, second)))
        super().__init__(f"conflicting commitments for {self.pair[0]!r} and {self.pair[1]!r}")


class LabelMap:
    """A total, kind-preserving map from events to image symbols."""

    __slots__ = ("_map", "_kinds", "_pre")

    def __init__(self, mapping: Mapping[str, str], actions: Iterable[str],
                 observations: Iterable[str]) -> None:
        actions, observations = frozenset(actions), frozenset(observations)
        if actions & observations:
            raise LabelMapError("an event cannot be both an action and an observation")
        kinds = {a: ACTION for a in actions}
        kinds.update({o: OBSERVATION for o in observations})
        missing = set(kinds) - set(mapping)
        if missing:
            raise LabelMapError(f"label map is not total: missing {sorted(missing)}")
        extra = set(mapping) - set(kinds)
        if extra:
            raise LabelMapError(f"events outside the declared domain: {sorted(extra)}")
        pre: dict[str, set[str]] = {}
        image_kind: dict[str, str] = {}
        for event, x in mapping.items():
            if image_kind.setdefault(x, kinds[event]) != kinds[event]:
                raise LabelMapError(
                    f"image {x!r} is shared by an action and an observation")
            pre.setdefault(x, set()).add(event)
        self._map = MappingProxyType(dict(sorted(mapping.items())))
        self._kinds = MappingProxyType(kinds)
        self._pre = MappingProxyType({x: frozenset(es) for x, es in sorted(pre.items())})

    @classmethod
    def identity(cls, actions: Iterable[str], observations: Iterable[str]) -> LabelMap:
        actions, observations = frozenset(actions), frozenset(observations)
        return cls({e: e for e in actions | observations}, actions, observations)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[str]], actions: Iterable[str],
                    observations: Iterable[str]) -> LabelMap:
        """Map each block to one image named after its sorted members."""
        mapping = {}
        for block in blocks:
            name = image_name(block)
            mapping.update({e: name for e in block})
        return cls(mapping, actions, observations)

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._map)

    @property
    def mapping(self) -> Mapping[str, str]:
        return self._map

    @property
    def images(self) -> frozenset[str]:
        return frozenset(self._pre)

    @property
    def actions(self) -> frozenset[str]:
        return frozenset(e for e, k in self._kinds.items() if k == ACTION)

    @property
    def observations(self) -> frozenset[str]:
        return frozenset(e for e, k in self._kinds.items() if k == OBSERVATION)

    def image(self, event: str) -> str:
        try:
            return self._map[event]
        except KeyError:
            raise LabelMapError(f"event {event!r} is not in the map's domain") from None

    def apply(self, s: Sequence[str]) -> Execution:
        return tuple(self.image(e) for e in s)

    def preimage(self, x: str) -> frozenset[str]:
        return self._pre.get(x, frozenset())

    def preimage_set(self, xs: Iterable[str]) -> frozenset[str]:
        result: set[str] = set()
        for x in xs:
            if x not in self._pre:
                raise LabelMapError(f"unknown image symbol {x!r}")
            result |= self._pre[x]
        return frozenset(result)

    def blocks(self) -> frozenset[frozenset[str]]:
        return frozenset(self._pre.values())

    def co_blocked(self, a: str, b: str) -> bool:
        return self.image(a) == self.image(b)

    def is_identity_shaped(self) -> bool:
        return all(len(b) == 1 for b in self._pre.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelMap):
            return NotImplemented
        return dict(self._map) == dict(other._map) and dict(self._kinds) == dict(other._kinds)

    def __hash__(self) -> int:
        return hash(tuple(self._map.items()))

    def __repr__(self) -> str:
        groups = sorted(sorted(b) for b in self.blocks() if len(b) > 1)
        return f"LabelMap(|domain|={len(self._map)}, merged={groups})"

    # -- JSON ------------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({"map": dict(self._map)}, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, actions: Iterable[str],
                  observations: Iterable[str]) -> LabelMap:
        """Parse ``{"map": {...}}``; events left out map to themselves."""
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LabelMapError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict) or set(data) != {"map"} or not isinstance(data["map"], dict):
            raise LabelMapError('label map document must be {"map": {event: image}}')
        actions, observations = frozenset(actions), frozenset(observations)
        mapping = {e: e for e in actions | observations}
        mapping.update(data["map"])
        return cls(mapping, actions, observations)


def image_name(block: Iterable[str]) -> str:
    return "+".join(sorted(block))


# ---------------------------------------------------------------------------
# partial maps


class PartialLabelMap:
    """Commitments about which events share an image.

    ``blocks`` partition a subset of events (the support); events in one
    block share an image.  Separations record pairs of blocks that must get
    different images.  By default every pair of given blocks is separated,
    which is what one enumerated partition commits to.  Consolidating maps
    over unrelated events leaves their blocks unconstrained with respect to
    each other.
    """

    __slots__ = ("blocks", "separations", "_block_of")

    def __init__(self, blocks: Iterable[Iterable[str]] = (),
                 separations: Iterable[Iterable[str]] | None = None) -> None:
        frozen = frozenset(frozenset(b) for b in blocks)
        block_of = {}
        for b in frozen:
            if not b:
                raise LabelMapError("partition blocks must be nonempty")
            for e in b:
                if e in block_of:
                    raise LabelMapError(f"event {e!r} appears in two blocks")
                block_of[e] = b
        self.blocks = frozen
        self._block_of = block_of
        if separations is None:
            reps = sorted(min(b) for b in frozen)
            seps = {frozenset(pair) for pair in combinations(reps, 2)}
        else:
            seps = set()
            for pair in separations:
                x, y = tuple(pair)
                if x not in block_of or y not in block_of:
                    raise LabelMapError(f"separation {sorted(pair)} mentions unknown events")
                bx, by = block_of[x], block_of[y]
                if bx is by:
                    raise LabelMapError(f"events {x!r} and {y!r} are both co-blocked and separated")
                seps.add(frozenset((min(bx), min(by))))
        self.separations = frozenset(seps)

    @property
    def support(self) -> frozenset[str]:
        return frozenset(self._block_of)

    def block_of(self, event: str) -> frozenset[str] | None:
        return self._block_of.get(event)

    def co_blocked(self, a: str, b: str) -> bool:
        blk = self._block_of.get(a)
        return blk is not None and b in blk

    def separated(self, a: str, b: str) -> bool:
        if a not in self._block_of or b not in self._block_of:
            return False
        ba, bb = self._block_of[a], self._block_of[b]
        return ba is not bb and frozenset((min(ba), min(bb))) in self.separations

    def restrict(self, events: Iterable[str]) -> PartialLabelMap:
        keep = frozenset(events)
        blocks = [b & keep for b in self.blocks if b & keep]
        seps = []
        for pair in self.separations:
            x, y = tuple(pair)
            bx, by = self._block_of[x] & keep, self._block_of[y] & keep
            if bx and by:
                seps.append((min(bx), min(by)))
        return PartialLabelMap(blocks, seps)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartialLabelMap):
            return NotImplemented
        return self.blocks == other.blocks and self.separations == other.separations

    def __hash__(self) -> int:
        return hash((self.blocks, self.separations))

    def __repr__(self) -> str:
        return "PartialLabelMap(" + repr(sorted(sorted(b) for b in self.blocks)) + ")"


def consolidate(p1: PartialLabelMap, p2: PartialLabelMap) -> PartialLabelMap:
    """Merge two partial maps, keeping every commitment of both.

    Blocks that share an event are merged (transitively).  Raises
    :class:`LabelConflict` naming an event pair that one input separates
    while the merged blocks put them together.
    """
    parent = {e: e for e in p1.support | p2.support}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for p in (p1, p2):
        for block in p.blocks:
            first, *rest = sorted(block)
            for e in rest:
                parent[find(e)] = find(first)
    seps = []
    for pair in sorted(sorted(pr) for pr in p1.separations | p2.separations):
        x, y = pair
        if find(x) == find(y):
            raise LabelConflict(x, y)
        seps.append((x, y))
    groups: dict[str, set[str]] = {}
    for e in parent:
        groups.setdefault(find(e), set()).add(e)
    return PartialLabelMap(groups.values(), seps)


def finalize(p: PartialLabelMap, actions: Iterable[str],
             observations: Iterable[str]) -> LabelMap:
    """Extend a partial map to a total one; unconstrained events get
    singleton images."""
    actions, observations = frozenset(actions), frozenset(observations)
    domain = actions | observations
    outside = p.support - domain
    if outside:
        raise LabelMapError(f"partial map mentions unknown events {sorted(outside)}")
    blocks = list(p.blocks) + [frozenset([e]) for e in domain - p.support]
    return LabelMap.from_blocks(blocks, actions, observations)


def partial_from(h: LabelMap, events: Iterable[str] | None = None) -> PartialLabelMap:
    """The partition a total map induces on ``events`` (default: its domain)."""
    keep = h.domain if events is None else frozenset(events)
    return PartialLabelMap(b & keep for b in h.blocks() if b & keep)


# ---------------------------------------------------------------------------
# partition enumeration


def _partitions(items: list[str]) -> Iterator[list[list[str]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def enumerate_partitions(events: Iterable[str], *, kind_of: Mapping[str, str] | None = None,
                         order: str | None = None) -> Iterator[PartialLabelMap]:
    """Yield every set partition of ``events`` exactly once.

    ``order`` may be ``"coarse"`` (fewest blocks first) or ``"fine"`` (most
    blocks first); ties and the default order are deterministic.
    """
    items = sorted(set(events))
    if not items:
        raise LabelMapError("cannot partition an empty event set")
    if kind_of is not None:
        kinds = {kind_of[e] for e in items}
        if len(kinds) > 1:
            raise LabelMapError("events to partition must all have the same kind")
    if order is None:
        for part in _partitions(items):
            yield PartialLabelMap(part)
        return
    if order not in ("coarse", "fine"):
        raise ValueError(f"unknown partition order {order!r}")
    parts = [sorted(sorted(b) for b in part) for part in _partitions(items)]
    sign = 1 if order == "coarse" else -1
    parts.sort(key=lambda part: (sign * len(part), part))
    for part in parts:
        yield PartialLabelMap(part)


def bell(n: int) -> int:
    """Bell numbers by the binomial recurrence."""
    b = [1]
    for m in range(n):
        b.append(sum(comb(m, k) * b[k] for k in range(m + 1)))
    return b[n]
