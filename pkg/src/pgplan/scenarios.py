"""Two reference instances: the nuclear-facility inspection grid and the
pentagonal loop world.

Both generators are deterministic; the JSON they emit is byte-identical
across runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .labelmap import LabelMap
from .pgraph import ACTION, OBSERVATION, PGraph, dumps, sde
from .planning import Plan, PlanningProblem
from .stipulation import Formula, Literal


# ---------------------------------------------------------------------------
# nuclear facility


@dataclass(frozen=True)
class NuclearConfig:
    """Layout of the inspection grid.

    Cells are ``(row, column)``.  The facility is a pebble-bed reactor
    (``"P"``) or a breeder (``"B"``); radioactivity is high (``"H"``) or low
    (``"L"``).  The blue light at ``star`` shows only for pebble-bed
    facilities.  ``probe_pebble`` reports the radioactivity when the facility
    is pebble-bed and nothing otherwise; ``probe_breeder`` is its breeder
    counterpart.  Exit cells are absorbing: the robot leaves the facility
    there.
    """

    rows: int = 3
    cols: int = 4
    start: tuple[int, int] = (1, 0)
    star: tuple[int, int] = (1, 3)
    probe_pebble: tuple[int, int] = (0, 1)
    probe_breeder: tuple[int, int] = (2, 1)
    exits: tuple[tuple[int, int], ...] = ((1, 2),)


FACILITIES = ("P", "B")
LEVELS = ("H", "L")
MOVES = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}
NUCLEAR_OBSERVATIONS = ("blue", "none", "high", "low", "exit")


def _nuc_vertex(kind: str, cell: tuple[int, int], facility: str, level: str) -> str:
    prefix = "u" if kind == ACTION else "y"
    return f"{prefix}{cell[0]}{cell[1]}{facility}{level}"


def _nuc_observation(cfg: NuclearConfig, cell, facility: str, level: str) -> str:
    reading = "high" if level == "H" else "low"
    if cell == cfg.star:
        return "blue" if facility == "P" else "none"
    if cell == cfg.probe_pebble:
        return reading if facility == "P" else "none"
    if cell == cfg.probe_breeder:
        return reading if facility == "B" else "none"
    if cell in cfg.exits:
        return "exit"
    return "none"


def nuclear_raw_world(cfg: NuclearConfig = NuclearConfig()) -> PGraph:
    """The grid world before state-determined expansion.

    The robot does not know the facility configuration, so all four
    configurations start together; the expansion merges them until an
    observation tells them apart.
    """
    vertices, edges = {}, []
    configs = [(f, x) for f in FACILITIES for x in LEVELS]
    for r in range(cfg.rows):
        for c in range(cfg.cols):
            for f, x in configs:
                u = _nuc_vertex(ACTION, (r, c), f, x)
                y = _nuc_vertex(OBSERVATION, (r, c), f, x)
                vertices[u] = ACTION
                vertices[y] = OBSERVATION
                edges.append((y, u, [_nuc_observation(cfg, (r, c), f, x)]))
                if (r, c) in cfg.exits:
                    continue
                for move, (dr, dc) in MOVES.items():
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < cfg.rows and 0 <= nc < cfg.cols:
                        edges.append((u, _nuc_vertex(OBSERVATION, (nr, nc), f, x), [move]))
    initial = [_nuc_vertex(ACTION, cfg.start, f, x) for f, x in configs]
    return PGraph(vertices, edges, initial, MOVES, NUCLEAR_OBSERVATIONS)


def nuclear_map() -> LabelMap:
    """The disclosure policy: vertical moves look alike and the blue light
    is indistinguishable from an ordinary empty reading."""
    mapping = {"up": "vertical", "down": "vertical", "left": "left", "right": "right",
               "blue": "quiet", "none": "quiet", "high": "high", "low": "low",
               "exit": "exit"}
    return LabelMap(mapping, MOVES, NUCLEAR_OBSERVATIONS)


def _member_facility(v: str) -> str:
    return v[-2]


def _member_level(v: str) -> str:
    return v[-1]


def build_nuclear(cfg: NuclearConfig = NuclearConfig()):
    """Return ``(problem, h, phi)`` for the inspection task.

    The world is the state-determined expansion of :func:`nuclear_raw_world`.
    Goal vertices are exit action vertices at which the robot's own state
    fixes the radioactivity level.  The stipulation requires every belief to
    contain some pebble-bed state and some breeder state, so the observer
    never learns the facility type.
    """
    world = sde(nuclear_raw_world(cfg))
    exit_ids = {_nuc_vertex(ACTION, cell, f, x) for cell in cfg.exits
                for f in FACILITIES for x in LEVELS}
    goal, pebble, breeder = set(), [], []
    for v, members in world.subsets.items():
        if world.vertices[v] == ACTION and members <= exit_ids and \
                len({_member_level(m) for m in members}) == 1:
            goal.add(v)
        facilities = {_member_facility(m) for m in members}
        if "P" in facilities:
            pebble.append(v)
        if "B" in facilities:
            breeder.append(v)
    phi = Formula((tuple(Literal(v) for v in sorted(pebble)),
                   tuple(Literal(v) for v in sorted(breeder))))
    return PlanningProblem(world, frozenset(goal)), nuclear_map(), phi


def level_of(world: PGraph, v: str) -> str | None:
    """Radioactivity level fixed by SDE vertex ``v``, or None if undecided."""
    levels = {_member_level(m) for m in world.subsets[v]}
    return levels.pop() if len(levels) == 1 else None


def facilities_of(world: PGraph, belief) -> set[str]:
    """Facility types represented among the members of a belief."""
    return {_member_facility(m) for v in belief for m in world.subsets[v]}


# ---------------------------------------------------------------------------
# pentagon


@dataclass(frozen=True)
class PentagonConfig:
    """Five loop positions ``p0``..``p4``; ``a1`` advances one position.

    Exit ``a2`` at ``left_exit`` leads to the top-left station, exit ``a3``
    at ``right_exit`` to the top-right one.  The robot enters at one of
    ``entries`` (observed as ``o4`` or ``o5`` respectively).
    """

    size: int = 5
    left_exit: int = 0
    right_exit: int = 1
    entries: tuple[int, int] = (1, 2)


def build_pentagon(cfg: PentagonConfig = PentagonConfig()):
    """Return ``(problem, phi)``; phi keeps the two stations together."""
    n = cfg.size
    vertices = {"start": OBSERVATION, "TL": ACTION, "TR": ACTION,
                "qTL": OBSERVATION, "qTR": OBSERVATION}
    edges = [("qTL", "TL", ["o1"]), ("qTR", "TR", ["o3"]),
             (f"p{cfg.left_exit}", "qTL", ["a2"]), (f"p{cfg.right_exit}", "qTR", ["a3"])]
    for i in range(n):
        vertices[f"p{i}"] = ACTION
        vertices[f"q{i}"] = OBSERVATION
        edges.append((f"p{i}", f"q{(i + 1) % n}", ["a1"]))
        edges.append((f"q{i}", f"p{i}", ["o2"]))
    first, second = cfg.entries
    edges.append(("start", f"p{first}", ["o4"]))
    edges.append(("start", f"p{second}", ["o5"]))
    world = PGraph(vertices, edges, ["start"], ["a1", "a2", "a3"],
                   ["o1", "o2", "o3", "o4", "o5"])
    phi = Formula(((Literal("TL", True), Literal("TR")),
                   (Literal("TR", True), Literal("TL"))))
    return PlanningProblem(world, frozenset({"TL", "TR"})), phi


def pentagon_direct_plan(cfg: PentagonConfig = PentagonConfig()) -> Plan:
    """The stipulation-blind plan: from each entry, advance to the nearest
    exit and take it."""
    n = cfg.size
    vertices = {"s": OBSERVATION}
    edges = []
    for tag, entry, obs in (("x", cfg.entries[0], "o4"), ("z", cfg.entries[1], "o5")):
        options = []
        for exit_pos, exit_act in ((cfg.left_exit, "a2"), (cfg.right_exit, "a3")):
            options.append(((exit_pos - entry) % n, exit_act))
        steps, exit_act = min(options)
        prev = "s"
        vertices[f"{tag}0"] = ACTION
        edges.append((prev, f"{tag}0", [obs]))
        for k in range(steps):
            vertices[f"{tag}{k}m"] = OBSERVATION
            vertices[f"{tag}{k + 1}"] = ACTION
            edges.append((f"{tag}{k}", f"{tag}{k}m", ["a1"]))
            edges.append((f"{tag}{k}m", f"{tag}{k + 1}", ["o2"]))
        vertices[f"{tag}e"] = OBSERVATION
        vertices[f"{tag}g"] = ACTION
        edges.append((f"{tag}{steps}", f"{tag}e", [exit_act]))
        edges.append((f"{tag}e", f"{tag}g", ["o1" if exit_act == "a2" else "o3"]))
    graph = PGraph(vertices, edges, ["s"], ["a1", "a2", "a3"], ["o1", "o2", "o3", "o4", "o5"])
    return Plan(graph, frozenset({"xg", "zg"}))


# ---------------------------------------------------------------------------
# file emission


def write_scenario(name: str, out_dir: Path) -> list[Path]:
    """Write the named scenario's files into ``out_dir``; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}
    if name == "nuclear":
        problem, h, phi = build_nuclear()
        files["world.json"] = problem.to_json()
        files["raw_world.json"] = dumps(nuclear_raw_world())
        files["map.json"] = h.to_json()
        files["phi.txt"] = str(phi) + "\n"
    elif name == "pentagon":
        problem, phi = build_pentagon()
        files["world.json"] = problem.to_json()
        files["phi.txt"] = str(phi) + "\n"
        files["direct_plan.json"] = pentagon_direct_plan().to_json()
    else:
        raise ValueError(f"unknown scenario {name!r}; choose nuclear or pentagon")
    from .io import atomic_write
    paths = []
    for fname, text in sorted(files.items()):
        path = out_dir / fname
        atomic_write(path, text)
        paths.append(path)
    return paths
