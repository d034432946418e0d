"""The ``pgplan`` command line.

Every invocation emits a JSON run report (to stdout, or to ``--report``).
Exit codes: 0 ok / found, 1 none / check failed, 2 inconclusive (budget),
3 invalid input.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from .io import atomic_write
from .labelmap import LabelMap, LabelMapError
from .observer import finest_observer
from .pgraph import (PGraph, PGraphError, dumps, image_graph, loads, preimage_graph, sde,
                     tensor_product, to_dot, unreachable_vertices, validate)
from .planning import Plan, PlanningProblem
from .seek_p import SearchBudgetExceeded, SearchStats, SeekPConfig, check, seek_plan
from .seek_plm import PLMConfig, seek_plan_and_map
from .stipulation import ParseError, parse

OK, NONE, INCONCLUSIVE, INVALID = 0, 1, 2, 3


class InputError(Exception):
    pass


class Report:
    def __init__(self, argv: list[str]) -> None:
        self.data = {"command": argv, "inputs": {}, "outcome": None, "statistics": {},
                     "artifacts": [], "messages": []}
        self.began = time.perf_counter()

    def read(self, path: str) -> str:
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror or exc}") from None
        self.data["inputs"][path] = hashlib.sha256(raw).hexdigest()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise InputError(f"{path}: not UTF-8 text") from None

    def write(self, path: str, text: str) -> None:
        atomic_write(path, text)
        self.data["artifacts"].append(path)

    def note(self, message: str) -> None:
        self.data["messages"].append(message)


# ---------------------------------------------------------------------------
# loading helpers


def _load_graph(report: Report, path: str,
                extra=("goal", "term")) -> tuple[PGraph, dict]:
    # world and plan files carry goal/term annotations; any graph argument
    # accepts them so one file can serve as world, divulged plan or observer
    text = report.read(path)
    try:
        return loads(text, extra_keys=extra)
    except PGraphError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_problem(report: Report, args) -> PlanningProblem:
    world, extra = _load_graph(report, args.world)
    goal = set(extra.get("goal", []))
    if args.goal:
        goal |= {g.strip() for g in args.goal.split(",") if g.strip()}
    if not goal:
        raise InputError("no goal: give --goal or a 'goal' list in the world file")
    problems = validate(world)
    if problems:
        raise InputError(f"{args.world}: {problems[0]}")
    unknown = goal - set(world.vertices)
    if unknown:
        raise InputError(f"goal vertices not in the world: {sorted(unknown)}")
    if not world.is_state_determined():
        expanded = sde(world)
        goal = {v for v, sub in expanded.subsets.items() if sub <= goal}
        report.note("world was not state-determined; expanded by subset construction "
                    "(stipulation symbols refer to the expanded vertex ids)")
        world = expanded
    return PlanningProblem(world, frozenset(goal))


def _load_map(report: Report, path: str | None, world: PGraph) -> LabelMap:
    if path is None:
        return LabelMap.identity(world.actions, world.observations)
    try:
        return LabelMap.from_json(report.read(path), world.actions, world.observations)
    except LabelMapError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_phi(report: Report, args):
    if args.phi is not None and args.phi_file is not None:
        raise InputError("give --phi or --phi-file, not both")
    text = args.phi
    if args.phi_file is not None:
        text = report.read(args.phi_file).strip()
    if text is None:
        raise InputError("a stipulation is required (--phi or --phi-file)")
    try:
        return parse(text)
    except ParseError as exc:
        raise InputError(f"stipulation: {exc}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, report: Report) -> int:
    graph, _ = _load_graph(report, args.input)
    problems = validate(graph)
    report.data["violations"] = problems
    report.data["warnings"] = [f"unreachable vertex {v}" for v in unreachable_vertices(graph)]
    report.data["outcome"] = "ok" if not problems else "invalid"
    return OK if not problems else INVALID


def _checked(report: Report, graph: PGraph, path: str) -> PGraph:
    problems = validate(graph)
    if problems:
        raise InputError(f"{path}: {problems[0]}")
    return graph


def cmd_sde(args, report: Report) -> int:
    graph, _ = _load_graph(report, args.input)
    out = sde(_checked(report, graph, args.input))
    report.write(args.out, dumps(out))
    report.data["statistics"] = {"vertices_in": len(graph), "vertices_out": len(out)}
    report.data["outcome"] = "ok"
    return OK


def cmd_product(args, report: Report) -> int:
    g1, _ = _load_graph(report, args.left)
    g2, _ = _load_graph(report, args.right)
    out = tensor_product(_checked(report, g1, args.left), _checked(report, g2, args.right))
    report.write(args.out, dumps(out))
    report.data["statistics"] = {"vertices_out": len(out)}
    report.data["outcome"] = "ok"
    return OK


def cmd_image(args, report: Report) -> int:
    graph, _ = _load_graph(report, args.input)
    h = _load_map(report, args.map, graph)
    report.write(args.out, dumps(image_graph(h, _checked(report, graph, args.input))))
    report.data["outcome"] = "ok"
    return OK


def cmd_preimage(args, report: Report) -> int:
    igraph, _ = _load_graph(report, args.input)
    if args.world:
        world, _ = _load_graph(report, args.world)
        h = _load_map(report, args.map, world)
    else:
        # domain = the map's keys, kinds taken from the images' kinds
        try:
            doc = json.loads(report.read(args.map))
            mapping = doc["map"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise InputError(f'{args.map}: expected {{"map": {{event: image}}}}') from None
        acts = [e for e, x in mapping.items() if x in igraph.actions]
        obs = [e for e, x in mapping.items() if x in igraph.observations]
        stray = set(mapping) - set(acts) - set(obs)
        if stray:
            raise InputError(f"events whose image is not in the graph: {sorted(stray)} "
                             "(pass --world to fix the domain)")
        try:
            h = LabelMap(mapping, acts, obs)
        except LabelMapError as exc:
            raise InputError(f"{args.map}: {exc}") from None
    report.write(args.out, dumps(preimage_graph(h, igraph)))
    report.data["outcome"] = "ok"
    return OK


def _observer(report: Report, args, world: PGraph, h: LabelMap, default_divulged: PGraph):
    if args.observer:
        I, _ = _load_graph(report, args.observer)
        _checked(report, I, args.observer)
    else:
        I = finest_observer(world, h)
    if args.divulged:
        D, _ = _load_graph(report, args.divulged)
        _checked(report, D, args.divulged)
    else:
        D = default_divulged
    return I, D


def cmd_check(args, report: Report) -> int:
    problem = _load_problem(report, args)
    pgraph_, extra = _load_graph(report, args.plan)
    _checked(report, pgraph_, args.plan)
    plan = Plan(pgraph_, frozenset(extra.get("term", [])))
    h = _load_map(report, args.map, problem.world)
    I, D = _observer(report, args, problem.world, h, plan.graph)
    phi = _load_phi(report, args)
    verdict = check(problem, plan, D, I, h, phi)
    report.data["verdict"] = {"ok": verdict.ok, "condition": verdict.condition,
                              "message": verdict.message,
                              "witness": list(verdict.witness) if verdict.witness else None,
                              "execution": list(verdict.execution)
                              if verdict.execution is not None else None}
    for n in verdict.notes:
        report.note(n)
    report.data["outcome"] = "ok" if verdict else "failed"
    return OK if verdict else NONE


def _workers_note(report: Report, workers: int) -> None:
    if workers > 1:
        report.note(f"--workers {workers}: search ran sequentially; the result equals "
                    "the single-worker result")


def cmd_solve_p(args, report: Report) -> int:
    problem = _load_problem(report, args)
    h = _load_map(report, args.map, problem.world)
    I, D = _observer(report, args, problem.world, h, problem.world)
    phi = _load_phi(report, args)
    _workers_note(report, args.workers)
    stats = SearchStats()
    config = SeekPConfig(depth_bound=args.depth, budget=args.budget)
    try:
        plan = seek_plan(problem, D, I, h, phi, config, stats)
    except SearchBudgetExceeded:
        report.data["statistics"] = stats.as_dict()
        report.data["outcome"] = "inconclusive"
        return INCONCLUSIVE
    report.data["statistics"] = stats.as_dict()
    if plan is None:
        report.data["outcome"] = "none"
        return NONE
    if args.out:
        report.write(args.out, plan.to_json())
    report.data["outcome"] = "found"
    return OK


def cmd_solve_plm(args, report: Report) -> int:
    problem = _load_problem(report, args)
    phi = _load_phi(report, args)
    _workers_note(report, args.workers)
    stats = SearchStats()
    config = PLMConfig(budget=args.budget)
    try:
        result = seek_plan_and_map(problem, phi, config=config, stats=stats)
    except SearchBudgetExceeded:
        report.data["statistics"] = stats.as_dict()
        report.data["outcome"] = "inconclusive"
        return INCONCLUSIVE
    report.data["statistics"] = stats.as_dict()
    if result is None:
        report.data["outcome"] = "none"
        return NONE
    plan, h = result
    if args.out_plan:
        report.write(args.out_plan, plan.to_json())
    if args.out_map:
        report.write(args.out_map, h.to_json())
    report.data["map_blocks"] = sorted(sorted(b) for b in h.blocks() if len(b) > 1)
    report.data["outcome"] = "found"
    return OK


def cmd_scenario(args, report: Report) -> int:
    from .scenarios import write_scenario
    for path in write_scenario(args.name, Path(args.out_dir)):
        report.data["artifacts"].append(str(path))
    report.data["outcome"] = "ok"
    return OK


def cmd_render(args, report: Report) -> int:
    graph, _ = _load_graph(report, args.input)
    report.write(args.out, to_dot(graph, Path(args.input).stem))
    report.data["outcome"] = "ok"
    return OK


# ---------------------------------------------------------------------------
# parser


def _add_problem(p) -> None:
    p.add_argument("--world", required=True, help="world graph JSON (may carry 'goal')")
    p.add_argument("--goal", help="comma-separated goal vertex ids")


def _add_phi(p) -> None:
    p.add_argument("--phi", help="stipulation text, e.g. '(a | !b) & c'")
    p.add_argument("--phi-file", help="file holding the stipulation on one line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pgplan", description=__doc__.splitlines()[0])
    parser.add_argument("--report", help="write the run report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a graph's structural invariants")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sde", help="state-determined expansion")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sde)

    p = sub.add_parser("product", help="tensor product of two graphs")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("image", help="apply a label map to a graph")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_image)

    p = sub.add_parser("preimage", help="replace image symbols by their preimages")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--world", help="graph whose alphabets define the map's domain")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preimage)

    p = sub.add_parser("check", help="verify a plan against a problem and stipulation")
    _add_problem(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--observer", help="I-state graph (default: finest observer)")
    p.add_argument("--divulged", help="divulged plan graph (default: the plan itself)")
    p.add_argument("--map", help="label map JSON (default: identity)")
    _add_phi(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve-p", help="search for a plan under a fixed observer and map")
    _add_problem(p)
    p.add_argument("--observer", help="I-state graph (default: finest observer)")
    p.add_argument("--divulged", help="divulged plan graph (default: the world)")
    p.add_argument("--map", help="label map JSON (default: identity)")
    _add_phi(p)
    p.add_argument("--depth", type=int, help="depth bound (default: the product bound)")
    p.add_argument("--budget", type=int, help="cap on node expansions")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="where to write the plan JSON")
    p.set_defaults(func=cmd_solve_p)

    p = sub.add_parser("solve-plm", help="search for a plan and a label map together")
    _add_problem(p)
    _add_phi(p)
    p.add_argument("--budget", type=int, help="cap on node expansions")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-plan")
    p.add_argument("--out-map")
    p.set_defaults(func=cmd_solve_plm)

    p = sub.add_parser("scenario", help="write a reference scenario's files")
    p.add_argument("name", choices=["nuclear", "pentagon"])
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("render", help="Graphviz DOT rendering of a graph")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def run(argv: list[str]) -> tuple[int, dict]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else INVALID
        return (OK if code == 0 else INVALID), {"command": argv, "outcome": "invalid",
                                                 "messages": ["bad command line"]}
    report = Report(argv)
    for name in ("depth", "budget"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            report.data["outcome"] = "invalid"
            report.note(f"--{name} must be positive")
            return INVALID, _finish(report)
    if getattr(args, "workers", 1) < 1:
        report.data["outcome"] = "invalid"
        report.note("--workers must be positive")
        return INVALID, _finish(report)
    try:
        code = args.func(args, report)
    except (InputError, PGraphError, LabelMapError, ParseError, ValueError) as exc:
        report.data["outcome"] = "invalid"
        report.note(str(exc))
        code = INVALID
    report_path = args.report
    data = _finish(report)
    if report_path:
        atomic_write(report_path, json.dumps(data, indent=2, sort_keys=True) + "\n")
    return code, data


def _finish(report: Report) -> dict:
    report.data["statistics"].setdefault("elapsed", round(time.perf_counter() - report.began, 6))
    return report.data


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    code, data = run(argv)
    if not any(a == "--report" or a.startswith("--report=") for a in argv):
        json.dump(data, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
