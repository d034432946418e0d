"""Brute-force reference implementations for the test suite.

Everything here is computed from first principles over explicitly
enumerated execution sets.  Only the ``PGraph`` container is borrowed from
the package (its ``vertices``, ``edges``, ``initial``, ``actions`` and
``observations`` attributes); no algorithm is shared.

Formulas are passed as plain clause lists: ``[[(symbol, negated), ...], ...]``.
Label maps are plain dicts from event to image.
"""
from __future__ import annotations

from itertools import combinations, product

MAX_LEN = 6
MAX_VERTICES = 8
MAX_EVENTS = 3


class BudgetRefused(Exception):
    """The instance is outside the oracle's hard caps."""


# ---------------------------------------------------------------------------
# raw graph access


def out_edges(g) -> dict:
    """vertex -> list of (label, target), built from the raw edge table."""
    table = {v: [] for v in g.vertices}
    for (src, dst), labels in g.edges.items():
        for lab in labels:
            table[src].append((lab, dst))
    return table


def is_dag(g) -> bool:
    table = out_edges(g)
    state = {}

    def visit(v):
        state[v] = 1
        for _, t in table[v]:
            if state.get(t) == 1:
                return False
            if t not in state and not visit(t):
                return False
        state[v] = 2
        return True

    return all(visit(v) for v in g.vertices if v not in state)


def longest_path(g) -> int:
    if not is_dag(g):
        raise BudgetRefused("cyclic graph has no finite execution bound")
    table = out_edges(g)
    memo = {}

    def depth(v):
        if v not in memo:
            memo[v] = max((1 + depth(t) for _, t in table[v]), default=0)
        return memo[v]

    return max((depth(v) for v in g.initial), default=0)


def paths(g, k: int):
    """Every (execution, end vertex) pair over individual paths of length <= k."""
    table = out_edges(g)
    result = []
    stack = [((), v) for v in g.initial]
    while stack:
        s, v = stack.pop()
        result.append((s, v))
        if len(s) < k:
            for lab, t in table[v]:
                stack.append((s + (lab,), t))
    return result


def language(g, k: int) -> set:
    return {s for s, _ in paths(g, k)}


def reached(g, s) -> frozenset:
    table = out_edges(g)
    current = set(g.initial)
    for lab in s:
        current = {t for v in current for l2, t in table[v] if l2 == lab}
    return frozenset(current)


def reaching(g, v, k: int) -> set:
    """S(v): executions of length <= k that can end at v."""
    return {s for s, end in paths(g, k) if end == v}


def exact_reach(g, B, k: int) -> set:
    """Executions reaching all of B and nothing outside it, by set algebra."""
    B = frozenset(B)
    by_vertex = {v: set() for v in g.vertices}
    for s, end in paths(g, k):
        by_vertex[end].add(s)
    inside = set.intersection(*(by_vertex[v] for v in B)) if B else set()
    outside = set().union(*(by_vertex[v] for v in g.vertices if v not in B))
    return inside - outside


def transitions_to(g, v, s, w) -> bool:
    table = out_edges(g)
    current = {v}
    for lab in s:
        current = {t for u in current for l2, t in table[u] if l2 == lab}
    return w in current


# ---------------------------------------------------------------------------
# label maps as dicts


def preimage_edges(I, h: dict) -> dict:
    """Edge table of the preimage graph of I: each image symbol becomes every
    event mapping to it."""
    inverse = {}
    for e, x in h.items():
        inverse.setdefault(x, set()).add(e)
    table = {v: [] for v in I.vertices}
    for (src, dst), labels in I.edges.items():
        for x in labels:
            for e in inverse.get(x, ()):
                table[src].append((e, dst))
    return table


class _Table:
    """Minimal stand-in exposing the attributes the helpers above read."""

    def __init__(self, vertices, table, initial):
        self.vertices = vertices
        self.initial = initial
        self.edges = {}
        for v, outs in table.items():
            for lab, t in outs:
                self.edges.setdefault((v, t), set()).add(lab)


def image_graph(W, h: dict):
    table = {v: [(h[lab], t) for lab, t in outs] for v, outs in out_edges(W).items()}
    g = _Table(W.vertices, table, W.initial)
    g.actions = {h[a] for a in W.actions}
    g.observations = {h[o] for o in W.observations}
    return g


def _check_budget(*graphs):
    for g in graphs:
        if len(g.vertices) > MAX_VERTICES * 4:
            raise BudgetRefused("graph too large for brute force")


# ---------------------------------------------------------------------------
# beliefs


def belief_bruteforce(I, D, W, h: dict, B, max_len: int | None = None) -> frozenset:
    """{w : exact-reach(h^-1<I>, B) & L(D) & S_W(w) is nonempty}, with all
    three sets enumerated explicitly."""
    _check_budget(W)
    bound = longest_path(W) if max_len is None else max_len
    pre = _Table(I.vertices, preimage_edges(I, h), I.initial)
    exact = exact_reach(pre, B, bound) if B else set()
    divulged = language(D, bound)
    result = set()
    for w in W.vertices:
        if exact & divulged & reaching(W, w, bound):
            result.add(w)
    return frozenset(result)


# ---------------------------------------------------------------------------
# stipulations


def truth(clauses, belief) -> bool:
    """Evaluate a CNF given as clause lists, by building a Python expression."""
    names = {}
    parts = []
    for clause in clauses:
        lits = []
        for sym, neg in clause:
            var = names.setdefault(sym, f"x{len(names)}")
            lits.append(("not " if neg else "") + var)
        parts.append("(" + " or ".join(lits) + ")")
    env = {var: (sym in belief) for sym, var in names.items()}
    return bool(eval(" and ".join(parts), {"__builtins__": {}}, env))


def clauses_of(formula) -> list:
    return [[(lit.symbol, lit.negated) for lit in clause] for clause in formula.clauses]


# ---------------------------------------------------------------------------
# plan verification


def check_oracle(world, goal, plan_graph, term, D, I, h: dict, clauses) -> bool:
    """Verify a plan by enumerating joint paths one by one (plan halts on
    entering ``term``)."""
    goal, term = set(goal), set(term)
    pt, wt = out_edges(plan_graph), out_edges(world)
    bound = longest_path(world)
    joint = []          # (execution, plan vertex, world vertex)
    stack = [((), p, w) for p in plan_graph.initial for w in world.initial]
    while stack:
        s, p, w = stack.pop()
        joint.append((s, p, w))
        if p in term:
            continue
        for lab, tp in pt[p]:
            for l2, tw in wt[w]:
                if l2 == lab:
                    stack.append((s + (lab,), tp, tw))
        if len(s) > bound:
            raise AssertionError("joint path longer than the world allows")
    live_memo = {}

    def live(p, w):
        key = (p, w)
        if key not in live_memo:
            if p in term:
                live_memo[key] = True
            else:
                live_memo[key] = any(live(tp, tw) for lab, tp in pt[p]
                                     for l2, tw in wt[w] if l2 == lab)
        return live_memo[key]

    for s, p, w in joint:
        if p in term:
            if w not in goal:
                return False
            continue
        p_labels = {lab for lab, _ in pt[p]}
        w_labels = {lab for lab, _ in wt[w]}
        if plan_graph.vertices[p] == "action" and not p_labels <= w_labels:
            return False
        if plan_graph.vertices[p] == "observation" and not w_labels <= p_labels:
            return False
        if not live(p, w):
            return False
    beliefs = {}
    for s in {s for s, _, _ in joint}:
        B = reached(I, [h[e] for e in s])
        if B not in beliefs:
            beliefs[B] = belief_bruteforce(I, D, world, h, B, bound)
        if not truth(clauses, beliefs[B]):
            return False
    return True


# ---------------------------------------------------------------------------
# plan existence, fixed map


def seek_p_oracle(world, goal, D, I, h: dict, clauses) -> bool:
    """Is there a tree plan (one action per action node, termination only at
    goal action vertices) meeting the task and the stipulation?

    Recursion over executions; a subproblem is determined by the world
    vertex and the observer's reached I-states, which is what the memo keys.
    """
    goal = set(goal)
    wt = out_edges(world)
    bound = longest_path(world)
    beliefs = {}
    memo = {}

    def ok_at(B):
        if B not in beliefs:
            beliefs[B] = truth(clauses, belief_bruteforce(I, D, world, h, B, bound))
        return beliefs[B]

    it = out_edges(I)

    def step_i(B, x):
        return frozenset(t for v in B for l2, t in it[v] if l2 == x)

    def win(w, B):
        key = (w, B)
        if key in memo:
            return memo[key]
        result = False
        if ok_at(B):
            moves = wt[w]
            if world.vertices[w] == "action":
                result = w in goal or any(win(t, step_i(B, h[a])) for a, t in moves)
            else:
                result = bool(moves) and all(win(t, step_i(B, h[o])) for o, t in moves)
        memo[key] = result
        return result

    (w0,) = world.initial
    return win(w0, frozenset(I.initial))


# ---------------------------------------------------------------------------
# plan-and-map existence


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def all_maps(actions, observations):
    for pa in set_partitions(sorted(actions)):
        for po in set_partitions(sorted(observations)):
            h = {}
            for block in pa + po:
                name = "|".join(sorted(block))
                for e in block:
                    h[e] = name
            yield h


def _plans_for_map(world, goal, h, kind, belief, counter):
    """Every plan-state tree for a fixed map, as lists of (vertices, edges,
    term, root ids) fragments."""
    wt = out_edges(world)
    states = sorted(belief)
    if kind == "action":
        per_state = []
        for w in states:
            acts = sorted({a for a, _ in wt[w]})
            opts = [frozenset(c) for r in range(1, len(acts) + 1) for c in combinations(acts, r)]
            if belief <= goal:
                opts.append(None)   # terminate
            if not opts:
                return []
            per_state.append(opts)
        results = []
        for combo in product(*per_state):
            choice = dict(zip(states, combo))
            groups = {}
            for w, c in choice.items():
                for a in c or ():
                    groups.setdefault(h[a], set()).update(
                        t for l2, t in wt[w] if l2 == a)
            child_options = []
            for x in sorted(groups):
                child_options.append([(x, sub) for sub in
                                      _plans_for_map(world, goal, h, "observation",
                                                     frozenset(groups[x]), counter)])
            for picked in product(*child_options):
                results.append(("action", belief, choice, dict(picked)))
        return results
    groups = {}
    for w in states:
        if not wt[w]:
            return []
        for o, t in wt[w]:
            groups.setdefault(h[o], set()).add(t)
    child_options = []
    for x in sorted(groups):
        child_options.append([(x, sub) for sub in
                              _plans_for_map(world, goal, h, "action",
                                             frozenset(groups[x]), counter)])
    return [("observation", belief, None, dict(picked)) for picked in product(*child_options)]


def _materialize(world, h, tree):
    """Plan graph (as a stand-in table) for one plan-state tree."""
    wt = out_edges(world)
    vertices, table, term = {}, {}, set()
    ids = {}

    def walk(node):
        nid = len(ids)
        ids[id(node)] = nid
        kind, belief, choice, children = node
        for w in belief:
            vertices[f"{nid}/{w}"] = kind
            table[f"{nid}/{w}"] = []
        for sub in children.values():
            walk(sub)
        for w in belief:
            me = f"{nid}/{w}"
            if kind == "action":
                if choice[w] is None:
                    term.add(me)
                    continue
                labels = choice[w]
            else:
                labels = {o for o, _ in wt[w]}
            for lab, t in wt[w]:
                if lab in labels:
                    child = children[h[lab]]
                    table[me].append((lab, f"{ids[id(child)]}/{t}"))

    walk(tree)
    root_kind, root_belief = tree[0], tree[1]
    g = _Table(vertices, table, {f"0/{w}" for w in root_belief})
    return g, term


def seek_plm_oracle(world, goal, clauses, max_plans: int = 200000) -> bool:
    """Exhaustive search over every total map and every plan-state tree."""
    _check_budget(world)
    if len(world.actions) > MAX_EVENTS or len(world.observations) > MAX_EVENTS:
        raise BudgetRefused("alphabet too large for brute force")
    goal = frozenset(goal)
    (w0,) = world.initial
    kind = world.vertices[w0]
    tried = 0
    for h in all_maps(world.actions, world.observations):
        I = image_graph(world, h)
        for tree in _plans_for_map(world, goal, h, kind, frozenset([w0]), None):
            tried += 1
            if tried > max_plans:
                raise BudgetRefused("too many candidate plans")
            g, term = _materialize(world, h, tree)
            if check_oracle(world, goal, g, term, g, I, h, clauses):
                return True
    return False
