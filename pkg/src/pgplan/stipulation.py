"""CNF stipulations over world-vertex symbols.

Concrete syntax::

    formula := clause ("&" clause)*
    clause  := "(" literals ")" | literals
    literals:= literal ("|" literal)*
    literal := "!" symbol | symbol

A symbol is a run of characters other than whitespace and ``!|&()"``, or a
double-quoted string for vertex ids that contain those characters.  ``&``
binds looser than ``|``.  A symbol is true of a belief (a set of world
vertices) iff the vertex it names is in the belief.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, NamedTuple

_SPECIAL = set('!|&()"')
_BARE = re.compile(r'[^\s!|&()"]+')


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str) -> None:
        self.position = position
        self.text = text
        super().__init__(f"{message} at column {position + 1}: {text!r}")


class Literal(NamedTuple):
    symbol: str
    negated: bool = False

    def value(self, belief: frozenset[str] | set[str]) -> bool:
        return (self.symbol in belief) != self.negated

    def __str__(self) -> str:
        return ("!" if self.negated else "") + _quote(self.symbol)


@dataclass(frozen=True)
class Formula:
    clauses: tuple[tuple[Literal, ...], ...]
    # per clause: (symbols of plain literals, symbols of negated literals)
    _split: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.clauses or any(not c for c in self.clauses):
            raise ValueError("a formula needs at least one clause and no empty clauses")
        object.__setattr__(self, "_split", tuple(map(_split_clause, self.clauses)))

    @property
    def symbols(self) -> frozenset[str]:
        return frozenset(lit.symbol for clause in self.clauses for lit in clause)

    def __str__(self) -> str:
        return " & ".join("(" + " | ".join(map(str, c)) + ")" for c in self.clauses)


@lru_cache(maxsize=4096)
def _split_clause(clause: tuple[Literal, ...]) -> tuple[frozenset[str], frozenset[str]]:
    return (frozenset(lit.symbol for lit in clause if not lit.negated),
            frozenset(lit.symbol for lit in clause if lit.negated))


def _quote(symbol: str) -> str:
    if _BARE.fullmatch(symbol):
        return symbol
    return '"' + symbol.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _tokens(text: str) -> Iterator[tuple[str, str, int]]:
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "!|&()":
            yield ch, ch, i
            i += 1
        elif ch == '"':
            j, buf = i + 1, []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                buf.append(text[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated quoted symbol", i, text)
            if not buf:
                raise ParseError("empty quoted symbol", i, text)
            yield "SYM", "".join(buf), i
            i = j + 1
        else:
            m = _BARE.match(text, i)
            if not m:
                raise ParseError(f"unexpected character {ch!r}", i, text)
            yield "SYM", m.group(), i
            i = m.end()
    yield "EOF", "", n


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.toks = list(_tokens(text))
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.pos]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            what = "end of input" if tok[0] == "EOF" else repr(tok[1])
            expected = {"SYM": "a symbol", "EOF": "end of input"}.get(kind, repr(kind))
            raise ParseError(f"expected {expected}, found {what}", tok[2], self.text)
        self.pos += 1
        return tok

    def formula(self) -> Formula:
        clauses = [self.clause()]
        while self.peek()[0] == "&":
            self.pos += 1
            clauses.append(self.clause())
        self.take("EOF")
        return Formula(tuple(clauses))

    def clause(self) -> tuple[Literal, ...]:
        if self.peek()[0] == "(":
            self.pos += 1
            if self.peek()[0] == ")":
                raise ParseError("empty clause", self.peek()[2], self.text)
            lits = self.literals()
            self.take(")")
            return lits
        return self.literals()

    def literals(self) -> tuple[Literal, ...]:
        lits = [self.literal()]
        while self.peek()[0] == "|":
            self.pos += 1
            lits.append(self.literal())
        return tuple(lits)

    def literal(self) -> Literal:
        kind, _, where = self.peek()
        if kind == "!":
            self.pos += 1
            nxt = self.peek()
            if nxt[0] in ("!", "("):
                raise ParseError("negation applies to symbols only (formula must be CNF)",
                                 nxt[2], self.text)
            return Literal(self.take("SYM")[1], True)
        if kind == "(":
            raise ParseError("nested parentheses (formula must be CNF)", where, self.text)
        if kind in ("&", "|", ")", "EOF"):
            raise ParseError("empty clause or missing literal", where, self.text)
        return Literal(self.take("SYM")[1], False)


def parse(text: str) -> Formula:
    """Parse a CNF stipulation; raises :class:`ParseError` with a column."""
    return _Parser(text).formula()


def bind(formula: Formula, vertices: Iterable[str]) -> Formula:
    """Check that every symbol names a world vertex; returns the formula."""
    known = set(vertices)
    unknown = sorted(formula.symbols - known)
    if unknown:
        raise ValueError(f"stipulation mentions unknown world vertices: {unknown}")
    return formula


def evaluate(formula: Formula, belief: Iterable[str]) -> bool:
    """Value of the formula when exactly the vertices in ``belief`` are true."""
    if belief.__class__ is not frozenset and not isinstance(belief, (set, frozenset)):
        belief = frozenset(belief)
    # a clause is false when no plain symbol is present and every negated one is
    for plain, negated in formula._split:
        if plain.isdisjoint(belief) and negated <= belief:
            return False
    return True


def satfd(B: Iterable[str], formula: Formula,
          belief_of: Callable[[frozenset[str]], frozenset[str]]) -> bool:
    """Whether the stipulation holds at observer I-states ``B``.

    ``belief_of`` maps a set of I-states to the estimated world states, e.g.
    :meth:`pgplan.observer.BeliefEstimator.belief`.
    """
    return evaluate(formula, belief_of(frozenset(B)))


def always_true(symbol: str) -> Formula:
    """The tautology ``symbol | !symbol``."""
    return Formula(((Literal(symbol), Literal(symbol, True)),))
