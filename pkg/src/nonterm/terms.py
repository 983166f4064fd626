"""First-order terms, goals, positions and contexts.

Terms are immutable: a term is either a variable or an application of a
function symbol to exactly ``arity`` argument terms.  Goals are finite
tuples of terms.  Contexts are terms over the signature extended with the
two reserved 0-ary hole symbols; they never appear in ordinary terms.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from .errors import HoleMismatchError, InvalidPositionError, ResourceLimitError

#: Hard cap on the node count of any constructed term.
MAX_TERM_SIZE = 10**6


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("symbol name must be non-empty")
        if self.arity < 0:
            raise ValueError("arity must be non-negative")

    def __repr__(self):
        return f"{self.name}/{self.arity}"


# The two reserved hole symbols.  They are kept out of user signatures by
# the parsers and by Signature itself.
HOLE = Symbol("[]", 0)
HOLE2 = Symbol("[]'", 0)
_HOLE_SYMBOLS = (HOLE, HOLE2)


class Signature:
    """A finite set of function symbols with unique names."""

    def __init__(self, symbols: Iterable[Symbol] = ()):
        self._by_name: dict[str, Symbol] = {}
        for sym in symbols:
            self.add(sym)

    def add(self, sym: Symbol) -> Symbol:
        if sym in _HOLE_SYMBOLS:
            raise ValueError("hole symbols are reserved and cannot enter a signature")
        existing = self._by_name.get(sym.name)
        if existing is not None and existing.arity != sym.arity:
            raise ValueError(
                f"symbol {sym.name} used with arities "
                f"{existing.arity} and {sym.arity}"
            )
        self._by_name[sym.name] = sym
        return sym

    def get(self, name: str) -> Optional[Symbol]:
        return self._by_name.get(name)

    @property
    def symbols(self) -> frozenset[Symbol]:
        return frozenset(self._by_name.values())

    def __contains__(self, sym: Symbol) -> bool:
        return self._by_name.get(sym.name) == sym

    def __iter__(self) -> Iterator[Symbol]:
        return iter(sorted(self._by_name.values(), key=lambda s: s.name))


@dataclass(frozen=True)
class Var:
    """A variable, identified by an interned integer id.

    The display name takes no part in equality or hashing, so variants
    that differ only in how variables are printed still compare different
    (ids differ) while a renamed copy of a variable keeps its identity.
    """

    id: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", f"x{self.id}")

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class App:
    symbol: Symbol
    args: tuple["Term", ...] = ()

    def __post_init__(self):
        if len(self.args) != self.symbol.arity:
            raise ValueError(
                f"{self.symbol.name} expects {self.symbol.arity} arguments, "
                f"got {len(self.args)}"
            )

    def __repr__(self):
        return render_term(self)


Term = Union[Var, App]
Goal = tuple[Term, ...]
Position = tuple[int, ...]

#: The root position.
ROOT: Position = ()


class VarSupply:
    """Monotonically increasing source of globally fresh variables.

    One supply is owned by each analysis session; the increment is
    serialized so values may be handed to concurrent workers.
    """

    def __init__(self, start: int = 0):
        self._counter = itertools.count(start)
        self._lock = threading.Lock()

    def fresh(self, hint: str = "x") -> Var:
        with self._lock:
            n = next(self._counter)
        return Var(n, f"{hint}_{n}")


def is_hole(t: Term) -> bool:
    return isinstance(t, App) and t.symbol in _HOLE_SYMBOLS


def app(symbol: Symbol, *args: Term) -> App:
    return App(symbol, tuple(args))


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def check_size(t: Term, limit: int = MAX_TERM_SIZE) -> Term:
    if term_size(t) > limit:
        raise ResourceLimitError(f"term exceeds {limit} nodes")
    return t


def positions(t: Term) -> set[Position]:
    """All positions of ``t``, root included, 1-indexed arguments."""
    out: set[Position] = {ROOT}
    if isinstance(t, App):
        for i, arg in enumerate(t.args, start=1):
            out.update((i,) + p for p in positions(arg))
    return out


def iter_positions(t: Term) -> Iterator[Position]:
    """Positions of ``t`` in lexicographic (prefix, left-to-right) order."""
    yield ROOT
    if isinstance(t, App):
        for i, arg in enumerate(t.args, start=1):
            for p in iter_positions(arg):
                yield (i,) + p


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if not isinstance(t, App) or not (1 <= i <= len(t.args)):
            raise InvalidPositionError(f"position {render_position(p)} not in term")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, p: Position, u: Term) -> Term:
    if not p:
        return u
    i = p[0]
    if not isinstance(t, App) or not (1 <= i <= len(t.args)):
        raise InvalidPositionError(f"position {render_position(p)} not in term")
    args = list(t.args)
    args[i - 1] = replace_at(args[i - 1], p[1:], u)
    return App(t.symbol, tuple(args))


def term_vars(t: Union[Term, Goal]) -> set[Var]:
    if isinstance(t, tuple):
        out: set[Var] = set()
        for s in t:
            out |= term_vars(s)
        return out
    if isinstance(t, Var):
        return {t}
    out = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def max_var_id(t: Union[Term, Goal]) -> int:
    vs = term_vars(t)
    return max((v.id for v in vs), default=-1)


# ---------------------------------------------------------------------------
# Contexts


@dataclass(frozen=True)
class Context:
    """A term over the extended signature with hole occurrences.

    ``body`` may contain the primary hole only (one-hole context) or both
    the primary and the secondary hole (two-hole context, used by the
    recurrent-pair machinery).
    """

    body: Term

    @property
    def holes(self) -> frozenset[Symbol]:
        found = set()

        def walk(t: Term):
            if isinstance(t, App):
                if t.symbol in _HOLE_SYMBOLS:
                    found.add(t.symbol)
                for a in t.args:
                    walk(a)

        walk(self.body)
        return frozenset(found)

    @property
    def is_two_hole(self) -> bool:
        return self.holes == frozenset(_HOLE_SYMBOLS)

    def __repr__(self):
        return render_term(self.body)


#: The trivial context consisting of the hole alone.
EMPTY_CONTEXT = Context(App(HOLE))


def _replace_symbol(t: Term, sym: Symbol, u: Term) -> Term:
    if isinstance(t, Var):
        return t
    if t.symbol == sym:
        return u
    return App(t.symbol, tuple(_replace_symbol(a, sym, u) for a in t.args))


def plug(c: Context, t: Term) -> Term:
    """Replace every primary-hole occurrence of ``c`` by ``t``."""
    holes = c.holes
    if not holes:
        raise HoleMismatchError("context has no hole")
    if HOLE2 in holes:
        raise HoleMismatchError("two-hole context requires plug2")
    return check_size(_replace_symbol(c.body, HOLE, t))


def plug2(c: Context, t: Term, t2: Term) -> Term:
    """Fill both holes of a two-hole context."""
    if not c.is_two_hole:
        raise HoleMismatchError("plug2 requires a two-hole context")
    out = _replace_symbol(_replace_symbol(c.body, HOLE, t), HOLE2, t2)
    return check_size(out)


def context_power(c: Context, n: int) -> Context:
    """n-fold embedding of a one-hole context into itself."""
    if n < 0:
        raise ValueError("exponent must be non-negative")
    if HOLE2 in c.holes:
        raise HoleMismatchError("context_power requires a one-hole context")
    body: Term = App(HOLE)
    for _ in range(n):
        body = check_size(_replace_symbol(c.body, HOLE, body))
    return Context(body)


def hole_positions(c: Context, sym: Symbol = HOLE) -> list[Position]:
    out = []
    for p in iter_positions(c.body):
        s = subterm_at(c.body, p)
        if isinstance(s, App) and s.symbol == sym:
            out.append(p)
    return out


@dataclass(frozen=True)
class GoalContext:
    """A goal with a single hole sitting between prefix and suffix."""

    prefix: Goal = ()
    suffix: Goal = ()

    def plug(self, g: Goal) -> Goal:
        return self.prefix + g + self.suffix

    def __repr__(self):
        parts = [render_term(t) for t in self.prefix]
        parts.append("[]")
        parts.extend(render_term(t) for t in self.suffix)
        return "<" + ",".join(parts) + ">"


EMPTY_GOAL_CONTEXT = GoalContext()


# ---------------------------------------------------------------------------
# Rendering

def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.symbol.name
    return t.symbol.name + "(" + ",".join(render_term(a) for a in t.args) + ")"


def render_goal(g: Goal) -> str:
    return "<" + ",".join(render_term(t) for t in g) + ">"


def render(x: Union[Term, Goal]) -> str:
    return render_goal(x) if isinstance(x, tuple) else render_term(x)


def render_position(p: Position) -> str:
    return "eps" if not p else ".".join(str(i) for i in p)


# ---------------------------------------------------------------------------
# Canonical variable numbering (variant equivalence)

def canonical(x: Union[Term, Goal]) -> Union[Term, Goal]:
    """Renumber variables left-to-right by first occurrence.

    Two terms (or goals) are variants iff their canonical forms are
    structurally equal.
    """
    mapping: dict[Var, Var] = {}

    def walk(t: Term) -> Term:
        if isinstance(t, Var):
            if t not in mapping:
                mapping[t] = Var(len(mapping), f"v{len(mapping)}")
            return mapping[t]
        return App(t.symbol, tuple(walk(a) for a in t.args))

    if isinstance(x, tuple):
        return tuple(walk(t) for t in x)
    return walk(x)


def is_variant(a: Union[Term, Goal], b: Union[Term, Goal]) -> bool:
    return canonical(a) == canonical(b)
