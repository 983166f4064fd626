"""Substitutions: application, composition, matching and unification.

Unification is a Martelli-Montanari-style solved-form transformation with
occurs check.  Results are normalized to an idempotent solved form in
which binding targets never mention domain variables; when either
orientation of a variable-variable equation is legal, the variable with
the smaller id is bound.  This keeps all outputs deterministic.
"""

from __future__ import annotations

from typing import Iterable, Optional, Union

from .terms import (
    App,
    Context,
    Goal,
    Term,
    Var,
    VarSupply,
    is_hole,
    render_term,
    term_vars,
)


class Substitution:
    """A finite map from variables to terms with x -> x bindings dropped."""

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Optional[dict[Var, Term]] = None):
        clean = {}
        if bindings:
            for v, t in bindings.items():
                if t != v:
                    clean[v] = t
        self._bindings = clean

    @property
    def bindings(self) -> dict[Var, Term]:
        return dict(self._bindings)

    def domain(self) -> set[Var]:
        return set(self._bindings)

    def get(self, v: Var) -> Term:
        return self._bindings.get(v, v)

    def is_identity(self) -> bool:
        return not self._bindings

    def restrict(self, vs: Iterable[Var]) -> "Substitution":
        keep = set(vs)
        return Substitution({v: t for v, t in self._bindings.items() if v in keep})

    def is_renaming(self) -> bool:
        targets = list(self._bindings.values())
        return all(isinstance(t, Var) for t in targets) and len(set(targets)) == len(
            targets
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._bindings == other._bindings

    def __hash__(self):
        return hash(frozenset(self._bindings.items()))

    def __len__(self):
        return len(self._bindings)

    def __repr__(self):
        items = sorted(self._bindings.items(), key=lambda kv: kv[0].name)
        inner = ", ".join(f"{v.name} -> {render_term(t)}" for v, t in items)
        return "{" + inner + "}"


EMPTY_SUBST = Substitution()


def apply(theta: Substitution, x: Union[Term, Goal, Context]):
    """Homomorphic extension of ``theta``; holes are fixed points."""
    if isinstance(x, Context):
        return Context(apply(theta, x.body))
    if isinstance(x, tuple):
        return tuple(apply(theta, t) for t in x)
    if isinstance(x, Var):
        return theta.get(x)
    if is_hole(x):
        return x
    return App(x.symbol, tuple(apply(theta, a) for a in x.args))


def compose(sigma: Substitution, theta: Substitution) -> Substitution:
    """The substitution mapping every term s to (s sigma) theta."""
    out: dict[Var, Term] = {}
    for v, t in sigma._bindings.items():
        out[v] = apply(theta, t)
    for v, t in theta._bindings.items():
        if v not in sigma._bindings:
            out[v] = t
    return Substitution(out)


def _occurs(v: Var, t: Term) -> bool:
    if isinstance(t, Var):
        return t == v
    return any(_occurs(v, a) for a in t.args)


def mgu(s: Term, t: Term) -> Optional[Substitution]:
    """Most general unifier of ``s`` and ``t``, or None if none exists."""
    solved: dict[Var, Term] = {}
    stack: list[tuple[Term, Term]] = [(s, t)]

    def bind(v: Var, u: Term) -> bool:
        if _occurs(v, u):
            return False
        one = Substitution({v: u})
        for w in list(solved):
            solved[w] = apply(one, solved[w])
        solved[v] = u
        # keep pending equations in the solved space too
        for i, (a, b) in enumerate(stack):
            stack[i] = (apply(one, a), apply(one, b))
        return True

    while stack:
        a, b = stack.pop()
        if a == b:
            continue
        if isinstance(a, Var) and isinstance(b, Var):
            # deterministic orientation: bind the smaller id
            v, u = (a, b) if a.id < b.id else (b, a)
            if not bind(v, u):
                return None
        elif isinstance(a, Var):
            if not bind(a, b):
                return None
        elif isinstance(b, Var):
            if not bind(b, a):
                return None
        else:
            if a.symbol != b.symbol:
                return None
            stack.extend(zip(a.args, b.args))
    return Substitution(solved)


def match(s: Union[Term, Goal], t: Union[Term, Goal]) -> Optional[Substitution]:
    """Matcher theta with s theta = t and Dom(theta) within Var(s)."""
    bindings: dict[Var, Term] = {}

    def go(a, b) -> bool:
        if isinstance(a, tuple) or isinstance(b, tuple):
            if not (isinstance(a, tuple) and isinstance(b, tuple)):
                return False
            return len(a) == len(b) and all(go(x, y) for x, y in zip(a, b))
        if isinstance(a, Var):
            if a in bindings:
                return bindings[a] == b
            bindings[a] = b
            return True
        if isinstance(b, Var) or a.symbol != b.symbol:
            return False
        return all(go(x, y) for x, y in zip(a.args, b.args))

    if not go(s, t):
        return None
    return Substitution(bindings)


def renaming_apart(
    vs: Iterable[Var], avoid: Iterable[Var], supply: Optional[VarSupply] = None
) -> Substitution:
    """A renaming of ``vs`` whose image avoids ``avoid``.

    Without a supply, fresh ids are allocated deterministically just above
    every id in sight, so the result is a pure function of its inputs.
    """
    vs = sorted(set(vs), key=lambda v: v.id)
    avoid_ids = {v.id for v in avoid} | {v.id for v in vs}
    if supply is None:
        next_id = max(avoid_ids, default=-1) + 1
        out = {}
        for v in vs:
            out[v] = Var(next_id, f"{v.name.rstrip('0123456789_')}{next_id}")
            next_id += 1
        return Substitution(out)
    out = {}
    for v in vs:
        out[v] = supply.fresh(v.name.rstrip("0123456789_") or "x")
    return Substitution(out)


def more_general(s: Union[Term, Goal], t: Union[Term, Goal]) -> bool:
    """True iff ``t`` is an instance of ``s``."""
    return match(s, t) is not None


def generalizes_via(
    theta: Substitution, sigma: Substitution, vs: Iterable[Var]
) -> bool:
    """True iff some eta makes theta.eta pointwise equal sigma on ``vs``.

    Because theta is idempotent, eta = sigma itself works whenever theta
    is at least as general as sigma, so the check is direct.
    """
    for v in vs:
        if apply(sigma, theta.get(v)) != sigma.get(v):
            return False
    return True
