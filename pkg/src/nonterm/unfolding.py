"""Depth-bounded program transformations.

Three "compression" transformations are provided, each as the depth-k
fragment of an intrinsically infinite closure:

* dependency-pair unfolding for term rewrite systems (marked-symbol
  pairs narrowed forwards and backwards),
* binary unfolding for logic programs under leftmost selection,
* the overlap closure of a term rewrite system.

Every produced rule carries a provenance record; replaying it from the
parent rules reconstructs the rule up to variable renaming.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ResourceLimitError
from .rewriting import Mode, Program, Rule, rename_apart
from .substitution import Substitution, apply, compose, mgu
from .terms import (
    App,
    Position,
    ROOT,
    Symbol,
    Term,
    canonical,
    iter_positions,
    replace_at,
    subterm_at,
    term_vars,
)

MARK_SUFFIX = "#"

#: Default bounds: unfolding depth and global rule cap.
DEFAULT_DEPTH = 4
DEFAULT_RULE_CAP = 50_000


@dataclass(frozen=True)
class ProvenanceStep:
    kind: str  # dp | forward | backward | binunf-A | binunf-B | binunf-C
    #        | oc-forward | oc-backward | base
    parents: tuple[str, ...]
    position: Position
    unifier: Substitution

    def __repr__(self):
        return f"{self.kind}({','.join(self.parents)})"


@dataclass(frozen=True)
class UnfoldedRule:
    rule: Rule
    depth: int
    provenance: ProvenanceStep

    def __repr__(self):
        return f"{self.rule!r}  [depth {self.depth}, {self.provenance!r}]"


class MarkedSignature:
    """Injective association of defined symbols with fresh marked copies."""

    def __init__(self, defined):
        self._marked = {f: Symbol(f.name + MARK_SUFFIX, f.arity) for f in defined}

    def mark(self, sym: Symbol) -> Symbol:
        return self._marked[sym]

    @staticmethod
    def is_marked(sym: Symbol) -> bool:
        return sym.name.endswith(MARK_SUFFIX)

    @staticmethod
    def unmark(sym: Symbol) -> Symbol:
        if not MarkedSignature.is_marked(sym):
            return sym
        return Symbol(sym.name[: -len(MARK_SUFFIX)], sym.arity)


def defined_symbols(r: Program) -> set[Symbol]:
    """Root symbols of left-hand sides."""
    out = set()
    for rule in r.rules:
        if isinstance(rule.lhs, App):
            out.add(rule.lhs.symbol)
    return out


def mark_root(t: Term, marks: MarkedSignature) -> Term:
    if not isinstance(t, App):
        raise ValueError("cannot mark a variable")
    return App(marks.mark(t.symbol), t.args)


def unmark_root(t: Term) -> Term:
    if isinstance(t, App) and MarkedSignature.is_marked(t.symbol):
        return App(MarkedSignature.unmark(t.symbol), t.args)
    return t


def dependency_pairs(r: Program) -> list[UnfoldedRule]:
    """Marked-root pairs extracted from defined-symbol subterms of rhs."""
    defined = defined_symbols(r)
    marks = MarkedSignature(defined)
    out = []
    n = 0
    for rule in r.rules:
        if not isinstance(rule.lhs, App):
            continue
        for t in rule.rhs:
            for pos in iter_positions(t):
                sub = subterm_at(t, pos)
                if isinstance(sub, App) and sub.symbol in defined:
                    n += 1
                    pair = Rule(
                        f"dp{n}",
                        mark_root(rule.lhs, marks),
                        (mark_root(sub, marks),),
                    )
                    out.append(
                        UnfoldedRule(
                            pair,
                            0,
                            ProvenanceStep("dp", (rule.id,), pos, Substitution()),
                        )
                    )
    return out


def _dedup_key(rule: Rule):
    return canonical((rule.lhs,) + rule.rhs)


class _Pool:
    """Accumulates unfolded rules with variant deduplication and a cap."""

    def __init__(self, cap: int):
        self.cap = cap
        self.items: list[UnfoldedRule] = []
        self.by_id: dict[str, UnfoldedRule] = {}
        self._keys: set = set()

    def add(self, u: UnfoldedRule) -> Optional[UnfoldedRule]:
        key = _dedup_key(u.rule)
        if key in self._keys:
            return None
        if len(self.items) >= self.cap:
            raise ResourceLimitError(f"unfolding exceeded {self.cap} rules")
        self._keys.add(key)
        self.items.append(u)
        self.by_id[u.rule.id] = u
        return u


def _narrow_pair(
    lhs: Term,
    rhs: Term,
    pos: Position,
    with_rule: Rule,
    forward: bool,
    allow_var: bool,
) -> Optional[tuple[Rule, Substitution, Rule]]:
    """Narrow one side of a pair at ``pos`` with ``with_rule``.

    Forward narrowing rewrites ``rhs`` with the rule as is; backward
    narrowing rewrites ``lhs`` with the reversed rule.  Returns the new
    (unnamed) pair, the unifier and the renamed variant actually used.
    """
    if len(with_rule.rhs) != 1:
        return None
    target = rhs if forward else lhs
    sub = subterm_at(target, pos)
    if not allow_var and not isinstance(sub, App):
        return None
    fresh = rename_apart(with_rule, term_vars(lhs) | term_vars(rhs))
    src, dst = (
        (fresh.lhs, fresh.rhs[0]) if forward else (fresh.rhs[0], fresh.lhs)
    )
    theta = mgu(sub, src)
    if theta is None:
        return None
    new_target = apply(theta, replace_at(target, pos, dst))
    other = apply(theta, lhs if forward else rhs)
    if forward:
        pair = Rule("", other, (new_target,))
    else:
        pair = Rule("", new_target, (other,))
    return pair, theta, fresh


def unfold_trs(
    r: Program,
    max_depth: int = DEFAULT_DEPTH,
    cap: int = DEFAULT_RULE_CAP,
) -> list[UnfoldedRule]:
    """Depth-bounded dependency-pair unfolding of a TRS.

    Depth 0 is the set of dependency pairs.  Each later depth narrows one
    side of an unfolded pair: below the root with the base rules (variable
    subterms allowed), at the root with a dependency pair.
    """
    if r.mode is not Mode.TRS:
        raise ValueError("unfold_trs requires a TRS program")
    dps = dependency_pairs(r)
    pool = _Pool(cap)
    for u in dps:
        pool.add(u)
    frontier = list(pool.items)
    counter = 0
    for depth in range(1, max_depth + 1):
        new_frontier = []
        for parent in frontier:
            u, v = parent.rule.lhs, parent.rule.rhs[0]
            candidates = []
            # forward: narrow a subterm of the rhs
            for pos in iter_positions(v):
                if pos == ROOT:
                    for dp in dps:
                        candidates.append(("forward", pos, dp.rule, True))
                else:
                    for base in r.rules:
                        candidates.append(("forward", pos, base, True))
            # backward: narrow a subterm of the lhs with reversed rules
            for pos in iter_positions(u):
                if pos == ROOT:
                    for dp in dps:
                        candidates.append(("backward", pos, dp.rule, True))
                else:
                    for base in r.rules:
                        candidates.append(("backward", pos, base, True))
            for kind, pos, with_rule, allow_var in candidates:
                res = _narrow_pair(u, v, pos, with_rule, kind == "forward", allow_var)
                if res is None:
                    continue
                pair, theta, _ = res
                counter += 1
                named = Rule(f"u{counter}", pair.lhs, pair.rhs)
                added = pool.add(
                    UnfoldedRule(
                        named,
                        depth,
                        ProvenanceStep(
                            kind, (parent.rule.id, with_rule.id), pos, theta
                        ),
                    )
                )
                if added is not None:
                    new_frontier.append(added)
        frontier = new_frontier
        if not frontier:
            break
    return pool.items


def overlap_closure(
    r: Program,
    max_depth: int = DEFAULT_DEPTH,
    cap: int = DEFAULT_RULE_CAP,
) -> list[UnfoldedRule]:
    """Depth-bounded overlap closure: depth 0 is the program itself;
    each later depth overlaps two closure elements forwards or backwards
    at a non-variable subterm.
    """
    if r.mode is not Mode.TRS:
        raise ValueError("overlap_closure requires a TRS program")
    pool = _Pool(cap)
    for rule in r.rules:
        if rule.trs_usable:
            pool.add(
                UnfoldedRule(
                    rule, 0, ProvenanceStep("base", (rule.id,), ROOT, Substitution())
                )
            )
    frontier = list(pool.items)
    counter = 0
    for depth in range(1, max_depth + 1):
        new_frontier = []
        known = list(pool.items)
        # overlap every known pair in which at least one member is new at
        # the previous depth
        for a in known:
            for b in known:
                if a.depth != depth - 1 and b.depth != depth - 1:
                    continue
                u1, v1 = a.rule.lhs, a.rule.rhs[0]
                # forward: narrow a non-variable subterm of a's rhs with b
                for pos in iter_positions(v1):
                    res = _narrow_pair(u1, v1, pos, b.rule, True, False)
                    if res is None:
                        continue
                    pair, theta, _ = res
                    counter += 1
                    added = pool.add(
                        UnfoldedRule(
                            Rule(f"oc{counter}", pair.lhs, pair.rhs),
                            depth,
                            ProvenanceStep(
                                "oc-forward", (a.rule.id, b.rule.id), pos, theta
                            ),
                        )
                    )
                    if added is not None:
                        new_frontier.append(added)
                # backward: narrow a non-variable subterm of b's lhs with
                # the reversal of a
                u2, v2 = b.rule.lhs, b.rule.rhs[0]
                for pos in iter_positions(u2):
                    res = _narrow_pair(u2, v2, pos, a.rule, False, False)
                    if res is None:
                        continue
                    pair, theta, _ = res
                    counter += 1
                    added = pool.add(
                        UnfoldedRule(
                            Rule(f"oc{counter}", pair.lhs, pair.rhs),
                            depth,
                            ProvenanceStep(
                                "oc-backward", (a.rule.id, b.rule.id), pos, theta
                            ),
                        )
                    )
                    if added is not None:
                        new_frontier.append(added)
        frontier = new_frontier
        if not frontier:
            break
    return pool.items


def binary_unfold(
    p: Program,
    max_depth: int = DEFAULT_DEPTH,
    cap: int = DEFAULT_RULE_CAP,
) -> list[UnfoldedRule]:
    """Depth-bounded binary unfolding of a logic program.

    Derived rules all have right-hand sides of length at most one.  A
    derivation erases a proven prefix of a rule body with derived unit
    rules, then either keeps the next body atom (A), narrows it with a
    derived binary rule (B), or erases the whole body (C).
    """
    if p.mode is not Mode.LP:
        raise ValueError("binary_unfold requires an LP program")
    pool = _Pool(cap)
    counter = 0

    def emit(rule_lhs, rule_rhs, depth, kind, parents, pos, theta):
        nonlocal counter
        counter += 1
        named = Rule(f"b{counter}", rule_lhs, rule_rhs)
        return pool.add(
            UnfoldedRule(named, depth, ProvenanceStep(kind, parents, pos, theta))
        )

    def erase_prefix(rule: Rule, upto: int, units: list[UnfoldedRule]):
        """All ways of erasing body atoms 1..upto with derived unit rules.

        Yields (accumulated substitution, used unit ids, max unit depth).
        """
        states = [(Substitution(), (), -1)]
        for j in range(upto):
            nxt = []
            for theta, used, dmax in states:
                vj = apply(theta, rule.rhs[j])
                for unit in units:
                    fresh = rename_apart(
                        unit.rule, term_vars(rule.lhs) | term_vars(rule.rhs)
                    )
                    sigma = mgu(vj, fresh.lhs)
                    if sigma is None:
                        continue
                    nxt.append(
                        (
                            compose(theta, sigma),
                            used + (unit.rule.id,),
                            max(dmax, unit.depth),
                        )
                    )
            states = nxt
            if not states:
                return []
        return states

    for iteration in range(max_depth + 1):
        units = [u for u in pool.items if len(u.rule.rhs) == 0]
        binaries = [u for u in pool.items if len(u.rule.rhs) == 1]
        before = len(pool.items)
        for rule in p.rules:
            n = len(rule.rhs)
            # clause (C): erase the entire body
            for theta, used, dmax in erase_prefix(rule, n, units):
                depth = dmax + 1
                if depth > max_depth:
                    continue
                emit(
                    apply(theta, rule.lhs),
                    (),
                    depth,
                    "binunf-C",
                    (rule.id,) + used,
                    (n,),
                    theta,
                )
            for i in range(1, n + 1):
                for theta, used, dmax in erase_prefix(rule, i - 1, units):
                    # clause (A): keep body atom i
                    depth = dmax + 1
                    if depth <= max_depth:
                        emit(
                            apply(theta, rule.lhs),
                            (apply(theta, rule.rhs[i - 1]),),
                            depth,
                            "binunf-A",
                            (rule.id,) + used,
                            (i,),
                            theta,
                        )
                    # clause (B): additionally narrow body atom i
                    vi = apply(theta, rule.rhs[i - 1])
                    for binr in binaries:
                        fresh = rename_apart(
                            binr.rule, term_vars(rule.lhs) | term_vars(rule.rhs)
                        )
                        sigma = mgu(vi, fresh.lhs)
                        if sigma is None:
                            continue
                        depth = max(dmax, binr.depth) + 1
                        if depth > max_depth:
                            continue
                        acc = compose(theta, sigma)
                        emit(
                            apply(acc, rule.lhs),
                            (apply(sigma, fresh.rhs[0]),),
                            depth,
                            "binunf-B",
                            (rule.id,) + used + (binr.rule.id,),
                            (i,),
                            acc,
                        )
        if len(pool.items) == before:
            break
    return pool.items


def unfolded_program(
    rules: list[UnfoldedRule], mode: Mode, signature=None
) -> Program:
    """Wrap unfolded rules as a runnable program."""
    from .terms import Signature

    plain = [u.rule if isinstance(u, UnfoldedRule) else u for u in rules]
    return Program(plain, mode, signature or Signature())


# ---------------------------------------------------------------------------
# Provenance replay

def replay_provenance(
    u: UnfoldedRule,
    base: Program,
    pool: dict[str, UnfoldedRule],
) -> Optional[Rule]:
    """Reconstruct ``u.rule`` from its parents; None if not replayable.

    The reconstruction is deterministic, so callers can compare the result
    with the stored rule up to variant equivalence.
    """
    pv = u.provenance

    def lookup(rule_id: str) -> Optional[Rule]:
        if rule_id in pool:
            return pool[rule_id].rule
        try:
            return base.rule(rule_id)
        except KeyError:
            return None

    if pv.kind == "base":
        return lookup(pv.parents[0])
    if pv.kind == "dp":
        parent = lookup(pv.parents[0])
        if parent is None:
            return None
        marks = MarkedSignature(defined_symbols(base))
        sub = subterm_at(parent.rhs[0], pv.position)
        return Rule(u.rule.id, mark_root(parent.lhs, marks), (mark_root(sub, marks),))
    if pv.kind in ("forward", "backward", "oc-forward", "oc-backward"):
        parent = lookup(pv.parents[0])
        with_rule = lookup(pv.parents[1])
        if parent is None or with_rule is None:
            return None
        res = _narrow_pair(
            parent.lhs,
            parent.rhs[0],
            pv.position,
            with_rule,
            pv.kind in ("forward", "oc-forward"),
            not pv.kind.startswith("oc"),
        )
        if res is None:
            return None
        pair, _, _ = res
        return Rule(u.rule.id, pair.lhs, pair.rhs)
    if pv.kind.startswith("binunf"):
        rule = lookup(pv.parents[0])
        if rule is None:
            return None
        used = [lookup(x) for x in pv.parents[1:]]
        if any(x is None for x in used):
            return None
        theta = Substitution()
        if pv.kind == "binunf-B":
            *units, binr = used
        else:
            units, binr = used, None
        for j, unit in enumerate(units):
            fresh = rename_apart(unit, term_vars(rule.lhs) | term_vars(rule.rhs))
            sigma = mgu(apply(theta, rule.rhs[j]), fresh.lhs)
            if sigma is None:
                return None
            theta = compose(theta, sigma)
        if pv.kind == "binunf-C":
            return Rule(u.rule.id, apply(theta, rule.lhs), ())
        i = pv.position[0]
        if pv.kind == "binunf-A":
            return Rule(
                u.rule.id,
                apply(theta, rule.lhs),
                (apply(theta, rule.rhs[i - 1]),),
            )
        fresh = rename_apart(binr, term_vars(rule.lhs) | term_vars(rule.rhs))
        sigma = mgu(apply(theta, rule.rhs[i - 1]), fresh.lhs)
        if sigma is None:
            return None
        acc = compose(theta, sigma)
        return Rule(u.rule.id, apply(acc, rule.lhs), (apply(sigma, fresh.rhs[0]),))
    return None
