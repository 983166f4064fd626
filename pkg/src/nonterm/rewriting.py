"""Rules, programs and the three rewrite semantics.

Three successor relations are provided:

* term rewriting: match a rule left-hand side against any subterm and
  replace it by the instantiated right-hand side;
* logic-programming narrowing: unify a goal element with a renamed rule
  head and splice in the instantiated body;
* restricted logic programming: instance-based rewriting of a single term
  at the root, limited to rules whose single body atom introduces no new
  variables.

Successor enumeration order is fixed (rule order, then position) so that
searches and certificates are reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .errors import ResourceLimitError
from .substitution import Substitution, apply, match, mgu, renaming_apart
from .terms import (
    Goal,
    Position,
    ROOT,
    Signature,
    Term,
    canonical,
    render,
    render_position,
    replace_at,
    subterm_at,
    iter_positions,
    term_vars,
)


class Mode(enum.Enum):
    TRS = "TRS"
    LP = "LP"


class Semantics(enum.Enum):
    TRS = "TRS"
    LP_NARROW = "LP-NARROW"
    LP_RESTRICTED = "LP-RESTRICTED"


@dataclass(frozen=True)
class Rule:
    id: str
    lhs: Term
    rhs: Goal

    @property
    def trs_usable(self) -> bool:
        return len(self.rhs) == 1

    @property
    def restricted_usable(self) -> bool:
        return len(self.rhs) == 1 and term_vars(self.rhs[0]) <= term_vars(self.lhs)

    def all_vars(self):
        return term_vars(self.lhs) | term_vars(self.rhs)

    def rename(self, theta: Substitution) -> "Rule":
        return Rule(self.id, apply(theta, self.lhs), apply(theta, self.rhs))

    def __repr__(self):
        body = ",".join(render(t) for t in self.rhs)
        return f"{self.id}: {render(self.lhs)} -> <{body}>"


def rename_apart(r: Rule, avoid: Iterable, supply=None) -> Rule:
    """A variant of ``r`` whose variables are disjoint from ``avoid``."""
    gamma = renaming_apart(r.all_vars(), avoid, supply)
    return r.rename(gamma)


@dataclass
class Program:
    rules: list[Rule]
    mode: Mode
    signature: Signature = field(default_factory=Signature)

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    def __repr__(self):
        return f"Program({self.mode.value}, {len(self.rules)} rules)"


@dataclass(frozen=True)
class Step:
    source: Union[Term, Goal]
    rule_id: str
    position: Position
    binder: Substitution
    target: Union[Term, Goal]
    semantics: Semantics

    def __repr__(self):
        return (
            f"{render(self.source)} =[{self.rule_id}@"
            f"{render_position(self.position)}]=> {render(self.target)}"
        )


@dataclass
class Chain:
    start: Union[Term, Goal]
    steps: list[Step]

    @property
    def end(self) -> Union[Term, Goal]:
        return self.steps[-1].target if self.steps else self.start

    def states(self) -> list[Union[Term, Goal]]:
        return [self.start] + [s.target for s in self.steps]

    def consecutive(self) -> bool:
        cur = self.start
        for s in self.steps:
            if s.source != cur:
                return False
            cur = s.target
        return True

    def instantiate(self, theta: Substitution) -> "Chain":
        """Pointwise instance of the chain (valid for the stable semantics)."""
        steps = [
            Step(
                apply(theta, s.source),
                s.rule_id,
                s.position,
                s.binder,
                apply(theta, s.target),
                s.semantics,
            )
            for s in self.steps
        ]
        return Chain(apply(theta, self.start), steps)


def trs_successors(p: Program, s: Term) -> list[Step]:
    """All one-step term-rewriting successors of ``s``."""
    out = []
    for r in p.rules:
        if not r.trs_usable:
            continue
        v = r.rhs[0]
        for pos in iter_positions(s):
            theta = match(r.lhs, subterm_at(s, pos))
            if theta is None:
                continue
            target = replace_at(s, pos, apply(theta, v))
            out.append(Step(s, r.id, pos, theta, target, Semantics.TRS))
    return out


def lp_successors(p: Program, g: Goal) -> list[Step]:
    """All one-step narrowing successors of goal ``g``.

    Rules are renamed apart from ``g`` with ids allocated just above the
    maximum id occurring in ``g``, which makes targets reproducible.
    """
    out = []
    goal_vars = term_vars(g)
    for r in p.rules:
        for i in range(1, len(g) + 1):
            fresh = rename_apart(r, goal_vars)
            theta = mgu(g[i - 1], fresh.lhs)
            if theta is None:
                continue
            new_goal = apply(theta, g[: i - 1] + fresh.rhs + g[i:])
            out.append(Step(g, r.id, (i,), theta, new_goal, Semantics.LP_NARROW))
    return out


def restricted_successors(p: Program, s: Term) -> list[Step]:
    """Root-only instance-based steps for rules with no extra rhs variables."""
    out = []
    for r in p.rules:
        if not r.restricted_usable:
            continue
        theta = match(r.lhs, s)
        if theta is None:
            continue
        target = apply(theta, r.rhs[0])
        out.append(Step(s, r.id, ROOT, theta, target, Semantics.LP_RESTRICTED))
    return out


def successors(
    p: Program, a: Union[Term, Goal], semantics: Semantics
) -> list[Step]:
    if semantics is Semantics.TRS:
        return trs_successors(p, a)
    if semantics is Semantics.LP_NARROW:
        return lp_successors(p, a)
    return restricted_successors(p, a)


#: Default cap on intermediate result sets in run_word.
RUN_WORD_CAP = 10**4


def run_word(
    p: Program,
    a: Union[Term, Goal],
    word: Sequence[str],
    semantics: Semantics,
    cap: int = RUN_WORD_CAP,
) -> list[Union[Term, Goal]]:
    """Everything reachable from ``a`` by applying the rules of ``word``
    in order, at any admissible positions.  The empty word is the identity.
    """
    current: list[Union[Term, Goal]] = [a]
    for rule_id in word:
        p.rule(rule_id)  # raises KeyError if the word mentions unknown rules
        nxt = []
        seen = set()
        for x in current:
            for step in successors(p, x, semantics):
                if step.rule_id != rule_id:
                    continue
                key = canonical(step.target)
                key = key if isinstance(key, tuple) else (key,)
                if key in seen:
                    continue
                seen.add(key)
                nxt.append(step.target)
                if len(nxt) > cap:
                    raise ResourceLimitError(
                        f"run_word exceeded {cap} intermediate results"
                    )
        current = nxt
    return current


def verify_step(p: Program, step: Step) -> bool:
    for cand in successors(p, step.source, step.semantics):
        if (
            cand.rule_id == step.rule_id
            and cand.position == step.position
            and cand.target == step.target
        ):
            return True
    return False


def verify_chain(p: Program, c: Chain) -> bool:
    """Re-execute every step of ``c``; True iff all of them reproduce."""
    if not c.consecutive():
        return False
    return all(verify_step(p, s) for s in c.steps)
