"""Non-termination witnesses: loops and recurrent pairs.

A loop is a finite rewrite a =w=> a' where a' embeds an instance of a
(term rewriting) or a more general goal than a (narrowing).  Either
relation is compatible with the respective rewrite relation, so a loop
unrolls into an infinite chain; ``infinite_chain_prefix`` materializes a
finite prefix of that chain, step by step, so it can be re-verified.

A recurrent pair is a pair of finite chains shaped so that one rule word
peels a tower of contexts while the other rebuilds it, certifying an
infinite chain alternating the two words; ``witness_chain`` materializes
its prefix with exact exponent bookkeeping.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .rewriting import (
    Chain,
    Program,
    Rule,
    Semantics,
    Step,
    lp_successors,
    successors,
)
from .substitution import Substitution, apply, compose, match
from .terms import (
    App,
    Context,
    EMPTY_CONTEXT,
    Goal,
    GoalContext,
    HOLE,
    HOLE2,
    ROOT,
    Term,
    Var,
    canonical,
    hole_positions,
    is_hole,
    iter_positions,
    plug,
    plug2,
    render,
    replace_at,
    subterm_at,
    term_vars,
)


class EmbeddingKind(enum.Enum):
    INS = "ins"  # target embeds an instance of source
    MG = "mg"  # target embeds a goal/term more general than source


@dataclass(frozen=True)
class Embedding:
    kind: EmbeddingKind
    context: Union[Context, GoalContext]
    binder: Substitution

    def is_trivial_context(self) -> bool:
        if isinstance(self.context, GoalContext):
            return not self.context.prefix and not self.context.suffix
        return self.context.body == App(HOLE)


@dataclass
class LoopWitness:
    word: tuple[str, ...]
    start: Union[Term, Goal]
    end: Union[Term, Goal]
    embedding: Embedding
    semantics: Semantics
    chain: Chain


@dataclass
class RecurrentPair:
    chain1: Chain
    chain2: Chain
    c1: Context  # two-hole context
    c2: Context  # one-hole context
    n1: int
    n2: int
    n3: int
    n4: int
    s: Term  # ground base of the towers
    t_is_s: bool  # the regrown base: the ground term (True) or x (False)
    x: Var
    y: Var
    semantics: Semantics

    @property
    def word1(self) -> tuple[str, ...]:
        return tuple(st.rule_id for st in self.chain1.steps)

    @property
    def word2(self) -> tuple[str, ...]:
        return tuple(st.rule_id for st in self.chain2.steps)


class Budget:
    """Wall-clock and node budget for a search; never produces wrong NOs,
    only degrades to "nothing found"."""

    def __init__(self, timeout: Optional[float] = None, node_cap: int = 200_000):
        self.deadline = time.monotonic() + timeout if timeout else None
        self.node_cap = node_cap
        self.nodes = 0
        self.exhausted = False

    def tick(self, n: int = 1) -> bool:
        """Consume budget; True while budget remains."""
        self.nodes += n
        if self.nodes > self.node_cap or (
            self.deadline is not None and time.monotonic() > self.deadline
        ):
            self.exhausted = True
        return not self.exhausted


# ---------------------------------------------------------------------------
# Embedding search


def find_embedding(
    kind: EmbeddingKind,
    source: Union[Term, Goal],
    target: Union[Term, Goal],
    full_context: bool = True,
) -> Optional[Embedding]:
    """Smallest-position embedding witness of ``source`` in ``target``.

    With ``full_context=False`` only the context-free simplification is
    tried: plain instance (ins) or plain generality (mg) of the whole
    target.
    """
    if isinstance(source, tuple) != isinstance(target, tuple):
        raise ValueError("source and target must both be terms or both goals")
    if isinstance(source, tuple):
        return _find_goal_embedding(kind, source, target, full_context)
    return _find_term_embedding(kind, source, target, full_context)


def _find_term_embedding(kind, source: Term, target: Term, full_context):
    spots = iter_positions(target) if full_context else [ROOT]
    for p in spots:
        sub = subterm_at(target, p)
        theta = (
            match(source, sub) if kind is EmbeddingKind.INS else match(sub, source)
        )
        if theta is None:
            continue
        ctx = Context(replace_at(target, p, App(HOLE)))
        return Embedding(kind, ctx, theta)
    return None


def _find_goal_embedding(kind, source: Goal, target: Goal, full_context):
    n = len(target)
    if full_context:
        windows = [
            (i, j) for i in range(n + 1) for j in range(i, n + 1)
        ]
        windows.sort(key=lambda w: (w[0], w[1] - w[0]))
    else:
        windows = [(0, n)]
    for i, j in windows:
        window = target[i:j]
        theta = (
            match(source, window)
            if kind is EmbeddingKind.INS
            else match(window, source)
        )
        if theta is None:
            continue
        return Embedding(kind, GoalContext(target[:i], target[j:]), theta)
    return None


# ---------------------------------------------------------------------------
# Loop search


def find_loop(
    program: Program,
    candidates: Sequence[Rule],
    max_word_len: int,
    kind: EmbeddingKind,
    semantics: Semantics,
    full_context: bool = True,
    budget: Optional[Budget] = None,
) -> Optional[LoopWitness]:
    """Iterative-deepening word search for a loop witness.

    Starts from the left-hand side of each candidate rule (wrapped as a
    singleton goal under the narrowing semantics) and explores all rule
    words of length at most ``max_word_len``.
    """
    budget = budget or Budget()
    for cand in candidates:
        if semantics is Semantics.LP_NARROW:
            start: Union[Term, Goal] = (cand.lhs,)
        else:
            start = cand.lhs
        frontier: list[Chain] = [Chain(start, [])]
        for _ in range(max_word_len):
            nxt: list[Chain] = []
            seen = set()
            for chain in frontier:
                if not budget.tick():
                    return None
                for step in successors(program, chain.end, semantics):
                    extended = Chain(start, chain.steps + [step])
                    emb = find_embedding(kind, start, step.target, full_context)
                    if emb is not None:
                        return LoopWitness(
                            tuple(s.rule_id for s in extended.steps),
                            start,
                            step.target,
                            emb,
                            semantics,
                            extended,
                        )
                    key = canonical(step.target)
                    key = key if isinstance(key, tuple) else (key,)
                    if key in seen:
                        continue
                    seen.add(key)
                    nxt.append(extended)
            frontier = nxt
            if not frontier:
                break
    return None


# ---------------------------------------------------------------------------
# Recurrent-pair pattern matching


def _strip_layer(t: Term, c2: Context) -> Optional[Term]:
    """Inner term u with c2[u] = t, or None."""
    hp = hole_positions(c2)[0]
    try:
        inner = subterm_at(t, hp)
    except Exception:
        return None
    if plug(c2, inner) == t:
        return inner
    return None


def _peel_stages(t: Term, c2: Context, limit: int = 500) -> list[Term]:
    """stages[n] is the remainder of ``t`` after peeling n layers of c2."""
    stages = [t]
    while len(stages) <= limit:
        nxt = _strip_layer(stages[-1], c2)
        if nxt is None:
            break
        stages.append(nxt)
    return stages


def _replace_occurrences(t: Term, needle: Term, repl: Term) -> Term:
    if t == needle:
        return repl
    if isinstance(t, Var):
        return t
    return App(t.symbol, tuple(_replace_occurrences(a, needle, repl) for a in t.args))


def _ground_template(c: Term) -> bool:
    if isinstance(c, Var):
        return False
    if c.symbol in (HOLE, HOLE2):
        return False
    return all(_ground_template(a) for a in c.args)


def _walk_template(
    c: Term,
    u: Term,
    var_map: dict[Var, Var],
    bindings: dict[Var, Term],
    res1: list[Term],
    res2: list[Term],
    loose: bool,
) -> bool:
    """Match ``u`` against the two-hole skeleton ``c``.

    Residues at the primary and secondary hole positions are appended to
    ``res1``/``res2``.  Non-hole variables of the skeleton must
    correspond to a consistent, injective variable renaming, recorded in
    ``var_map``.  In loose mode a variable of ``u`` meeting ground
    skeleton content is bound to it instead of failing, recorded in
    ``bindings``; that instantiation keeps the chain valid because the
    underlying semantics are closed under substitution.
    """
    if isinstance(c, App) and c.symbol == HOLE:
        res1.append(u)
        return True
    if isinstance(c, App) and c.symbol == HOLE2:
        res2.append(u)
        return True
    if isinstance(u, Var) and u in bindings:
        u = bindings[u]
    if isinstance(c, Var):
        if c in var_map:
            return var_map[c] == u
        if not isinstance(u, Var) or u in var_map.values():
            return False
        var_map[c] = u
        return True
    if isinstance(u, Var):
        if loose and _ground_template(c):
            bindings[u] = c
            return True
        return False
    if u.symbol != c.symbol:
        return False
    return all(
        _walk_template(a, b, var_map, bindings, res1, res2, loose)
        for a, b in zip(c.args, u.args)
    )


def _match_against_context(
    c1: Context, t: Term, var_map: dict[Var, Var]
) -> Optional[tuple[list[Term], list[Term]]]:
    res1: list[Term] = []
    res2: list[Term] = []
    if not _walk_template(c1.body, t, var_map, {}, res1, res2, loose=False):
        return None
    return res1, res2


def _all_equal(items: list) -> bool:
    return all(x == items[0] for x in items[1:])


def match_recurrent_pattern(
    chain1: Chain, chain2: Chain
) -> Optional[RecurrentPair]:
    """Decompose two one-word chains into a recurrent pair, if possible.

    Enumeration is canonical: variable pairs ordered by interned id,
    anchor subterms from the innermost outwards, tower exponents
    ascending; the first decomposition satisfying all side conditions
    wins.
    """
    u1, v1 = chain1.start, chain1.end
    u2, v2 = chain2.start, chain2.end
    if not all(isinstance(t, (Var, App)) for t in (u1, v1, u2, v2)):
        return None

    u1_vars = sorted(term_vars(u1), key=lambda v: v.id)
    for x in u1_vars:
        for y in u1_vars:
            if x == y:
                continue
            rp = _try_decompose(chain1, chain2, x, y)
            if rp is not None:
                return rp
    return None


def _anchor_candidates(u1: Term, x: Var, y: Var) -> list[Term]:
    """Subterms of u1 containing y and no other variable, smallest first."""
    seen = []
    for p in iter_positions(u1):
        sub = subterm_at(u1, p)
        if isinstance(sub, App) and term_vars(sub) == {y} and sub not in seen:
            seen.append(sub)
    seen.sort(key=lambda t: len(render(t)))
    return seen


def _try_decompose(chain1: Chain, chain2: Chain, x: Var, y: Var):
    u1, v1 = chain1.start, chain1.end
    u2, v2 = chain2.start, chain2.end
    for d in _anchor_candidates(u1, x, y):
        body = _replace_occurrences(u1, d, App(HOLE2))
        body = _replace_occurrences(body, x, App(HOLE))
        c1 = Context(body)
        if not c1.is_two_hole or {x, y} & term_vars(body):
            continue
        c2 = Context(_replace_occurrences(d, y, App(HOLE)))
        if term_vars(c2.body):
            continue
        # v1 = c1[c2^n1[x], y]
        got = _match_against_context(c1, v1, {v: v for v in term_vars(body)})
        if got is None:
            continue
        res1, res2 = got
        if not (_all_equal(res1) and _all_equal(res2) and res2[0] == y):
            continue
        stages = _peel_stages(res1[0], c2)
        n1 = next((n for n, st in enumerate(stages) if st == x), None)
        if n1 is None:
            continue
        # u2 = c1[x', c2^n2[s]] with x' a variable and s ground, possibly
        # after instantiating some of the second chain's variables with
        # ground content taken from the skeleton (loose passes)
        var_map: dict[Var, Var] = {}
        bindings: dict[Var, Term] = {}
        if not _walk_template(c1.body, u2, var_map, bindings, [], [], loose=True):
            continue
        if not _walk_template(c1.body, v2, var_map, bindings, [], [], loose=True):
            continue
        sigma = Substitution(bindings)
        got = _match_against_context(c1, apply(sigma, u2), var_map)
        if got is None:
            continue
        res1, res2 = got
        if not (_all_equal(res1) and _all_equal(res2)):
            continue
        x2 = res1[0]
        if not isinstance(x2, Var) or term_vars(res2[0]):
            continue
        got2 = _match_against_context(c1, apply(sigma, v2), var_map)
        if got2 is None:
            continue
        r1, r2 = got2
        if not (_all_equal(r1) and _all_equal(r2)):
            continue
        stages4 = _peel_stages(r2[0], c2)
        n4 = next((n for n, st in enumerate(stages4) if st == x2), None)
        if n4 is None:
            continue
        tower2 = _peel_stages(res2[0], c2)
        stages3 = _peel_stages(r1[0], c2)
        for n2, s in enumerate(tower2):
            if n4 < n2:
                break
            for n3, base in enumerate(stages3):
                if base == x2:
                    t_is_s = False
                elif base == s:
                    t_is_s = True
                else:
                    continue
                # carry the second chain over into the first chain's
                # namespace: ground instantiation first, then renaming
                ren = {x2: x}
                for cv, uv in var_map.items():
                    if uv != cv:
                        ren[uv] = cv
                chain2r = chain2.instantiate(compose(sigma, Substitution(ren)))
                return RecurrentPair(
                    chain1,
                    chain2r,
                    c1,
                    c2,
                    n1,
                    n2,
                    n3,
                    n4,
                    s,
                    t_is_s,
                    x,
                    y,
                    chain1.steps[0].semantics if chain1.steps else Semantics.TRS,
                )
    return None


def _one_step_chains(candidates: Sequence[Rule], semantics: Semantics) -> list[Chain]:
    out = []
    for r in candidates:
        if semantics is Semantics.LP_RESTRICTED and not r.restricted_usable:
            continue
        if not r.trs_usable:
            continue
        out.append(
            Chain(
                r.lhs,
                [Step(r.lhs, r.id, ROOT, Substitution(), r.rhs[0], semantics)],
            )
        )
    return out


def find_recurrent_pair(
    program: Program,
    candidates: Sequence[Rule],
    max_word_len: int,
    semantics: Semantics,
    budget: Optional[Budget] = None,
) -> Optional[RecurrentPair]:
    """First recurrent pair among candidate chains, in canonical order.

    Requires a substitution-closed semantics (term rewriting or the
    restricted narrowing relation).
    """
    if semantics not in (Semantics.TRS, Semantics.LP_RESTRICTED):
        raise ValueError("recurrent pairs need a substitution-closed semantics")
    budget = budget or Budget()
    chains = _one_step_chains(candidates, semantics)
    if max_word_len > 1:
        chains = chains + _extended_chains(program, chains, max_word_len, semantics, budget)

    # Every component of a recurrent pair shares the root symbol of c1,
    # and the first chain needs two distinct variables to instantiate.
    def root(t):
        return t.symbol if isinstance(t, App) else None

    for c1 in chains:
        r = root(c1.start)
        if r is None or root(c1.end) != r or len(term_vars(c1.start)) < 2:
            continue
        for c2 in chains:
            if root(c2.start) != r or root(c2.end) != r:
                continue
            if not budget.tick():
                return None
            rp = match_recurrent_pattern(c1, c2)
            if rp is not None:
                return rp
    return None


def _extended_chains(program, seeds, max_word_len, semantics, budget):
    out = []
    frontier = list(seeds)
    for _ in range(max_word_len - 1):
        nxt = []
        for chain in frontier:
            if not budget.tick():
                return out
            for step in successors(program, chain.end, semantics):
                ext = Chain(chain.start, chain.steps + [step])
                nxt.append(ext)
                out.append(ext)
        frontier = nxt
    return out


# ---------------------------------------------------------------------------
# Witness-chain generation


def _tower(c2: Context, n: int, base: Term) -> Term:
    return plug(_power(c2, n), base) if n else base


_power_cache: dict[tuple, Context] = {}


def _power(c2: Context, n: int) -> Context:
    from .terms import context_power

    key = (c2.body, n)
    if key not in _power_cache:
        _power_cache[key] = context_power(c2, n)
    return _power_cache[key]


def witness_chain(rp: RecurrentPair, m: int, n0: int, k: int) -> Chain:
    """First ``k`` macro-steps of the infinite chain from c1[m, n0].

    Each macro-step peels the secondary tower down to its minimum with the
    first chain's word and then regrows it once with the second chain's
    word; every micro-step is materialized and re-verifiable.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if n0 < rp.n2:
        raise ValueError("start exponent must be at least the peel minimum")

    def c1_at(mm: int, nn: int) -> Term:
        return plug2(rp.c1, _tower(rp.c2, mm, rp.s), _tower(rp.c2, nn, rp.s))

    cur_m, cur_n = m, n0
    steps: list[Step] = []
    start = c1_at(cur_m, cur_n)
    for _ in range(k):
        while cur_n > rp.n2:
            sigma = Substitution(
                {
                    rp.x: _tower(rp.c2, cur_m, rp.s),
                    rp.y: _tower(rp.c2, cur_n - 1, rp.s),
                }
            )
            steps.extend(rp.chain1.instantiate(sigma).steps)
            cur_m, cur_n = cur_m + rp.n1, cur_n - 1
        sigma = Substitution({rp.x: _tower(rp.c2, cur_m, rp.s)})
        steps.extend(rp.chain2.instantiate(sigma).steps)
        m_prime = 0 if rp.t_is_s else cur_m
        cur_m, cur_n = m_prime + rp.n3, cur_m + rp.n4
    return Chain(start, steps)


def infinite_chain_prefix(
    program: Program, lw: LoopWitness, k: int
) -> Chain:
    """Unroll a loop witness ``k`` times into a verifiable chain prefix."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if lw.embedding.kind is EmbeddingKind.INS:
        return _unroll_ins(lw, k)
    return _unroll_mg(program, lw, k)


def _unroll_ins(lw: LoopWitness, k: int) -> Chain:
    ctx = lw.embedding.context
    theta = lw.embedding.binder
    trivial = lw.embedding.is_trivial_context()
    hole_prefix = hole_positions(ctx)[0] if not trivial else ROOT

    def wrap(chain: Chain) -> Chain:
        inst = chain.instantiate(theta)
        if trivial:
            return inst
        steps = [
            Step(
                plug(ctx, st.source),
                st.rule_id,
                hole_prefix + st.position,
                st.binder,
                plug(ctx, st.target),
                Semantics.TRS,  # wrapped steps leave the root
            )
            for st in inst.steps
        ]
        return Chain(plug(ctx, inst.start), steps)

    segment = lw.chain
    all_steps = list(segment.steps)
    for _ in range(k - 1):
        segment = wrap(segment)
        all_steps.extend(segment.steps)
    return Chain(lw.chain.start, all_steps)


def _unroll_mg(program: Program, lw: LoopWitness, k: int) -> Chain:
    gc = lw.embedding.context
    offset = len(gc.prefix)
    indices = [(st.rule_id, st.position[0]) for st in lw.chain.steps]
    all_steps = list(lw.chain.steps)
    cur = lw.end
    for _ in range(k - 1):
        indices = [(rid, offset + i) for rid, i in indices]
        for rid, i in indices:
            found = None
            for step in lp_successors(program, cur):
                if step.rule_id == rid and step.position == (i,):
                    found = step
                    break
            if found is None:
                raise RuntimeError("loop unrolling failed to re-apply a step")
            all_steps.append(found)
            cur = found.target
    return Chain(lw.chain.start, all_steps)
