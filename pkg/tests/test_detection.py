import pytest

from conftest import lp, term, trs
from nonterm.detection import (
    Budget,
    EmbeddingKind,
    find_embedding,
    find_loop,
    find_recurrent_pair,
    infinite_chain_prefix,
    match_recurrent_pattern,
    witness_chain,
)
from nonterm.rewriting import (
    Chain,
    Mode,
    Program,
    Rule,
    Semantics,
    Step,
    verify_chain,
)
from nonterm.substitution import Substitution, apply
from nonterm.terms import GoalContext, is_variant, render


def one_step_chain(rule, semantics=Semantics.TRS):
    return Chain(
        rule.lhs,
        [Step(rule.lhs, rule.id, (), Substitution(), rule.rhs[0], semantics)],
    )


# ---------------------------------------------------------------------------
# Embeddings


def test_embedding_ins_reflexive():
    t = term("f(x,y)")
    emb = find_embedding(EmbeddingKind.INS, t, t)
    assert emb is not None
    assert emb.is_trivial_context()
    assert emb.binder.is_identity()


def test_embedding_ins_instance_below_root():
    src = term("f(x)", "x")
    tgt = term("g(f(f(a)),b)")
    emb = find_embedding(EmbeddingKind.INS, src, tgt)
    assert emb is not None
    # smallest position wins: the f(f(a)) occurrence at position 1
    assert render(emb.context.body) == "g([],b)"
    assert render(apply(emb.binder, src)) == "f(f(a))"


def test_embedding_ins_position_order():
    src = term("f(x)", "x")
    tgt = term("g(f(a),f(b))")
    emb = find_embedding(EmbeddingKind.INS, src, tgt)
    assert render(emb.context.body) == "g([],f(b))"


def test_embedding_mg_term():
    src = term("f(a,b)")
    tgt = term("g(f(x,y))")
    emb = find_embedding(EmbeddingKind.MG, src, tgt)
    assert emb is not None
    assert render(emb.context.body) == "g([])"
    assert render(apply(emb.binder, term("f(x,y)"))) == "f(a,b)"


def test_embedding_simplified_root_only():
    src = term("f(x)", "x")
    tgt = term("g(f(a))")
    assert find_embedding(EmbeddingKind.INS, src, tgt, full_context=False) is None
    assert find_embedding(EmbeddingKind.INS, src, term("f(a)")) is not None


def test_embedding_goal_window():
    src = (term("p(x)"),)
    tgt = (term("q(a)"), term("p(b)"), term("r(c)"))
    emb = find_embedding(EmbeddingKind.INS, src, tgt)
    assert emb is not None
    assert isinstance(emb.context, GoalContext)
    assert render(emb.context.prefix) == "<q(a)>"
    assert render(emb.context.suffix) == "<r(c)>"


def test_embedding_goal_mg():
    src = (term("p(f(a,zero))"),)
    tgt = (term("p(x)"), term("q(x)"))
    emb = find_embedding(EmbeddingKind.MG, src, tgt)
    assert emb is not None
    assert emb.context.prefix == ()


def test_embedding_none():
    assert find_embedding(EmbeddingKind.INS, term("f(a)", ""), term("g(b)")) is None


def test_embedding_type_mismatch():
    with pytest.raises(ValueError):
        find_embedding(EmbeddingKind.INS, term("a"), (term("a"),))


# ---------------------------------------------------------------------------
# Loops


def test_find_loop_trs_word3():
    p = trs("f(x) -> g(h(x,one),x)  one -> zero  h(x,zero) -> f(f(x))")
    lw = find_loop(p, p.rules, 3, EmbeddingKind.INS, Semantics.TRS)
    assert lw is not None
    assert lw.word == ("r1", "r2", "r3")
    assert verify_chain(p, lw.chain)


def test_find_loop_respects_word_bound():
    p = trs("f(x) -> g(h(x,one),x)  one -> zero  h(x,zero) -> f(f(x))")
    assert find_loop(p, p.rules, 2, EmbeddingKind.INS, Semantics.TRS) is None


def test_find_loop_budget_degrades():
    p = trs("f(x) -> g(h(x,one),x)  one -> zero  h(x,zero) -> f(f(x))")
    budget = Budget(node_cap=1)
    assert (
        find_loop(p, p.rules, 3, EmbeddingKind.INS, Semantics.TRS, budget=budget)
        is None
    )
    assert budget.exhausted


def test_loop_unrolling_matches_by_hand():
    p = trs("f(x) -> g(h(x,one),x)  one -> zero  h(x,zero) -> f(f(x))")
    lw = find_loop(p, p.rules, 3, EmbeddingKind.INS, Semantics.TRS)
    chain = infinite_chain_prefix(p, lw, 2)
    states = chain.states()
    assert is_variant(states[3], term("g(f(f(x)),x)"))
    assert is_variant(states[6], term("g(g(f(f(f(x))),f(x)),x)"))
    assert verify_chain(p, chain)


def test_find_loop_lp_narrowing():
    p = lp("p(f(X,zero)) :- p(X), q(X).")
    lw = find_loop(p, p.rules, 1, EmbeddingKind.MG, Semantics.LP_NARROW)
    assert lw is not None
    chain = infinite_chain_prefix(p, lw, 3)
    assert verify_chain(p, chain)
    # the goal keeps growing: each unrolling appends one more delayed atom
    assert [len(g) for g in chain.states()] == [1, 2, 3, 4]


def test_loop_with_nontrivial_context_unrolls():
    p = trs("f(x) -> g(f(h(x)))")
    lw = find_loop(p, p.rules, 1, EmbeddingKind.INS, Semantics.TRS)
    assert lw is not None
    assert render(lw.embedding.context.body) == "g([])"
    chain = infinite_chain_prefix(p, lw, 3)
    assert is_variant(chain.end, term("g(g(g(f(h(h(h(x)))))))"))
    assert verify_chain(p, chain)


# ---------------------------------------------------------------------------
# Recurrent pairs


def zantema_rules():
    p = trs("f(x,s(y)) -> f(s(x),y)  f(x,zero) -> f(s(zero),x)")
    return p


def test_recurrent_pair_decomposition():
    p = zantema_rules()
    rp = find_recurrent_pair(p, p.rules, 1, Semantics.TRS)
    assert rp is not None
    assert render(rp.c1.body) == "f([],[]')"
    assert render(rp.c2.body) == "s([])"
    assert (rp.n1, rp.n2, rp.n3, rp.n4) == (1, 0, 1, 0)
    assert render(rp.s) == "zero"
    assert rp.t_is_s


def test_recurrent_pair_swapped_variables():
    # the primary variable appears second in the lhs here
    p = trs("g(a(x),y) -> g(x,a(y))  g(a(x),y) -> g(x,y)")
    # u1 = g(a(x),y): needs x/y roles found by enumeration, not position
    rp = match_recurrent_pattern(
        one_step_chain(p.rules[0]), one_step_chain(p.rules[0])
    )
    # no decomposition here: the towers do not line up with a ground base
    assert rp is None


def test_recurrent_pair_ground_anchor():
    p = trs("f(c,a(x),y) -> f(c,x,a(y))  f(c,a(x),y) -> f(x,y,a(a(c)))")
    c2 = one_step_chain(p.rules[1])
    # specialize the second rule's chain at x = c as the regrow step
    theta = Substitution({term("x"): term("c", "")})
    rp = match_recurrent_pattern(one_step_chain(p.rules[0]), c2.instantiate(theta))
    assert rp is not None
    assert render(rp.c1.body) == "f(c,[]',[])"
    assert render(rp.c2.body) == "a([])"
    assert render(rp.s) == "a(c)"
    assert rp.t_is_s


def test_witness_chain_exponent_bookkeeping():
    p = zantema_rules()
    rp = find_recurrent_pair(p, p.rules, 1, Semantics.TRS)
    chain = witness_chain(rp, 1, 0, 3)
    got = [render(t) for t in chain.states()]
    assert got[:6] == [
        "f(s(zero),zero)",
        "f(s(zero),s(zero))",
        "f(s(s(zero)),zero)",
        "f(s(zero),s(s(zero)))",
        "f(s(s(zero)),s(zero))",
        "f(s(s(s(zero))),zero)",
    ]
    assert verify_chain(p, chain)


def test_witness_chain_rejects_bad_start():
    p = trs("f(x,s(y)) -> f(s(x),y)  f(x,s(zero)) -> f(s(x),s(s(zero)))")
    rp = find_recurrent_pair(p, p.rules, 1, Semantics.TRS)
    if rp is not None and rp.n2 > 0:
        with pytest.raises(ValueError):
            witness_chain(rp, 0, rp.n2 - 1, 1)
    with pytest.raises(ValueError):
        rp2 = find_recurrent_pair(
            zantema_rules(), zantema_rules().rules, 1, Semantics.TRS
        )
        witness_chain(rp2, 0, 0, 0)


def test_recurrent_pair_requires_stable_semantics():
    p = lp("p(f(X,zero)) :- p(X), q(X).")
    with pytest.raises(ValueError):
        find_recurrent_pair(p, p.rules, 1, Semantics.LP_NARROW)


def test_recurrent_pair_restricted_filters_extra_vars():
    p = Program(
        [
            Rule("r1", term("f(x,s(y))"), (term("f(s(x),y)"),)),
            # z on the right only: unusable for the restricted relation
            Rule("r2", term("f(x,zero)"), (term("f(z,x)"),)),
        ],
        Mode.LP,
    )
    assert find_recurrent_pair(p, p.rules, 1, Semantics.LP_RESTRICTED) is None


def test_recurrent_pair_none_on_terminating():
    p = trs("plus(zero,x) -> x  plus(s(x),y) -> s(plus(x,y))")
    assert find_recurrent_pair(p, p.rules, 1, Semantics.TRS) is None
