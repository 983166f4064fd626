"""End-to-end non-termination analysis and certificate emission.

``analyze`` takes a parsed program and returns a verdict: NO (proved
non-terminating, with a witness whose simulated prefix re-verifies
against the rules it uses) or MAYBE (nothing found within the configured
depth, word-length and time budgets).  A NO is only ever reported after
the simulated prefix has been re-executed step by step.

All output is deterministic: certificates for the same input and
configuration are byte-identical across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .detection import (
    Budget,
    EmbeddingKind,
    LoopWitness,
    RecurrentPair,
    find_embedding,
    find_loop,
    find_recurrent_pair,
    infinite_chain_prefix,
    witness_chain,
)
from .errors import ResourceLimitError
from .rewriting import (
    Chain,
    Mode,
    Program,
    Semantics,
    Step,
    lp_successors,
    verify_chain,
)
from .substitution import Substitution
from .terms import GoalContext, ROOT, render, render_position
from .unfolding import (
    DEFAULT_DEPTH,
    DEFAULT_RULE_CAP,
    binary_unfold,
    dependency_pairs,
    unfold_trs,
    unfolded_program,
    unmark_root,
)

TECHNIQUE_LOOP = "loop"
TECHNIQUE_RECPAIR = "recpair"


@dataclass
class AnalysisConfig:
    techniques: tuple[str, ...] = (TECHNIQUE_LOOP, TECHNIQUE_RECPAIR)
    unfold_depth: int = DEFAULT_DEPTH
    max_word_len: Optional[int] = None  # defaults: 1 unfolded, 3 raw
    simulate_steps: int = 5
    timeout: Optional[float] = 10.0  # seconds per technique
    rule_cap: int = DEFAULT_RULE_CAP
    raw: bool = False

    def word_len(self) -> int:
        if self.max_word_len is not None:
            return self.max_word_len
        return 3 if self.raw else 1


@dataclass
class Verdict:
    answer: str  # "NO" or "MAYBE"
    technique: Optional[str] = None
    witness: Union[LoopWitness, RecurrentPair, None] = None
    simulated_prefix: Optional[Chain] = None
    used_program: Optional[Program] = None
    stats: dict = field(default_factory=dict)


def _rule_loop_witness(r, kind: EmbeddingKind) -> Optional[LoopWitness]:
    """Context-free loop check of a single candidate rule against itself."""
    if kind is EmbeddingKind.INS:
        if not r.trs_usable:
            return None
        emb = find_embedding(EmbeddingKind.INS, r.lhs, r.rhs[0], full_context=False)
        if emb is None:
            return None
        step = Step(r.lhs, r.id, ROOT, Substitution(), r.rhs[0], Semantics.TRS)
        return LoopWitness(
            (r.id,), r.lhs, r.rhs[0], emb, Semantics.TRS, Chain(r.lhs, [step])
        )
    start = (r.lhs,)
    mini = Program([r], Mode.LP)
    for step in lp_successors(mini, start):
        emb = find_embedding(EmbeddingKind.MG, start, step.target, full_context=False)
        if emb is not None:
            return LoopWitness(
                (r.id,),
                start,
                step.target,
                emb,
                Semantics.LP_NARROW,
                Chain(start, [step]),
            )
    return None


def _check_loop_verdict(cand, lw, cfg, stats) -> Optional[Verdict]:
    prefix = infinite_chain_prefix(cand, lw, max(1, cfg.simulate_steps))
    if not verify_chain(cand, prefix):
        stats.setdefault("rejected", []).append(TECHNIQUE_LOOP)
        return None
    return Verdict("NO", TECHNIQUE_LOOP, lw, prefix, cand, stats)


def _check_recpair_verdict(cand, rp, cfg, stats) -> Optional[Verdict]:
    prefix = witness_chain(rp, rp.n2, rp.n2, max(1, cfg.simulate_steps))
    if not verify_chain(cand, prefix):
        stats.setdefault("rejected", []).append(TECHNIQUE_RECPAIR)
        return None
    return Verdict("NO", TECHNIQUE_RECPAIR, rp, prefix, cand, stats)


def _analyze_raw(program: Program, cfg: AnalysisConfig, stats: dict) -> Verdict:
    stats["unfolding"] = "none"
    trs_mode = program.mode is Mode.TRS
    kind = EmbeddingKind.INS if trs_mode else EmbeddingKind.MG
    semantics = Semantics.TRS if trs_mode else Semantics.LP_NARROW
    budgets = {t: Budget(timeout=cfg.timeout) for t in cfg.techniques}
    for tech in cfg.techniques:
        v = None
        if tech == TECHNIQUE_LOOP:
            lw = find_loop(
                program,
                program.rules,
                cfg.word_len(),
                kind,
                semantics,
                full_context=True,
                budget=budgets[tech],
            )
            if lw is not None:
                v = _check_loop_verdict(program, lw, cfg, stats)
        else:
            rp_sem = Semantics.TRS if trs_mode else Semantics.LP_RESTRICTED
            rp = find_recurrent_pair(
                program, program.rules, cfg.word_len(), rp_sem, budgets[tech]
            )
            if rp is not None:
                v = _check_recpair_verdict(program, rp, cfg, stats)
        if budgets[tech].exhausted:
            stats.setdefault("exhausted", []).append(tech)
        if v is not None:
            return v
    return Verdict("MAYBE", stats=stats)


def _analyze_unfolded(program: Program, cfg: AnalysisConfig, stats: dict) -> Verdict:
    trs_mode = program.mode is Mode.TRS
    if trs_mode:
        stats["unfolding"] = "dependency-pair"
        stats["dependency_pairs"] = len(dependency_pairs(program))
    else:
        stats["unfolding"] = "binary"
    kind = EmbeddingKind.INS if trs_mode else EmbeddingKind.MG
    rp_sem = Semantics.TRS if trs_mode else Semantics.LP_RESTRICTED
    budgets = {t: Budget(timeout=cfg.timeout) for t in cfg.techniques}

    # Deepen the unfolding one level at a time so cheap witnesses are
    # found before the candidate pool grows large.
    for depth in range(cfg.unfold_depth + 1):
        if trs_mode:
            pool = unfold_trs(program, depth, cfg.rule_cap)
        else:
            pool = binary_unfold(program, depth, cfg.rule_cap)
        cand = unfolded_program(pool, program.mode, program.signature)
        stats["unfold_depth"] = depth
        stats["unfolded_rules"] = len(pool)
        for tech in cfg.techniques:
            budget = budgets[tech]
            if budget.exhausted:
                continue
            v = None
            if tech == TECHNIQUE_LOOP:
                for r in cand.rules:
                    if not budget.tick():
                        break
                    lw = _rule_loop_witness(r, kind)
                    if lw is not None:
                        v = _check_loop_verdict(cand, lw, cfg, stats)
                        if v is not None:
                            break
            else:
                rp = find_recurrent_pair(cand, cand.rules, 1, rp_sem, budget)
                if rp is not None:
                    v = _check_recpair_verdict(cand, rp, cfg, stats)
            if budget.exhausted:
                stats.setdefault("exhausted", []).append(tech)
            if v is not None:
                return v
        if all(b.exhausted for b in budgets.values()):
            break
    return Verdict("MAYBE", stats=stats)


def analyze(program: Program, cfg: Optional[AnalysisConfig] = None) -> Verdict:
    cfg = cfg or AnalysisConfig()
    stats: dict = {"mode": program.mode.value, "input_rules": len(program.rules)}
    for tech in cfg.techniques:
        if tech not in (TECHNIQUE_LOOP, TECHNIQUE_RECPAIR):
            raise ValueError(f"unknown technique {tech!r}")
    try:
        if cfg.raw:
            return _analyze_raw(program, cfg, stats)
        return _analyze_unfolded(program, cfg, stats)
    except ResourceLimitError as exc:
        stats["resource_limit"] = str(exc)
        return Verdict("MAYBE", stats=stats)


# ---------------------------------------------------------------------------
# Certificates


def _witness_dict(v: Verdict) -> Optional[dict]:
    w = v.witness
    if w is None:
        return None
    if isinstance(w, LoopWitness):
        ctx = w.embedding.context
        return {
            "kind": "loop",
            "word": list(w.word),
            "start": render(w.start),
            "start_unmarked": render(unmark_root(w.start))
            if not isinstance(w.start, tuple)
            else None,
            "end": render(w.end),
            "embedding": w.embedding.kind.value,
            "context": repr(ctx) if isinstance(ctx, GoalContext) else render(ctx.body),
            "binder": repr(w.embedding.binder),
        }
    return {
        "kind": "recurrent-pair",
        "word1": list(w.word1),
        "word2": list(w.word2),
        "c1": render(w.c1.body),
        "c2": render(w.c2.body),
        "exponents": [w.n1, w.n2, w.n3, w.n4],
        "base": render(w.s),
        "regrown_base": render(w.s) if w.t_is_s else w.x.name,
        "x": w.x.name,
        "y": w.y.name,
    }


def _prefix_dicts(v: Verdict) -> list[dict]:
    if v.simulated_prefix is None:
        return []
    return [
        {
            "source": render(st.source),
            "rule": st.rule_id,
            "position": render_position(st.position),
            "target": render(st.target),
        }
        for st in v.simulated_prefix.steps
    ]


def _used_rules(v: Verdict) -> dict:
    if v.used_program is None or v.simulated_prefix is None:
        return {}
    ids = sorted({st.rule_id for st in v.simulated_prefix.steps})
    return {rid: repr(v.used_program.rule(rid)) for rid in ids}


# Stats that are a pure function of input and configuration; wall-clock
# dependent diagnostics stay out of certificates so that equal runs
# produce byte-identical output.
_CERT_STATS = ("mode", "input_rules", "unfolding", "dependency_pairs")
_CERT_STATS_NO = _CERT_STATS + ("unfold_depth", "unfolded_rules")


def certificate_dict(v: Verdict) -> dict:
    keys = _CERT_STATS_NO if v.answer == "NO" else _CERT_STATS
    return {
        "answer": v.answer,
        "technique": v.technique,
        "witness": _witness_dict(v),
        "rules": _used_rules(v),
        "simulated_prefix": _prefix_dicts(v),
        "stats": {k: v.stats[k] for k in keys if k in v.stats},
    }


def emit_certificate(v: Verdict, as_json: bool = False) -> str:
    """Render a verdict; the first line of the text form is the answer."""
    if as_json:
        return json.dumps(certificate_dict(v), indent=2, sort_keys=False) + "\n"
    lines = [v.answer]
    if v.technique:
        lines.append(f"technique: {v.technique}")
    w = _witness_dict(v)
    if w:
        for key, val in w.items():
            if val is None:
                continue
            shown = " ".join(val) if isinstance(val, list) and key.startswith("word") else val
            lines.append(f"{key}: {shown}")
    rules = _used_rules(v)
    if rules:
        lines.append("rules:")
        for rid in rules:
            lines.append(f"  {rules[rid]}")
    steps = _prefix_dicts(v)
    if steps:
        lines.append("simulated prefix:")
        lines.append(f"  {steps[0]['source']}")
        for st in steps:
            lines.append(f"  =[{st['rule']}@{st['position']}]=> {st['target']}")
    keys = _CERT_STATS_NO if v.answer == "NO" else _CERT_STATS
    for key in keys:
        if key in v.stats:
            lines.append(f"stat {key}: {v.stats[key]}")
    return "\n".join(lines) + "\n"


def parse_certificate(text: str) -> dict:
    """Round-trip helper for the JSON certificate form."""
    data = json.loads(text)
    if data.get("answer") not in ("NO", "MAYBE"):
        raise ValueError("certificate answer must be NO or MAYBE")
    return data
