"""Command-line front end: parse a system, analyze it, print a certificate.

Exit codes: 0 for a completed analysis (whatever the verdict), 2 for bad
command-line usage, 1 for I/O, parse or resource failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .analysis import AnalysisConfig, analyze, emit_certificate
from .errors import NontermError, ParseError
from .parsing import parse_lp, parse_trs, render_program
from .rewriting import Mode
from .unfolding import binary_unfold, unfold_trs, unfolded_program


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nonterm",
        description="Non-termination analysis for rewrite systems and logic programs",
    )
    ap.add_argument("file", help="input file (.trs or .pl)")
    ap.add_argument(
        "--format",
        choices=["trs", "lp"],
        help="input dialect; default inferred from the file extension",
    )
    ap.add_argument(
        "--technique",
        default="loop,recpair",
        help="comma-separated subset of {loop,recpair}",
    )
    ap.add_argument("--depth", type=int, default=None, help="max unfolding depth")
    ap.add_argument(
        "--max-word", type=int, default=None, help="max rule-word length"
    )
    ap.add_argument(
        "--simulate", type=int, default=None, help="simulated prefix length"
    )
    ap.add_argument(
        "--raw",
        action="store_true",
        help="search the input rules directly, without unfolding",
    )
    ap.add_argument(
        "--timeout", type=float, default=None, help="seconds per technique"
    )
    ap.add_argument("--json", action="store_true", help="emit a JSON certificate")
    ap.add_argument(
        "--emit-unfolded",
        metavar="PATH",
        help="also write the unfolded candidate rules to PATH",
    )
    return ap


def _infer_mode(path: str, fmt: Optional[str]) -> Mode:
    if fmt == "trs":
        return Mode.TRS
    if fmt == "lp":
        return Mode.LP
    suffix = Path(path).suffix.lower()
    if suffix == ".trs":
        return Mode.TRS
    if suffix == ".pl":
        return Mode.LP
    raise ValueError(
        f"cannot infer format from {path!r}; pass --format trs|lp"
    )


def _config_from_args(args) -> AnalysisConfig:
    cfg = AnalysisConfig()
    techniques = tuple(t for t in args.technique.split(",") if t)
    if not techniques or any(t not in ("loop", "recpair") for t in techniques):
        raise ValueError(f"bad --technique value {args.technique!r}")
    cfg.techniques = techniques
    if args.depth is not None:
        if args.depth < 0:
            raise ValueError("--depth must be non-negative")
        cfg.unfold_depth = args.depth
    if args.max_word is not None:
        if args.max_word < 1:
            raise ValueError("--max-word must be at least 1")
        cfg.max_word_len = args.max_word
    if args.simulate is not None:
        if args.simulate < 0:
            raise ValueError("--simulate must be non-negative")
        cfg.simulate_steps = args.simulate
    if args.timeout is not None:
        cfg.timeout = args.timeout
    cfg.raw = args.raw
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        mode = _infer_mode(args.file, args.format)
        text = Path(args.file).read_text()
        program = (parse_trs if mode is Mode.TRS else parse_lp)(text)
        if args.emit_unfolded:
            if mode is Mode.TRS:
                pool = unfold_trs(program, cfg.unfold_depth, cfg.rule_cap)
            else:
                pool = binary_unfold(program, cfg.unfold_depth, cfg.rule_cap)
            unfolded = unfolded_program(pool, mode, program.signature)
            Path(args.emit_unfolded).write_text(render_program(unfolded))
        verdict = analyze(program, cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, NontermError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(emit_certificate(verdict, as_json=args.json))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
