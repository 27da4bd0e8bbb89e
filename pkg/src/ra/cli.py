"""Command-line surface.

Subcommands: `run` (the full agent loop), `prove` (standalone prover over an
application's shipped records), `check` (one soundness report), `trace`
(dependency closure and independence from a persisted knowledge base) and
`report` (partition listing and metrics). Exit codes: 0 success, 1 target
failure (unsound / exhausted), 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .application import ParseError, load_application_file
from .knowledge import Kind, KnowledgeBase, UnknownLabel
from .orchestrator import ACTIONS, RunConfig, run_loop, seed_knowledge
from .prover import Exhausted, prove
from .soundness import check_record

_ACTION_CODES = {"c": "conjecture", "s": "soundness", "p": "prove"}


def _parse_actions(text: str) -> frozenset[str]:
    enabled = set()
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        name = _ACTION_CODES.get(piece, piece)
        if name not in ACTIONS:
            raise argparse.ArgumentTypeError(f"unknown action {piece!r}")
        enabled.add(name)
    if not enabled:
        raise argparse.ArgumentTypeError("at least one action required")
    return frozenset(enabled)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ra",
        description="Conjecture, soundness-check and prove extension records of an application.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full agent loop")
    p_run.add_argument("app", type=Path, help="application file (JSON)")
    p_run.add_argument("--epochs", type=int, default=10, metavar="N")
    p_run.add_argument(
        "--actions",
        type=_parse_actions,
        default=frozenset(ACTIONS),
        help="comma-separated subset of c,s,p (default: all)",
    )
    p_run.add_argument("--out", type=Path, default=Path("ra_out"), metavar="DIR")
    p_run.add_argument(
        "--premise-len",
        type=int,
        default=None,
        metavar="K",
        help="cap the conjecture action's premise length (default: mach bound)",
    )

    p_prove = sub.add_parser("prove", help="standalone prover for one shipped record")
    p_prove.add_argument("app", type=Path)
    p_prove.add_argument("--target", required=True, metavar="LABEL")

    p_check = sub.add_parser("check", help="one soundness report for a shipped record")
    p_check.add_argument("app", type=Path)
    p_check.add_argument("--target", required=True, metavar="LABEL")

    p_trace = sub.add_parser("trace", help="dependency closure of a stored record")
    p_trace.add_argument("kb", type=Path, help="knowledge-base file (kb.json)")
    p_trace.add_argument("--target", required=True, metavar="LABEL")

    p_report = sub.add_parser("report", help="partition listing and metrics")
    p_report.add_argument("kb", type=Path)

    return parser


def _load_kb(path: Path) -> KnowledgeBase:
    with open(path, "r", encoding="utf-8") as f:
        return KnowledgeBase.from_json_obj(json.load(f))


def _cmd_run(args) -> int:
    cfg = RunConfig(
        app_path=args.app,
        max_epochs=args.epochs,
        actions=args.actions,
        out_dir=args.out,
        premise_len_cap=args.premise_len,
    )
    result = run_loop(cfg)
    m = result.metrics
    print(
        f"epochs={result.epochs_run} ax={m.n_ax} th={m.n_th} ud={m.n_ud}"
        f" complete={'true' if m.complete else 'false'}"
    )
    print(f"wrote {cfg.out_dir / 'kb.json'}")
    return 0


def _cmd_prove(args) -> int:
    app = load_application_file(args.app)
    kb = seed_knowledge(app)
    if args.target not in kb:
        print(f"unknown target {args.target!r}", file=sys.stderr)
        return 2
    result = prove(args.target, kb.snapshot(), app.mach)
    if isinstance(result, Exhausted):
        print("EXHAUSTED")
        return 1
    print(json.dumps(result.to_json_obj(), indent=2))
    return 0


def _cmd_check(args) -> int:
    app = load_application_file(args.app)
    kb = seed_knowledge(app)
    if args.target not in kb:
        print(f"unknown target {args.target!r}", file=sys.stderr)
        return 2
    report = check_record(kb.get(args.target), app)
    print(report.log_line())
    return 0 if report.ok else 1


def _cmd_trace(args) -> int:
    kb = _load_kb(args.kb)
    if args.target not in kb:
        print(f"unknown target {args.target!r}", file=sys.stderr)
        return 2
    closure = kb.closure(args.target)
    print(f"closure: {' '.join(closure)}".rstrip())
    print(f"independent: {'true' if kb.is_independent(args.target) else 'false'}")
    return 0


def _cmd_report(args) -> int:
    kb = _load_kb(args.kb)
    view = kb.partition()
    print(f"ax: {' '.join(view.ax)}".rstrip())
    print(f"th: {' '.join(view.th)}".rstrip())
    print(f"ud: {' '.join(view.ud)}".rstrip())
    m = kb.metrics()
    falsity = sum(1 for rec in kb.records() if rec.kind is Kind.FALSITY)
    print(
        f"axioms={m.n_ax} theorems={m.n_th} underivable={m.n_ud}"
        f" falsity={falsity} complete={'true' if m.complete else 'false'} epoch={kb.epoch}"
    )
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "prove": _cmd_prove,
    "check": _cmd_check,
    "trace": _cmd_trace,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        return _COMMANDS[args.command](args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, UnknownLabel, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
