"""Epoch-synchronous event loop over the three actions.

Each epoch the enabled actions (conjecture search, soundness rechecking,
proof search) run against one immutable snapshot; the events they emit are
applied to the knowledge base in a fixed order (retractions, then proofs,
then new conjectures) so a retraction can never invalidate a proof committed
in the same epoch. Proof events pass replay, connection-list reduction,
commit and the independence check before they take effect. The loop stops at
quiescence (an epoch with no events) or at the epoch cap, then persists the
knowledge base, the run log, and one file per committed proof.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .application import Application, load_application_file
from .kernel import Program
from .knowledge import IEPRecord, Kind, KnowledgeBase, StateMetrics, Status
from .prover import (
    Exhausted,
    Proof,
    Unresolvable,
    prove,
    reduce_connections,
    reduce_proof,
    replay,
    resolve_circularity,
)
from .soundness import SoundnessReport, recheck_pass
from . import conjecture as conjecture_engine

ACTIONS = ("conjecture", "soundness", "prove")

_STATUS_SHORT = {Status.AXIOM: "ax", Status.THEOREM: "th", Status.UNDERIVABLE: "ud"}


def _short(status: Status) -> str:
    return _STATUS_SHORT[status]


@dataclass
class RunConfig:
    app_path: Path
    max_epochs: int = 10
    actions: frozenset[str] = frozenset(ACTIONS)
    out_dir: Path = Path("ra_out")
    premise_len_cap: int | None = None

    def __post_init__(self):
        self.app_path = Path(self.app_path)
        self.out_dir = Path(self.out_dir)
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        unknown = set(self.actions) - set(ACTIONS)
        if unknown:
            raise ValueError(f"unknown actions: {sorted(unknown)}")
        if not self.actions:
            raise ValueError("at least one action must be enabled")


@dataclass(frozen=True)
class Event:
    """One halt-condition trigger: a conjecture, an unsound record, or a proof."""

    kind: str  # "unsound_found" | "proof_found" | "new_conjecture"
    label: str
    epoch: int
    report: SoundnessReport | None = None
    proof: Proof | None = None
    record: IEPRecord | None = None


@dataclass
class RunResult:
    metrics: StateMetrics
    kb: KnowledgeBase
    log_lines: list[str] = field(default_factory=list)
    epochs_run: int = 0


def seed_knowledge(app: Application) -> KnowledgeBase:
    """Load the application's records as underivable conjectures.

    No initial assumption is made about which of them are axioms; they earn
    axiom status only by being cited in committed proofs.
    """
    kb = KnowledgeBase()
    for iep in app.ieps:
        kb.add_conjecture(
            IEPRecord(
                label=iep.label,
                premise=iep.premise,
                conclusion=iep.conclusion,
                kind=Kind.EXTENSION,
            )
        )
    for f in app.falsity:
        kb.add_conjecture(
            IEPRecord(label=f.label, premise=f.program, conclusion=None, kind=Kind.FALSITY)
        )
    return kb


def apply_proof_found(
    kb: KnowledgeBase, label: str, proof: Proof, app: Application, log: list[str]
) -> str | None:
    """Run one proof event through replay, reduction, commit and independence.

    Returns the label that ended up carrying new knowledge (the target, or
    the reduced-core replacement record), or None when the event was dropped
    (stale proof, failed replay, unresolvable circularity). Reducible targets
    are replaced: the target is retracted, the core premise is stored under a
    new generated label (or folded into the structurally equivalent existing
    record) and the renumbered proof is committed when it is self-contained.
    """
    if label not in kb:
        return None
    rec = kb.get(label)
    if rec.proof is not None:
        return None
    snapshot = kb.snapshot()
    if replay(proof, snapshot) is not None:
        return None
    reduction = reduce_connections(proof)
    if not reduction.reducible:
        pre_commit = kb.snapshot()
        kb.commit_proof(label, proof)
        if not kb.is_independent(label):
            outcome = resolve_circularity(label, kb, app.mach, pre_commit=pre_commit)
            if isinstance(outcome, Unresolvable):
                return None
        log.append(
            f"PROOF label={label} steps={len(proof.steps)} tcl=[{','.join(kb.get(label).tcl)}]"
        )
        return label

    # Reducible: the premise carries superfluous statements, so this record
    # is not irreducible. Swap it for its core.
    core = Program(
        tuple(proof.initial.statements[p - 1] for p in reduction.premise_positions)
    )
    reduced = reduce_proof(proof, reduction, snapshot, label, rec.conclusion)
    retracted = kb.retract_unsound(label)
    for touched in retracted[1:]:
        log.append(f"DEMOTE label={touched} {_short(kb.get(touched).status)}")
    replacement = kb.find_equivalent(core, rec.conclusion, Kind.EXTENSION)
    if replacement is None:
        replacement = kb.next_generated_label()
        kb.add_conjecture(
            IEPRecord(
                label=replacement,
                premise=core,
                conclusion=rec.conclusion,
                kind=Kind.EXTENSION,
                origin="generated",
                origin_epoch=kb.epoch,
            )
        )
    log.append(
        f"REDUCE label={label} core=[{','.join(str(p) for p in reduction.premise_positions)}]"
        f" replacement={replacement}"
    )
    if reduced is not None and all(s.used_label != replacement for s in reduced.steps):
        reduced = Proof(
            target=replacement,
            initial=reduced.initial,
            steps=reduced.steps,
            final_index=reduced.final_index,
        )
        if replay(reduced, kb.snapshot()) is None and kb.get(replacement).proof is None:
            pre_commit = kb.snapshot()
            kb.commit_proof(replacement, reduced)
            if not kb.is_independent(replacement):
                outcome = resolve_circularity(replacement, kb, app.mach, pre_commit=pre_commit)
                if isinstance(outcome, Unresolvable):
                    return replacement
            log.append(
                f"PROOF label={replacement} steps={len(reduced.steps)}"
                f" tcl=[{','.join(kb.get(replacement).tcl)}]"
            )
    return replacement


def run_epoch(
    kb: KnowledgeBase, app: Application, cfg: RunConfig, epoch: int, log: list[str]
) -> int:
    """Run all enabled actions against one snapshot and apply their events.

    Returns the number of events collected (quiescence is a zero-event
    epoch).
    """
    snapshot = kb.snapshot()
    events: list[Event] = []

    if "soundness" in cfg.actions:
        reports = recheck_pass(snapshot, app, epoch)
        for report in reports:
            log.append(report.log_line())
            if not report.ok:
                events.append(
                    Event(kind="unsound_found", label=report.label, epoch=epoch, report=report)
                )
        kb.note_soundness_runs([r.label for r in reports])

    if "prove" in cfg.actions:
        for label in snapshot.labels():
            rec = snapshot.get(label)
            if rec.kind is not Kind.EXTENSION or rec.proof is not None:
                continue
            result = prove(label, snapshot, app.mach)
            if isinstance(result, Exhausted):
                continue
            events.append(Event(kind="proof_found", label=label, epoch=epoch, proof=result))

    if "conjecture" in cfg.actions:
        cap = cfg.premise_len_cap or app.mach.max_premise_len
        cap = min(cap, app.mach.max_premise_len)
        for premise_len in range(1, cap + 1):
            for cand in conjecture_engine.enumerate_templates(app, premise_len, snapshot):
                report = conjecture_engine.screen_against_data(cand, app)
                if not report.ok:
                    continue
                record = IEPRecord(
                    label="",
                    premise=cand.premise,
                    conclusion=cand.conclusion,
                    kind=Kind.EXTENSION,
                    origin="generated",
                    origin_epoch=epoch,
                )
                events.append(Event(kind="new_conjecture", label="", epoch=epoch, record=record))

    # Apply order: retractions cannot invalidate proofs committed in the same
    # epoch, and new conjectures land last.
    for event in events:
        if event.kind != "unsound_found":
            continue
        if event.label not in kb:
            continue
        touched = kb.retract_unsound(event.label)
        for label in touched[1:]:
            log.append(f"DEMOTE label={label} {_short(kb.get(label).status)}")
    for event in events:
        if event.kind != "proof_found":
            continue
        before_ax = {label for label in kb.labels() if kb.get(label).status is Status.AXIOM}
        committed = apply_proof_found(kb, event.label, event.proof, app, log)
        if committed is not None:
            for label in kb.labels():
                if label not in before_ax and kb.get(label).status is Status.AXIOM:
                    log.append(f"PROMOTE label={label} ax")
    for event in events:
        if event.kind != "new_conjecture":
            continue
        record = event.record
        if kb.find_equivalent(record.premise, record.conclusion, record.kind) is not None:
            continue
        label = kb.next_generated_label()
        kb.add_conjecture(
            IEPRecord(
                label=label,
                premise=record.premise,
                conclusion=record.conclusion,
                kind=record.kind,
                origin="generated",
                origin_epoch=epoch,
            )
        )
        log.append(f"CONJECTURE label={label} premise_len={len(record.premise)}")
    return len(events)


def run_loop(cfg: RunConfig) -> RunResult:
    """Iterate epochs until quiescence or the cap, then persist everything."""
    app = load_application_file(cfg.app_path)
    kb = seed_knowledge(app)
    log: list[str] = []
    epochs_run = 0
    for epoch in range(1, cfg.max_epochs + 1):
        log.append(f"EPOCH {epoch}")
        epochs_run = epoch
        n_events = run_epoch(kb, app, cfg, epoch, log)
        if n_events == 0:
            break
    metrics = kb.metrics()
    log.append(
        f"FINAL ax={metrics.n_ax} th={metrics.n_th} ud={metrics.n_ud}"
        f" complete={'true' if metrics.complete else 'false'}"
    )
    _persist(cfg.out_dir, kb, log)
    return RunResult(metrics=metrics, kb=kb, log_lines=log, epochs_run=epochs_run)


def _persist(out_dir: Path, kb: KnowledgeBase, log: list[str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "kb.json").write_text(
        json.dumps(kb.to_json_obj(), indent=2) + "\n", encoding="utf-8"
    )
    (out_dir / "run.log").write_text("\n".join(log) + "\n", encoding="utf-8")
    proofs_dir = out_dir / "proofs"
    proofs_dir.mkdir(exist_ok=True)
    for rec in kb.records():
        if rec.proof is not None:
            (proofs_dir / f"{rec.label}.json").write_text(
                json.dumps(rec.proof.to_json_obj(), indent=2) + "\n", encoding="utf-8"
            )
