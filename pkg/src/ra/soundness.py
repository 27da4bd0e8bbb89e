"""Experimental-computation soundness checks.

An extension record is sound evidence-wise when no sampled assignment makes
its premise computable while the extended program is not. A falsity record
fails as soon as any assignment makes its program computable at all. Checks
are pure over snapshots and deterministic given (record, application, tag).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .application import Application, enumerate_assignments
from .kernel import conc, execute, primary_input_list
from .knowledge import IEPRecord, Kind, Snapshot


@dataclass(frozen=True)
class SoundnessReport:
    """Verdict of one check: counterexample found, or survived n assignments."""

    label: str
    tested: int
    exhaustive: bool
    counterexample: Mapping[str, int] | None = None
    failing_step: int | None = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None

    def log_line(self) -> str:
        if self.ok:
            return f"SOUND label={self.label} tested={self.tested} exhaustive={int(self.exhaustive)}"
        asg = ",".join(f"{v}={self.counterexample[v]}" for v in self.counterexample)
        step = 0 if self.failing_step is None else self.failing_step
        return f"UNSOUND label={self.label} asg={asg} step={step}"


def check_ep(rec: IEPRecord, app: Application, tag: str = "") -> SoundnessReport:
    """Search for an assignment where the premise runs but the extension does not.

    Assignments range over the primary inputs of the extended program (equal
    to the premise's own primary inputs for any record whose conclusion
    introduces no free inputs). Stops at the first violation.
    """
    if rec.kind is not Kind.EXTENSION:
        raise ValueError(f"{rec.label}: not an extension record")
    extended = rec.conc()
    vars = primary_input_list(extended)
    if not vars:
        return SoundnessReport(label=rec.label, tested=0, exhaustive=True)
    stream = enumerate_assignments(vars, app, tag)
    tested = 0
    for asg in stream:
        tested += 1
        if not execute(rec.premise, asg, app).computable:
            continue
        result = execute(extended, asg, app)
        if not result.computable:
            return SoundnessReport(
                label=rec.label,
                tested=tested,
                exhaustive=stream.exhaustive,
                counterexample=asg,
                failing_step=result.step,
            )
    return SoundnessReport(label=rec.label, tested=tested, exhaustive=stream.exhaustive)


def check_falsity(rec: IEPRecord, app: Application, tag: str = "") -> SoundnessReport:
    """A falsity statement fails on the first assignment that computes through."""
    if rec.kind is not Kind.FALSITY:
        raise ValueError(f"{rec.label}: not a falsity record")
    vars = primary_input_list(rec.premise)
    if not vars:
        result = execute(rec.premise, {}, app)
        if result.computable:
            return SoundnessReport(
                label=rec.label, tested=1, exhaustive=True, counterexample={}
            )
        return SoundnessReport(label=rec.label, tested=1, exhaustive=True)
    stream = enumerate_assignments(vars, app, tag)
    tested = 0
    for asg in stream:
        tested += 1
        if execute(rec.premise, asg, app).computable:
            return SoundnessReport(
                label=rec.label,
                tested=tested,
                exhaustive=stream.exhaustive,
                counterexample=asg,
            )
    return SoundnessReport(label=rec.label, tested=tested, exhaustive=stream.exhaustive)


def check_record(rec: IEPRecord, app: Application, tag: str = "") -> SoundnessReport:
    if rec.kind is Kind.FALSITY:
        return check_falsity(rec, app, tag)
    return check_ep(rec, app, tag)


def recheck_pass(
    snapshot: Snapshot, app: Application, epoch: int, labels: Iterable[str] | None = None
) -> list[SoundnessReport]:
    """One round over every record (or `labels`), with a per-epoch sampler tag.

    Records whose assignment space exceeds the exhaustive threshold see fresh
    samples each epoch because the tag feeds the sampler seed. Counterexample
    reports are the orchestrator's cue to retract; run counters are applied by
    the orchestrator since snapshots are immutable.
    """
    todo = snapshot.labels() if labels is None else tuple(labels)
    return [check_record(snapshot.get(label), app, tag=f"epoch{epoch}") for label in todo]
