"""Record store partitioned into axioms, theorems and underivables.

Keeps every conjecture as an immutable record, enforces the partition
invariants, derives theorem connection lists from committed proofs, traces
dependency closures with the fixed-point walk, and cascades retraction of
unsound records through every proof that depends on them. Single writer:
only the orchestrator mutates a knowledge base; actions read snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .kernel import Program, Statement, conc, structurally_equivalent, validate_program

if TYPE_CHECKING:
    from .prover import Proof


class Status(str, Enum):
    AXIOM = "axiom"
    THEOREM = "theorem"
    UNDERIVABLE = "underivable"


class Kind(str, Enum):
    EXTENSION = "extension"
    FALSITY = "falsity"


class UnknownLabel(KeyError):
    pass


class DuplicateRecord(Exception):
    """Structurally equivalent record already stored."""

    def __init__(self, existing: str):
        super().__init__(f"duplicate of {existing}")
        self.existing = existing


class InvalidRecord(ValueError):
    pass


@dataclass(frozen=True)
class IEPRecord:
    """One conjecture: premise ⊢ conclusion, or a falsity statement.

    Falsity records carry a None conclusion and assert their premise is never
    computable. `tcl` is the theorem connection list: labels explicitly cited
    by this record's proof (renaming/substitution is never recorded). Axioms
    and underivables have empty connection lists.
    """

    label: str
    premise: Program
    conclusion: Statement | None
    status: Status = Status.UNDERIVABLE
    kind: Kind = Kind.EXTENSION
    tcl: tuple[str, ...] = ()
    proof: "Proof | None" = None
    soundness_runs: int = 0
    origin: str = "loaded"
    origin_epoch: int = 0

    def conc(self) -> Program:
        return conc(self.premise, self.conclusion)

    def to_json_obj(self) -> dict:
        return {
            "label": self.label,
            "status": self.status.value,
            "kind": self.kind.value,
            "premise": self.premise.to_json(),
            "conclusion": None if self.conclusion is None else self.conclusion.to_json(),
            "tcl": list(self.tcl),
            "proof": None if self.proof is None else self.proof.to_json_obj(),
            "soundness_runs": self.soundness_runs,
            "origin": self.origin,
            "origin_epoch": self.origin_epoch,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> IEPRecord:
        from .prover import Proof  # deferred: prover imports this module

        premise = Program.from_json(obj["premise"])
        proof_obj = obj.get("proof")
        return cls(
            label=obj["label"],
            premise=premise,
            conclusion=None
            if obj.get("conclusion") is None
            else Statement.from_json(obj["conclusion"]),
            status=Status(obj["status"]),
            kind=Kind(obj["kind"]),
            tcl=tuple(obj.get("tcl", ())),
            proof=None if proof_obj is None else Proof.from_json_obj(proof_obj, premise),
            soundness_runs=int(obj.get("soundness_runs", 0)),
            origin=obj.get("origin", "loaded"),
            origin_epoch=int(obj.get("origin_epoch", 0)),
        )


@dataclass(frozen=True)
class PartitionView:
    ax: tuple[str, ...]
    th: tuple[str, ...]
    ud: tuple[str, ...]
    epoch: int


@dataclass(frozen=True)
class StateMetrics:
    n_ax: int
    n_th: int
    n_ud: int
    complete: bool


def dependency_closure(tcl: Mapping[str, Sequence[str]], k: str) -> list[str]:
    """All labels a proof traces back to, by repeated connection-list merging.

    Fixed point: seed with tcl[k], then repeatedly append the connection list
    of every member (deduplicating, first occurrence wins) until the list
    stops growing. Cycles stay in the result, which is what independence
    checking relies on.
    """
    b = list(tcl.get(k, ()))
    while True:
        c = list(b)
        for i in range(len(b)):
            for extra in tcl.get(b[i], ()):
                if extra not in c:
                    c.append(extra)
        if b == c:
            return b
        b = c


def _partition(records: Mapping[str, IEPRecord], epoch: int) -> PartitionView:
    ax = tuple(r.label for r in records.values() if r.status is Status.AXIOM)
    th = tuple(r.label for r in records.values() if r.status is Status.THEOREM)
    ud = tuple(r.label for r in records.values() if r.status is Status.UNDERIVABLE)
    return PartitionView(ax=ax, th=th, ud=ud, epoch=epoch)


def _metrics(records: Mapping[str, IEPRecord]) -> StateMetrics:
    n_ax = sum(1 for r in records.values() if r.status is Status.AXIOM)
    n_th = sum(1 for r in records.values() if r.status is Status.THEOREM)
    n_ud = sum(1 for r in records.values() if r.status is Status.UNDERIVABLE)
    return StateMetrics(n_ax=n_ax, n_th=n_th, n_ud=n_ud, complete=n_ud == 0)


@dataclass(frozen=True)
class Snapshot:
    """Frozen view of the record table; later KB mutations never alter it."""

    records: Mapping[str, IEPRecord]
    epoch: int

    def get(self, label: str) -> IEPRecord:
        rec = self.records.get(label)
        if rec is None:
            raise UnknownLabel(label)
        return rec

    def __contains__(self, label: str) -> bool:
        return label in self.records

    def labels(self) -> tuple[str, ...]:
        return tuple(self.records)

    def partition(self) -> PartitionView:
        return _partition(self.records, self.epoch)

    def tcl_map(self) -> dict[str, tuple[str, ...]]:
        return {label: rec.tcl for label, rec in self.records.items()}

    def closure(self, k: str) -> list[str]:
        self.get(k)
        return dependency_closure(self.tcl_map(), k)

    def is_independent(self, k: str) -> bool:
        return k not in self.closure(k)


class KnowledgeBase:
    """Mutable record store; every mutation bumps the epoch counter.

    Set `check_invariants = True` (class-wide) to re-verify partition
    disjointness/coverage and status/proof consistency after every mutation;
    the test suite runs with it on.
    """

    check_invariants = False

    def __init__(self):
        self._records: dict[str, IEPRecord] = {}
        self._epoch = 0
        self._generated = 0

    # -- read side -------------------------------------------------------

    @property
    def epoch(self) -> int:
        return self._epoch

    def get(self, label: str) -> IEPRecord:
        rec = self._records.get(label)
        if rec is None:
            raise UnknownLabel(label)
        return rec

    def __contains__(self, label: str) -> bool:
        return label in self._records

    def labels(self) -> tuple[str, ...]:
        return tuple(self._records)

    def records(self) -> tuple[IEPRecord, ...]:
        return tuple(self._records.values())

    def partition(self) -> PartitionView:
        return _partition(self._records, self._epoch)

    def metrics(self) -> StateMetrics:
        return _metrics(self._records)

    def snapshot(self) -> Snapshot:
        return Snapshot(records=dict(self._records), epoch=self._epoch)

    def closure(self, k: str) -> list[str]:
        self.get(k)
        return dependency_closure({l: r.tcl for l, r in self._records.items()}, k)

    def is_independent(self, k: str) -> bool:
        return k not in self.closure(k)

    def find_equivalent(self, premise: Program, conclusion: Statement | None, kind: Kind) -> str | None:
        """Label of a stored record of the same kind with an equal binding template."""
        candidate = conc(premise, conclusion)
        for rec in self._records.values():
            if rec.kind is kind and structurally_equivalent(rec.conc(), candidate):
                return rec.label
        return None

    def next_generated_label(self) -> str:
        self._generated += 1
        return f"G{self._generated:04d}"

    # -- write side ------------------------------------------------------

    def add_conjecture(self, rec: IEPRecord) -> str:
        """Insert a new conjecture as underivable; raises DuplicateRecord.

        Status and connection list are forced regardless of what the caller
        built; every record enters as an underivable with no proof.
        """
        if rec.label in self._records:
            raise DuplicateRecord(rec.label)
        if len(rec.premise) < 1:
            raise InvalidRecord(f"{rec.label}: empty premise")
        if rec.kind is Kind.EXTENSION and rec.conclusion is None:
            raise InvalidRecord(f"{rec.label}: extension record needs a conclusion")
        violation = validate_program(rec.conc())
        if violation is not None:
            raise InvalidRecord(
                f"{rec.label}: output {violation.var!r} not fresh at step {violation.step}"
            )
        existing = self.find_equivalent(rec.premise, rec.conclusion, rec.kind)
        if existing is not None:
            raise DuplicateRecord(existing)
        self._records[rec.label] = replace(
            rec, status=Status.UNDERIVABLE, tcl=(), proof=None
        )
        self._bump()
        return rec.label

    def commit_proof(self, k: str, proof: "Proof") -> list[tuple[str, Status, Status]]:
        """Store a verified proof for k and propagate the partition changes.

        The connection list is the first-use-ordered labels cited by the proof
        steps. k becomes a theorem (axioms are relabeled, theorems replace
        their proof); every unproven underivable in the new closure of k is
        promoted to axiom. Returns (label, old status, new status) events.
        The caller is responsible for having replayed the proof.
        """
        rec = self.get(k)
        tcl: dict[str, None] = {}
        for step in proof.steps:
            tcl.setdefault(step.used_label)
        for cited in tcl:
            if cited not in self._records:
                raise UnknownLabel(cited)
        events: list[tuple[str, Status, Status]] = []
        self._records[k] = replace(rec, status=Status.THEOREM, tcl=tuple(tcl), proof=proof)
        if rec.status is not Status.THEOREM:
            events.append((k, rec.status, Status.THEOREM))
        for j in self.closure(k):
            other = self._records.get(j)
            if other is not None and other.status is Status.UNDERIVABLE and other.proof is None:
                self._records[j] = replace(other, status=Status.AXIOM)
                events.append((j, Status.UNDERIVABLE, Status.AXIOM))
        self._bump()
        return events

    def retract_unsound(self, k: str) -> list[str]:
        """Remove k and demote every theorem whose proof depends on it.

        Demoted theorems lose proof and connection list; the demotion target
        mirrors the promotion rule (axiom while still cited by a surviving
        theorem's closure, underivable otherwise). Returns all touched labels,
        the retracted one first.
        """
        self.get(k)
        tcl_map = {l: r.tcl for l, r in self._records.items()}
        affected = [
            label
            for label, rec in self._records.items()
            if label != k
            and rec.proof is not None
            and k in dependency_closure(tcl_map, label)
        ]
        del self._records[k]
        for label in affected:
            rec = self._records[label]
            self._records[label] = replace(
                rec, status=Status.UNDERIVABLE, tcl=(), proof=None
            )
        surviving_tcl = {l: r.tcl for l, r in self._records.items()}
        survivors = [l for l, r in self._records.items() if r.proof is not None]
        for label in affected:
            still_cited = any(
                label in dependency_closure(surviving_tcl, s) for s in survivors
            )
            if still_cited:
                self._records[label] = replace(self._records[label], status=Status.AXIOM)
        self._bump()
        return [k] + affected

    def note_soundness_runs(self, labels: Iterable[str]) -> None:
        """Record one completed soundness pass for each label (one mutation)."""
        for label in labels:
            rec = self._records.get(label)
            if rec is not None:
                self._records[label] = replace(rec, soundness_runs=rec.soundness_runs + 1)
        self._bump()

    def restore(self, snap: Snapshot) -> None:
        """Reset the record table to a snapshot (tentative-proof rollback)."""
        self._records = dict(snap.records)
        self._epoch = snap.epoch
        if self.check_invariants:
            self._assert_invariants()

    # -- internals -------------------------------------------------------

    def _bump(self) -> None:
        self._epoch += 1
        if self.check_invariants:
            self._assert_invariants()

    def _assert_invariants(self) -> None:
        view = self.partition()
        combined = list(view.ax) + list(view.th) + list(view.ud)
        assert len(combined) == len(set(combined)), "partition lists overlap"
        assert set(combined) == set(self._records), "partition does not cover records"
        for rec in self._records.values():
            assert (rec.status is Status.THEOREM) == (rec.proof is not None), (
                f"{rec.label}: theorem status and proof presence disagree"
            )
            if rec.status is not Status.THEOREM:
                assert rec.tcl == (), f"{rec.label}: non-theorem with connection list"
            for cited in rec.tcl:
                assert cited in self._records, f"{rec.label}: dangling tcl entry {cited}"

    # -- persistence -----------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "epoch": self._epoch,
            "generated": self._generated,
            "records": [rec.to_json_obj() for rec in self._records.values()],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> KnowledgeBase:
        kb = cls()
        kb._epoch = int(obj.get("epoch", 0))
        kb._generated = int(obj.get("generated", 0))
        for rec_obj in obj.get("records", ()):
            rec = IEPRecord.from_json_obj(rec_obj)
            kb._records[rec.label] = rec
        if cls.check_invariants:
            kb._assert_invariants()
        return kb
