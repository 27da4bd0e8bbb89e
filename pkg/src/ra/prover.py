"""Forward-chaining proof search over extension records.

A proof grows the target's premise one derived statement at a time: each step
cites a stored record, matches an order-preserving sublist of the current
proof program against that record's premise, and appends the renamed
conclusion. Search is breadth-first (shallowest proof first, lexicographic
step order breaking ties), replay is the trusted recheck before anything is
committed, connection-list reduction detects superfluous premise statements,
and circular proof dependencies are resolved by re-proving cycle members
against restricted record sets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .application import MachParams
from .kernel import (
    FreshNames,
    Program,
    Statement,
    apply_renaming,
    io_match,
    sublists,
)
from .knowledge import IEPRecord, Kind, KnowledgeBase, Snapshot, UnknownLabel, dependency_closure


@dataclass(frozen=True)
class ProofStep:
    """One extension: cited record, matched 1-based positions, renaming, result."""

    used_label: str
    matched_positions: tuple[int, ...]
    renaming: Mapping[str, str]
    derived: Statement

    def to_json_obj(self) -> dict:
        return {
            "use": self.used_label,
            "at": list(self.matched_positions),
            "rename": dict(self.renaming),
            "derive": self.derived.to_json(),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> ProofStep:
        return cls(
            used_label=obj["use"],
            matched_positions=tuple(int(i) for i in obj["at"]),
            renaming=dict(obj["rename"]),
            derived=Statement.from_json(obj["derive"]),
        )


@dataclass(frozen=True)
class Proof:
    """Ordered proof steps from a target's premise to its conclusion.

    `final_index` is the 1-based position (in the fully extended program) of
    the statement that realizes the target conclusion; a zero-step proof
    points at a premise statement.
    """

    target: str
    initial: Program
    steps: tuple[ProofStep, ...]
    final_index: int

    def program(self) -> Program:
        prog = self.initial
        for step in self.steps:
            prog = prog.extended(step.derived)
        return prog

    def to_json_obj(self) -> dict:
        return {
            "target": self.target,
            "steps": [s.to_json_obj() for s in self.steps],
            "final": self.final_index,
        }

    @classmethod
    def from_json_obj(cls, obj: dict, initial: Program) -> Proof:
        return cls(
            target=obj["target"],
            initial=initial,
            steps=tuple(ProofStep.from_json_obj(s) for s in obj["steps"]),
            final_index=int(obj["final"]),
        )


@dataclass(frozen=True)
class Exhausted:
    """Search ended without a proof.

    frontier_size counts the nodes left unexpanded at the depth cap (zero
    when the whole space was exhausted below it); depth_reached is the
    deepest level dequeued.
    """

    frontier_size: int
    depth_reached: int


def _conclusion_realized(statement: Statement, conclusion: Statement) -> bool:
    # Identity on the target's own (premise) variables; conclusion outputs are
    # fresh existentials, so any derived output naming realizes them.
    return (
        statement.ap == conclusion.ap
        and statement.inputs == conclusion.inputs
        and len(statement.outputs) == len(conclusion.outputs)
    )


def _usable_records(
    snapshot: Snapshot, exclude: frozenset[str]
) -> list[IEPRecord]:
    # Underivable records are citable: axioms only become axioms by being
    # used in proofs, which requires citing still-unproven records.
    return [
        rec
        for rec in snapshot.records.values()
        if rec.kind is Kind.EXTENSION and rec.label not in exclude
    ]


def generate_extensions(
    state: Program,
    snapshot: Snapshot,
    mach: MachParams,
    usable: Iterable[IEPRecord] | None = None,
    fresh_base: int = 0,
) -> list[ProofStep]:
    """All one-step extensions of a proof program, deterministically ordered.

    Matches every sublist of `state` against every usable record's premise;
    steps whose derived statement already occurs in `state` are dropped.
    `fresh_base` is the count of fresh names already allocated along this
    proof path, so sibling candidates draw identical fresh names.
    """
    records = (
        _usable_records(snapshot, frozenset()) if usable is None else list(usable)
    )
    by_len: dict[int, list[tuple[Program, tuple[int, ...]]]] = {}
    max_premise = max((len(r.premise) for r in records), default=0)
    # premises beyond the machine bound never match, whatever the store holds
    for sub, positions in sublists(state, min(max_premise, len(state), mach.max_premise_len)):
        by_len.setdefault(len(sub), []).append((sub, positions))
    reserved = frozenset(state.variables())
    steps: list[ProofStep] = []
    for rec in records:
        for sub, positions in by_len.get(len(rec.premise), ()):
            renaming = io_match(sub, rec.premise)
            if renaming is None:
                continue
            fresh = FreshNames(reserved=reserved, next_index=fresh_base + 1)
            derived = apply_renaming(rec.conclusion, renaming, fresh)
            if state.contains(derived):
                continue
            steps.append(
                ProofStep(
                    used_label=rec.label,
                    matched_positions=positions,
                    renaming=renaming,
                    derived=derived,
                )
            )
    steps.sort(key=lambda s: (s.used_label, s.matched_positions))
    return steps


def prove(
    target: str,
    snapshot: Snapshot,
    mach: MachParams,
    independent_of: Iterable[str] = (),
) -> Proof | Exhausted:
    """Breadth-first proof search for a stored extension record.

    The target itself is never citable. `independent_of` additionally bars
    the given labels and every record whose dependency closure reaches one of
    them (circularity resolution). Depth is capped at mach.max_proof_len.
    Returns the first proof in (depth, lexicographic step order), which is
    unique for fixed inputs.
    """
    rec = snapshot.get(target)
    if rec.kind is not Kind.EXTENSION or rec.conclusion is None:
        raise ValueError(f"{target}: only extension records can be proved")
    avoid = set(independent_of)
    exclude = {target} | avoid
    if avoid:
        tcl_map = snapshot.tcl_map()
        for label in snapshot.labels():
            if label in exclude:
                continue
            if any(j in avoid for j in dependency_closure(tcl_map, label)):
                exclude.add(label)
    usable = _usable_records(snapshot, frozenset(exclude))

    def goal_position(prog: Program) -> int | None:
        for i, statement in enumerate(prog.statements, start=1):
            if _conclusion_realized(statement, rec.conclusion):
                return i
        return None

    root = rec.premise
    queue: deque[tuple[Program, tuple[ProofStep, ...], int]] = deque([(root, (), 0)])
    visited: set[tuple[Statement, ...]] = {root.statements}
    depth_reached = 0
    depth_capped = 0
    while queue:
        prog, steps, fresh_count = queue.popleft()
        depth_reached = max(depth_reached, len(steps))
        found = goal_position(prog)
        if found is not None:
            return Proof(target=target, initial=root, steps=steps, final_index=found)
        if len(steps) >= mach.max_proof_len:
            depth_capped += 1
            continue
        for step in generate_extensions(prog, snapshot, mach, usable, fresh_count):
            child = prog.extended(step.derived)
            if child.statements in visited:
                continue
            visited.add(child.statements)
            # fresh names are exactly the derived variables outside the
            # renaming's image (they are drawn to avoid the state variables)
            allocated = len(set(step.derived.variables()) - set(step.renaming.values()))
            queue.append((child, steps + (step,), fresh_count + allocated))
    return Exhausted(frontier_size=depth_capped, depth_reached=depth_reached)


def replay(proof: Proof, snapshot: Snapshot) -> int | None:
    """Recheck a proof mechanically against the current snapshot.

    Returns None when verified. Otherwise the 1-based failing step; a final
    statement that does not realize the target conclusion reports step
    len(steps) + 1, and a missing/invalid target reports step 0.
    """
    try:
        rec = snapshot.get(proof.target)
    except UnknownLabel:
        return 0
    if rec.kind is not Kind.EXTENSION or rec.premise != proof.initial:
        return 0
    prog = proof.initial
    fresh_count = 0
    reserved = frozenset(proof.initial.variables())
    for idx, step in enumerate(proof.steps, start=1):
        cited = snapshot.records.get(step.used_label)
        if cited is None or cited.kind is not Kind.EXTENSION:
            return idx
        if step.used_label == proof.target:
            return idx
        if any(not 1 <= p <= len(prog) for p in step.matched_positions):
            return idx
        if list(step.matched_positions) != sorted(set(step.matched_positions)):
            return idx
        sub = Program(tuple(prog.statements[p - 1] for p in step.matched_positions))
        renaming = io_match(sub, cited.premise)
        if renaming is None or renaming != dict(step.renaming):
            return idx
        fresh = FreshNames(reserved=reserved, next_index=fresh_count + 1)
        derived = apply_renaming(cited.conclusion, renaming, fresh)
        if derived != step.derived:
            return idx
        fresh_count += fresh.allocated
        prog = prog.extended(derived)
    if not 1 <= proof.final_index <= len(prog):
        return len(proof.steps) + 1
    final = prog.statements[proof.final_index - 1]
    if not _conclusion_realized(final, rec.conclusion):
        return len(proof.steps) + 1
    return None


@dataclass(frozen=True)
class ReductionResult:
    """Backward-walk outcome: which premise positions and citations carry the proof."""

    premise_positions: tuple[int, ...]
    tcl: tuple[str, ...]
    reducible: bool
    needed_steps: tuple[int, ...]


def reduce_connections(proof: Proof, premise: Program | None = None) -> ReductionResult:
    """Walk the proof backwards to find the premise statements it really uses.

    A step is needed when its derived statement is the final statement or is
    matched by a needed later step; a premise position is needed when matched
    by a needed step or when it is the final statement itself. A strict
    subset of needed premise positions means the target is reducible: its
    conclusion already extends the smaller core, so the record is not
    irreducible as stated.
    """
    premise = proof.initial if premise is None else premise
    n = len(premise)
    needed_positions: set[int] = {proof.final_index}
    needed_steps: list[int] = []
    for idx in range(len(proof.steps), 0, -1):
        derived_position = n + idx
        if derived_position in needed_positions:
            needed_steps.append(idx)
            needed_positions.update(proof.steps[idx - 1].matched_positions)
    needed_steps.reverse()
    premise_positions = tuple(sorted(p for p in needed_positions if p <= n))
    tcl: dict[str, None] = {}
    for idx in needed_steps:
        tcl.setdefault(proof.steps[idx - 1].used_label)
    return ReductionResult(
        premise_positions=premise_positions,
        tcl=tuple(tcl),
        reducible=len(premise_positions) < n,
        needed_steps=tuple(needed_steps),
    )


def rebuild_proof(
    target: str,
    initial: Program,
    step_refs: Sequence[tuple[str, tuple[int, ...]]],
    snapshot: Snapshot,
    conclusion: Statement,
) -> Proof | None:
    """Recompute a proof canonically from (cited label, positions) references.

    Renamings, derived statements and fresh names are re-derived from scratch,
    so step lists surviving a reduction get consistent fresh numbering. The
    final index points at the last derived statement (or the premise statement
    realizing the conclusion for an empty step list). None when any reference
    fails to match.
    """
    prog = initial
    fresh_count = 0
    reserved = frozenset(initial.variables())
    steps: list[ProofStep] = []
    for used_label, positions in step_refs:
        cited = snapshot.records.get(used_label)
        if cited is None or cited.kind is not Kind.EXTENSION:
            return None
        if any(not 1 <= p <= len(prog) for p in positions):
            return None
        sub = Program(tuple(prog.statements[p - 1] for p in positions))
        renaming = io_match(sub, cited.premise)
        if renaming is None:
            return None
        fresh = FreshNames(reserved=reserved, next_index=fresh_count + 1)
        derived = apply_renaming(cited.conclusion, renaming, fresh)
        fresh_count += fresh.allocated
        steps.append(
            ProofStep(
                used_label=used_label,
                matched_positions=tuple(positions),
                renaming=renaming,
                derived=derived,
            )
        )
        prog = prog.extended(derived)
    final_index = None
    for i, statement in enumerate(prog.statements, start=1):
        if _conclusion_realized(statement, conclusion):
            final_index = i
    if final_index is None:
        return None
    return Proof(target=target, initial=initial, steps=tuple(steps), final_index=final_index)


def reduce_proof(proof: Proof, reduction: ReductionResult, snapshot: Snapshot,
                 target: str, conclusion: Statement) -> Proof | None:
    """Renumber a proof onto the reduced premise core."""
    core = [proof.initial.statements[p - 1] for p in reduction.premise_positions]
    position_map: dict[int, int] = {
        old: new for new, old in enumerate(reduction.premise_positions, start=1)
    }
    next_position = len(core) + 1
    n = len(proof.initial)
    step_refs: list[tuple[str, tuple[int, ...]]] = []
    for idx in reduction.needed_steps:
        step = proof.steps[idx - 1]
        position_map[n + idx] = next_position
        next_position += 1
        try:
            mapped = tuple(position_map[p] for p in step.matched_positions)
        except KeyError:
            return None
        step_refs.append((step.used_label, mapped))
    return rebuild_proof(target, Program(tuple(core)), step_refs, snapshot, conclusion)


@dataclass(frozen=True)
class Resolved:
    reproved: tuple[str, ...]


class Unresolvable:
    """Sentinel: no independent re-proof exists; the tentative commit is rolled back."""


def resolve_circularity(
    k: str,
    kb: KnowledgeBase,
    mach: MachParams,
    pre_commit: Snapshot | None = None,
) -> Resolved | Unresolvable:
    """Re-prove cycle members until every proof dependency is independent.

    Picks the cycle member with the longest premise (ties: lexicographically
    greatest label, keeping short laws as axioms) and seeks a proof that
    avoids the other members and their dependants. On failure the knowledge
    base is restored to `pre_commit` (or to the state at entry), discarding
    the tentative proof of k.
    """
    kb.get(k)
    entry = kb.snapshot() if pre_commit is None else pre_commit
    reproved: list[str] = []
    for _ in range(len(kb.labels()) + 1):
        cyclic = [label for label in kb.labels() if not kb.is_independent(label)]
        if not cyclic:
            return Resolved(tuple(reproved))
        victim = max(cyclic, key=lambda label: (len(kb.get(label).premise), label))
        others = [
            label
            for label in cyclic
            if label != victim
            and label in kb.closure(victim)
            and victim in kb.closure(label)
        ]
        snapshot = kb.snapshot()
        result = prove(victim, snapshot, mach, independent_of=others)
        failed = isinstance(result, Exhausted)
        if not failed:
            reduction = reduce_connections(result)
            if reduction.reducible:
                failed = True  # a cycle member's own premise must stay intact
            else:
                rebuilt = rebuild_proof(
                    victim,
                    result.initial,
                    [(s.used_label, s.matched_positions) for s in result.steps],
                    snapshot,
                    kb.get(victim).conclusion,
                )
                if rebuilt is None or replay(rebuilt, snapshot) is not None:
                    failed = True
                else:
                    kb.commit_proof(victim, rebuilt)
                    reproved.append(victim)
        if failed:
            kb.restore(entry)
            return Unresolvable()
    kb.restore(entry)
    return Unresolvable()
