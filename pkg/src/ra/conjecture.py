"""Conjecture enumeration by binding-matrix template search.

Candidates are generated shortest-premise-first: choose atomic-program names
with repetition for the premise and the conclusion, then walk every
slot-equivalence relation (restricted growth strings, capped at the maximum
variable count) over the flattened I/O slots. Structural filters reject
anything that could not be an irreducible extension, and survivors are
screened against the empirical data through the soundness checker before
they may enter the knowledge base.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .application import Application
from .kernel import (
    BindingTemplate,
    Program,
    Statement,
    binding_template,
    conc,
    validate_program,
)
from .knowledge import IEPRecord, Kind, Snapshot
from .soundness import SoundnessReport, check_ep

FAIL_CONC_INVALID = "extended_program_invalid"
FAIL_PREMISE_INVALID = "premise_invalid"
FAIL_TRIVIAL = "conclusion_repeats_premise_statement"
FAIL_UNBOUND_INPUT = "conclusion_input_not_in_premise"
FAIL_DISCONNECTED = "premise_statement_disconnected"


@dataclass(frozen=True)
class TemplateCandidate:
    """One enumerated conjecture shape, instantiated with canonical x-variables."""

    ap_names: tuple[str, ...]
    template: BindingTemplate
    premise: Program
    conclusion: Statement

    def extended(self) -> Program:
        return conc(self.premise, self.conclusion)


def structural_filter(cand: TemplateCandidate) -> str | None:
    """None when the candidate passes; otherwise the failed condition.

    Conditions: the extended program and the premise alone must satisfy the
    I/O dependency checks, the conclusion must not repeat a premise statement
    verbatim, every conclusion input must occur in the premise (no free
    conjecture inputs), and no premise statement may be variable-disjoint
    from all the others (padding can never survive irreducibility).
    """
    if validate_program(cand.extended()) is not None:
        return FAIL_CONC_INVALID
    if validate_program(cand.premise) is not None:
        return FAIL_PREMISE_INVALID
    if cand.premise.contains(cand.conclusion):
        return FAIL_TRIVIAL
    premise_vars = set(cand.premise.variables())
    if any(v not in premise_vars for v in cand.conclusion.inputs):
        return FAIL_UNBOUND_INPUT
    if len(cand.premise) > 1:
        var_sets = [set(s.variables()) for s in cand.premise.statements]
        for i, vars_i in enumerate(var_sets):
            others = set().union(*(vs for j, vs in enumerate(var_sets) if j != i))
            if not vars_i & others:
                return FAIL_DISCONNECTED
    return None


def _growth_strings(n_slots: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    # Restricted growth strings enumerate set partitions canonically and
    # lexicographically; block index == canonical variable index.
    prefix = [0] * n_slots

    def rec(i: int, prefix_max: int) -> Iterator[tuple[int, ...]]:
        if i == n_slots:
            yield tuple(prefix)
            return
        limit = min(prefix_max + 1, max_blocks - 1)
        for v in range(limit + 1):
            prefix[i] = v
            yield from rec(i + 1, max(prefix_max, v))

    if n_slots == 0:
        return
    yield from rec(1, 0) if n_slots > 1 else iter([(0,)])


def _instantiate(
    ap_names: tuple[str, ...], arities: list[tuple[int, int]], growth: tuple[int, ...]
) -> tuple[Program, Statement]:
    variables = [f"x{g + 1}" for g in growth]
    statements: list[Statement] = []
    cursor = 0
    for name, (n_in, n_out) in zip(ap_names, arities):
        inputs = tuple(variables[cursor : cursor + n_in])
        outputs = tuple(variables[cursor + n_in : cursor + n_in + n_out])
        statements.append(Statement(name, inputs, outputs))
        cursor += n_in + n_out
    return Program(tuple(statements[:-1])), statements[-1]


def enumerate_templates(
    app: Application, premise_len: int, snapshot: Snapshot | None = None
) -> Iterator[TemplateCandidate]:
    """Stream every filtered candidate of the given premise length.

    Deterministic order: atomic-program names lexicographically (premise
    slots first, conclusion last), then growth-string order over the slot
    partitions. Candidates structurally equivalent to a snapshot record are
    skipped, and the stream itself never repeats a structural class.
    """
    if not 1 <= premise_len <= app.mach.max_premise_len:
        raise ValueError(f"premise_len must be in 1..{app.mach.max_premise_len}")
    known: set[BindingTemplate] = set()
    if snapshot is not None:
        for rec in snapshot.records.values():
            if rec.kind is Kind.EXTENSION:
                known.add(binding_template(rec.conc()))
    names = sorted(sig.name for sig in app.signatures)
    arity = {sig.name: (sig.n_in, sig.n_out) for sig in app.signatures}

    def choose(slots_filled: tuple[str, ...]) -> Iterator[tuple[str, ...]]:
        if len(slots_filled) == premise_len + 1:
            yield slots_filled
            return
        for name in names:
            yield from choose(slots_filled + (name,))

    for ap_names in choose(()):
        arities = [arity[name] for name in ap_names]
        n_slots = sum(a + b for a, b in arities)
        for growth in _growth_strings(n_slots, app.mach.max_vars):
            premise, conclusion = _instantiate(ap_names, arities, growth)
            cand = TemplateCandidate(
                ap_names=ap_names,
                template=binding_template(conc(premise, conclusion)),
                premise=premise,
                conclusion=conclusion,
            )
            if structural_filter(cand) is not None:
                continue
            if cand.template in known:
                continue
            yield cand


def screen_against_data(cand: TemplateCandidate, app: Application) -> SoundnessReport:
    """Admission gate: run the standard-budget soundness check once.

    The candidate is admissible when the report carries no counterexample;
    rejected reports carry the first violating assignment.
    """
    rec = IEPRecord(
        label="candidate",
        premise=cand.premise,
        conclusion=cand.conclusion,
        kind=Kind.EXTENSION,
    )
    return check_ep(rec, app, tag="screen")
