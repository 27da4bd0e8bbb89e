"""Core program representation and matching.

Programs are ordered lists of atomic-program statements. This module owns
the single-assignment validity check, primary-input extraction, execution,
binding-matrix templates (the unit of structural equivalence), sublist
extraction and I/O-equivalence matching, plus variable renaming with a
deterministic fresh-name supply. Everything here is immutable and pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping

if TYPE_CHECKING:
    from .application import Application


@dataclass(frozen=True)
class Statement:
    """One atomic-program call: named program, input vars, output vars."""

    ap: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...] = ()

    def variables(self) -> tuple[str, ...]:
        """All slots in order, inputs then outputs."""
        return self.inputs + self.outputs

    def rename(self, mapping: Mapping[str, str]) -> Statement:
        return Statement(
            self.ap,
            tuple(mapping.get(v, v) for v in self.inputs),
            tuple(mapping.get(v, v) for v in self.outputs),
        )

    def to_json(self) -> list:
        return [self.ap, list(self.inputs), list(self.outputs)]

    @classmethod
    def from_json(cls, obj) -> Statement:
        ap, inputs, outputs = obj
        return cls(str(ap), tuple(str(v) for v in inputs), tuple(str(v) for v in outputs))

    def __str__(self) -> str:
        args = ",".join(self.inputs)
        if self.outputs:
            return f"{self.ap}({args}->{','.join(self.outputs)})"
        return f"{self.ap}({args})"


def stmt(ap: str, inputs: Iterable[str], outputs: Iterable[str] = ()) -> Statement:
    """Convenience constructor accepting any iterables."""
    return Statement(ap, tuple(inputs), tuple(outputs))


@dataclass(frozen=True)
class Program:
    """An ordered list of statements."""

    statements: tuple[Statement, ...]

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self) -> Iterator[Statement]:
        return iter(self.statements)

    def __getitem__(self, i: int) -> Statement:
        return self.statements[i]

    def variables(self) -> tuple[str, ...]:
        """Every variable in first-occurrence (slot) order."""
        seen: dict[str, None] = {}
        for s in self.statements:
            for v in s.variables():
                seen.setdefault(v)
        return tuple(seen)

    def contains(self, statement: Statement) -> bool:
        return statement in self.statements

    def extended(self, statement: Statement) -> Program:
        return Program(self.statements + (statement,))

    def to_json(self) -> list:
        return [s.to_json() for s in self.statements]

    @classmethod
    def from_json(cls, obj) -> Program:
        return cls(tuple(Statement.from_json(s) for s in obj))

    def __str__(self) -> str:
        return "[" + " ".join(str(s) for s in self.statements) + "]"


def program(*statements: Statement) -> Program:
    return Program(tuple(statements))


def conc(premise: Program, conclusion: Statement | None) -> Program:
    """Concatenate a premise program with a conclusion statement.

    A None conclusion (falsity records) concatenates to the premise itself.
    """
    if conclusion is None:
        return premise
    return premise.extended(conclusion)


@dataclass(frozen=True)
class Violation:
    """Single-assignment failure at a 1-based statement index."""

    step: int
    var: str
    reason: str = "output_not_fresh"


def validate_program(p: Program) -> Violation | None:
    """Check the I/O dependency conditions; None means valid.

    Every output variable must be fresh: it may appear nowhere earlier in the
    program, not among its statement's own inputs, and not twice in one output
    list. Inputs are unconstrained (anything unproduced joins the primary
    input list).
    """
    seen: set[str] = set()
    for i, s in enumerate(p.statements, start=1):
        produced: set[str] = set()
        for out in s.outputs:
            if out in seen or out in s.inputs or out in produced:
                return Violation(step=i, var=out)
            produced.add(out)
        seen.update(s.inputs)
        seen.update(s.outputs)
    return None


def is_valid(p: Program) -> bool:
    return validate_program(p) is None


def primary_input_list(p: Program) -> tuple[str, ...]:
    """Variables the program consumes but never produces, in first-occurrence order."""
    produced: set[str] = set()
    pil: dict[str, None] = {}
    for s in p.statements:
        for v in s.inputs:
            if v not in produced:
                pil.setdefault(v)
        produced.update(s.outputs)
    return tuple(pil)


@dataclass(frozen=True)
class ExecutionResult:
    """Outcome of executing a program on a total assignment of its primary inputs.

    Computable results carry the final environment (inputs plus every produced
    output); otherwise `step` is the 1-based index of the first statement whose
    atomic program was undefined on its inputs.
    """

    env: Mapping[str, int] | None
    step: int | None = None

    @property
    def computable(self) -> bool:
        return self.env is not None


def execute(p: Program, assignment: Mapping[str, int], app: "Application") -> ExecutionResult:
    """Run statements left to right, threading produced outputs through the environment.

    `assignment` must be total on primary_input_list(p) and `p` valid.
    Raises UnknownAtomicProgram (from the application) for unknown names.
    """
    env = dict(assignment)
    for i, s in enumerate(p.statements, start=1):
        values = tuple(env[v] for v in s.inputs)
        result = app.evaluate(s.ap, values)
        if result is None:
            return ExecutionResult(env=None, step=i)
        for var, val in zip(s.outputs, result):
            env[var] = val
    return ExecutionResult(env=env)


@dataclass(frozen=True)
class BindingTemplate:
    """Binary matrix over flattened I/O slots marking shared variables.

    Slots are ordered statement by statement, inputs then outputs. Two
    programs with equal ap-name lists and equal matrices are structurally
    equivalent (identical up to variable renaming).
    """

    ap_names: tuple[str, ...]
    matrix: tuple[tuple[int, ...], ...]


def binding_template(p: Program) -> BindingTemplate:
    slots: list[str] = []
    for s in p.statements:
        slots.extend(s.variables())
    n = len(slots)
    matrix = tuple(
        tuple(1 if slots[a] == slots[b] else 0 for b in range(n)) for a in range(n)
    )
    return BindingTemplate(tuple(s.ap for s in p.statements), matrix)


def structurally_equivalent(p1: Program, p2: Program) -> bool:
    return binding_template(p1) == binding_template(p2)


def sublists(p: Program, max_len: int) -> Iterator[tuple[Program, tuple[int, ...]]]:
    """Yield every order-preserving subsequence of length 1..max_len.

    Positions are 1-based and each length is exhausted in lexicographic
    position order before the next. Subsequences are not revalidated; they are
    matched against patterns, never executed standalone.
    """
    n = len(p)
    for length in range(1, min(max_len, n) + 1):
        for positions in itertools.combinations(range(n), length):
            sub = Program(tuple(p.statements[i] for i in positions))
            yield sub, tuple(i + 1 for i in positions)


def io_match(sub: Program, pattern: Program) -> dict[str, str] | None:
    """Find the variable bijection taking `pattern` onto `sub` slot by slot.

    Requires equal ap-name sequences, matching slot positions and an injective
    map; returns the renaming (pattern var -> sub var) or None.
    """
    if len(sub) != len(pattern):
        return None
    renaming: dict[str, str] = {}
    used: set[str] = set()
    for s_stmt, p_stmt in zip(sub.statements, pattern.statements):
        if s_stmt.ap != p_stmt.ap:
            return None
        if len(s_stmt.inputs) != len(p_stmt.inputs) or len(s_stmt.outputs) != len(p_stmt.outputs):
            return None
        for sv, pv in zip(s_stmt.variables(), p_stmt.variables()):
            bound = renaming.get(pv)
            if bound is None:
                if sv in used:
                    return None
                renaming[pv] = sv
                used.add(sv)
            elif bound != sv:
                return None
    return renaming


@dataclass
class FreshNames:
    """Deterministic v1, v2, ... supply that skips reserved names."""

    reserved: frozenset[str] = frozenset()
    next_index: int = 1
    prefix: str = "v"
    allocated: int = field(default=0, init=False)

    def take(self) -> str:
        while True:
            name = f"{self.prefix}{self.next_index}"
            self.next_index += 1
            if name not in self.reserved:
                self.allocated += 1
                return name


def apply_renaming(s: Statement, renaming: Mapping[str, str], fresh: FreshNames) -> Statement:
    """Map a statement's variables through `renaming`, freshening unmapped ones.

    Variables outside the renaming's domain (conclusion-only outputs) draw
    deterministic names from the supply; a repeated unmapped variable keeps
    the name it was first given.
    """
    local: dict[str, str] = {}

    def resolve(v: str) -> str:
        if v in renaming:
            return renaming[v]
        if v not in local:
            local[v] = fresh.take()
        return local[v]

    return Statement(
        s.ap,
        tuple(resolve(v) for v in s.inputs),
        tuple(resolve(v) for v in s.outputs),
    )
