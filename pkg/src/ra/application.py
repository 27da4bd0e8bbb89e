"""Application definitions: atomic-program signatures, machine bounds, domains.

An application bundles the atomic programs (builtin or observation-table
semantics), the machine resource bounds, the integer value domain inferred
from the empirical data, and any conjectures / falsity statements shipped in
the application file. Also home to the assignment sampler used by the
soundness checks.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .kernel import Program, Statement, validate_program

BUILTINS = ("le", "lt", "add")

MACH_FIELDS = (
    "max_premise_len",
    "max_io_len",
    "max_proof_len",
    "max_vars",
    "sample_budget",
    "exhaustive_threshold",
    "seed",
)


class ParseError(ValueError):
    """Raised for malformed application files."""

    def __init__(self, location: str, reason: str):
        super().__init__(f"{location}: {reason}")
        self.location = location
        self.reason = reason


class UnknownAtomicProgram(KeyError):
    pass


class UnknownBuiltin(KeyError):
    pass


@dataclass(frozen=True)
class APSignature:
    """An atomic program: fixed arities plus builtin or table semantics."""

    name: str
    n_in: int
    n_out: int
    builtin: str | None = None
    table: Mapping[tuple[int, ...], tuple[int, ...]] | None = None


@dataclass(frozen=True)
class MachParams:
    """Machine resource bounds limiting how deeply an application is explored."""

    max_premise_len: int
    max_io_len: int
    max_proof_len: int
    max_vars: int
    sample_budget: int
    exhaustive_threshold: int
    seed: int


@dataclass(frozen=True)
class LoadedIEP:
    label: str
    premise: Program
    conclusion: Statement


@dataclass(frozen=True)
class LoadedFalsity:
    label: str
    program: Program


@dataclass(frozen=True)
class Application:
    """Immutable application: signatures, bounds, value domain, shipped records."""

    label: str
    signatures: tuple[APSignature, ...]
    mach: MachParams
    vmin: int
    vmax: int
    ieps: tuple[LoadedIEP, ...] = ()
    falsity: tuple[LoadedFalsity, ...] = ()
    _by_name: dict[str, APSignature] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {s.name: s for s in self.signatures})

    def signature(self, name: str) -> APSignature:
        sig = self._by_name.get(name)
        if sig is None:
            raise UnknownAtomicProgram(name)
        return sig

    def evaluate(self, ap_name: str, values: Sequence[int]) -> tuple[int, ...] | None:
        return evaluate_ap(self.signature(ap_name), values, self)

    @property
    def domain_size(self) -> int:
        return self.vmax - self.vmin + 1

    def domain_values(self) -> range:
        return range(self.vmin, self.vmax + 1)


def evaluate_ap(sig: APSignature, inputs: Sequence[int], app: Application) -> tuple[int, ...] | None:
    """Evaluate one atomic program on input values; None means undefined.

    Builtins: le/lt are pure relations (empty output on success), add is
    defined only while the sum stays inside the application domain. Table
    semantics look the input tuple up in the observation rows.
    """
    if len(inputs) != sig.n_in:
        raise ValueError(f"{sig.name}: expected {sig.n_in} inputs, got {len(inputs)}")
    if sig.table is not None:
        return sig.table.get(tuple(inputs))
    if sig.builtin == "le":
        return () if inputs[0] <= inputs[1] else None
    if sig.builtin == "lt":
        return () if inputs[0] < inputs[1] else None
    if sig.builtin == "add":
        total = inputs[0] + inputs[1]
        if app.vmin <= total <= app.vmax:
            return (total,)
        return None
    raise UnknownBuiltin(sig.builtin)


def _parse_statement(obj, where: str, signatures: dict[str, APSignature]) -> Statement:
    try:
        s = Statement.from_json(obj)
    except (TypeError, ValueError):
        raise ParseError(where, f"malformed statement {obj!r}") from None
    sig = signatures.get(s.ap)
    if sig is None:
        raise ParseError(where, f"unknown atomic program {s.ap!r}")
    if len(s.inputs) != sig.n_in or len(s.outputs) != sig.n_out:
        raise ParseError(where, f"arity mismatch for {s.ap!r}")
    return s


def _parse_signature(obj, idx: int, mach: MachParams) -> APSignature:
    where = f"atomic_programs[{idx}]"
    for key in ("name", "in", "out"):
        if key not in obj:
            raise ParseError(where, f"missing {key!r}")
    name, n_in, n_out = str(obj["name"]), int(obj["in"]), int(obj["out"])
    if n_in + n_out > mach.max_io_len:
        raise ParseError(where, f"I/O arity {n_in + n_out} exceeds max_io_len {mach.max_io_len}")
    if "builtin" in obj:
        if obj["builtin"] not in BUILTINS:
            raise ParseError(where, f"unknown builtin {obj['builtin']!r}")
        return APSignature(name, n_in, n_out, builtin=obj["builtin"])
    if "table" in obj:
        rows: dict[tuple[int, ...], tuple[int, ...]] = {}
        for row in obj["table"]:
            try:
                ins, outs = tuple(int(v) for v in row[0]), tuple(int(v) for v in row[1])
            except (TypeError, ValueError, IndexError):
                raise ParseError(where, f"malformed table row {row!r}") from None
            if len(ins) != n_in or len(outs) != n_out:
                raise ParseError(where, f"table row arity mismatch {row!r}")
            if ins in rows and rows[ins] != outs:
                raise ParseError(where, f"non-functional table at input {list(ins)}")
            rows[ins] = outs
        return APSignature(name, n_in, n_out, table=rows)
    raise ParseError(where, "signature needs either 'builtin' or 'table'")


def load_application(text: str) -> Application:
    """Parse an application file; raises ParseError on any invalid content.

    When "domain" is absent it is inferred as the min/max over every value in
    every observation table.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError("file", f"invalid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("file", "top level must be an object")
    label = str(doc.get("label", ""))
    if not label:
        raise ParseError("label", "missing or empty")

    mach_obj = doc.get("mach")
    if not isinstance(mach_obj, dict):
        raise ParseError("mach", "missing mach object")
    missing = [k for k in MACH_FIELDS if k not in mach_obj]
    if missing:
        raise ParseError("mach", f"missing fields: {', '.join(missing)}")
    mach = MachParams(**{k: int(mach_obj[k]) for k in MACH_FIELDS})
    for name in MACH_FIELDS[:-1]:
        if getattr(mach, name) < 1:
            raise ParseError("mach", f"{name} must be >= 1")

    raw_sigs = doc.get("atomic_programs")
    if not raw_sigs:
        raise ParseError("atomic_programs", "missing or empty")
    signatures = tuple(_parse_signature(o, i, mach) for i, o in enumerate(raw_sigs))
    by_name: dict[str, APSignature] = {}
    for sig in signatures:
        if sig.name in by_name:
            raise ParseError("atomic_programs", f"duplicate name {sig.name!r}")
        by_name[sig.name] = sig

    table_values = [
        v
        for sig in signatures
        if sig.table is not None
        for ins, outs in sig.table.items()
        for v in (*ins, *outs)
    ]
    if "domain" in doc:
        dom = doc["domain"]
        try:
            vmin, vmax = int(dom["min"]), int(dom["max"])
        except (TypeError, KeyError, ValueError):
            raise ParseError("domain", "needs integer 'min' and 'max'") from None
    elif table_values:
        vmin, vmax = min(table_values), max(table_values)
    else:
        raise ParseError("domain", "no domain given and no table values to infer it from")
    if vmin > vmax:
        raise ParseError("domain", "empty domain")
    out_of_range = [v for v in table_values if not vmin <= v <= vmax]
    if out_of_range:
        raise ParseError("domain", f"table value {out_of_range[0]} outside [{vmin}, {vmax}]")

    ieps: list[LoadedIEP] = []
    seen_labels: set[str] = set()
    for i, obj in enumerate(doc.get("ieps", ())):
        where = f"ieps[{i}]"
        for key in ("label", "premise", "conclusion"):
            if key not in obj:
                raise ParseError(where, f"missing {key!r}")
        if not obj["premise"]:
            raise ParseError(where, "empty premise")
        ieps.append(
            LoadedIEP(
                label=str(obj["label"]),
                premise=Program(
                    tuple(_parse_statement(s, where, by_name) for s in obj["premise"])
                ),
                conclusion=_parse_statement(obj["conclusion"], where, by_name),
            )
        )
    falsity: list[LoadedFalsity] = []
    for i, obj in enumerate(doc.get("falsity", ())):
        where = f"falsity[{i}]"
        for key in ("label", "program"):
            if key not in obj:
                raise ParseError(where, f"missing {key!r}")
        if not obj["program"]:
            raise ParseError(where, "empty program")
        falsity.append(
            LoadedFalsity(
                label=str(obj["label"]),
                program=Program(
                    tuple(_parse_statement(s, where, by_name) for s in obj["program"])
                ),
            )
        )
    for rec_label in [r.label for r in ieps] + [r.label for r in falsity]:
        if rec_label in seen_labels:
            raise ParseError("ieps/falsity", f"duplicate label {rec_label!r}")
        seen_labels.add(rec_label)
    for rec in ieps:
        if len(rec.premise) > mach.max_premise_len:
            raise ParseError(f"iep {rec.label}", "premise longer than max_premise_len")
        violation = validate_program(rec.premise.extended(rec.conclusion))
        if violation is not None:
            raise ParseError(
                f"iep {rec.label}",
                f"invalid program: output {violation.var!r} not fresh at step {violation.step}",
            )
    for frec in falsity:
        violation = validate_program(frec.program)
        if violation is not None:
            raise ParseError(
                f"falsity {frec.label}",
                f"invalid program: output {violation.var!r} not fresh at step {violation.step}",
            )

    return Application(
        label=label,
        signatures=signatures,
        mach=mach,
        vmin=vmin,
        vmax=vmax,
        ieps=tuple(ieps),
        falsity=tuple(falsity),
    )


def load_application_file(path) -> Application:
    with open(path, "r", encoding="utf-8") as f:
        return load_application(f.read())


class AssignmentStream:
    """Iterable of variable assignments, exhaustive or seeded-random.

    Small spaces (|domain|^|vars| within the exhaustive threshold) enumerate
    every assignment in lexicographic order. Larger spaces draw sample_budget
    assignments from a PRNG seeded by (mach seed, vars, caller tag), with the
    all-vmin and all-vmax corners forced in first.
    """

    def __init__(self, vars: Sequence[str], app: Application, tag: str = ""):
        if not vars:
            raise ValueError("need at least one variable")
        if len(set(vars)) != len(vars):
            raise ValueError("variables must be duplicate-free")
        self.vars = tuple(vars)
        self.app = app
        self.tag = tag
        self.space = app.domain_size ** len(self.vars)
        self.exhaustive = self.space <= app.mach.exhaustive_threshold

    def __len__(self) -> int:
        if self.exhaustive:
            return self.space
        return self.app.mach.sample_budget

    def __iter__(self) -> Iterator[dict[str, int]]:
        app = self.app
        if self.exhaustive:
            for values in _product(app.vmin, app.vmax, len(self.vars)):
                yield dict(zip(self.vars, values))
            return
        budget = app.mach.sample_budget
        corners = [(app.vmin,) * len(self.vars), (app.vmax,) * len(self.vars)]
        for corner in corners[:budget]:
            yield dict(zip(self.vars, corner))
        rng = _stream_rng(app.mach.seed, self.vars, self.tag)
        for _ in range(budget - len(corners[:budget])):
            yield {v: rng.randint(app.vmin, app.vmax) for v in self.vars}


def _product(vmin: int, vmax: int, n: int) -> Iterator[tuple[int, ...]]:
    values = range(vmin, vmax + 1)
    if n == 1:
        for v in values:
            yield (v,)
        return
    for head in values:
        for tail in _product(vmin, vmax, n - 1):
            yield (head,) + tail


def _stream_rng(seed: int, vars: tuple[str, ...], tag: str) -> random.Random:
    # sha256, not hash(): the builtin is randomized per process and would
    # break run-to-run byte determinism.
    key = repr((seed, vars, tag)).encode("utf-8")
    digest = hashlib.sha256(key).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def enumerate_assignments(
    vars: Sequence[str], app: Application, tag: str = ""
) -> AssignmentStream:
    """Assignment stream over `vars`, systematic below the threshold, sampled above."""
    return AssignmentStream(vars, app, tag)
