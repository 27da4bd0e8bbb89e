import json
import random

import pytest

from ra.kernel import Program, program, stmt
from ra.knowledge import (
    DuplicateRecord,
    IEPRecord,
    Kind,
    KnowledgeBase,
    Status,
    UnknownLabel,
    dependency_closure,
)
from ra.prover import Proof, ProofStep


def le(x, y):
    return stmt("le", [x, y])


def record(label, premise, conclusion, kind=Kind.EXTENSION):
    return IEPRecord(label=label, premise=premise, conclusion=conclusion, kind=kind)


A1 = record("A1", program(le("a", "b"), le("b", "c")), le("a", "c"))
C1 = record("C1", program(le("a", "b"), le("b", "c"), le("c", "d")), le("a", "d"))


def stub_proof(target, premise, cited=(), final_index=1):
    """A connection-list-bearing proof skeleton (replay is the caller's duty)."""
    steps = tuple(
        ProofStep(used_label=j, matched_positions=(1,), renaming={}, derived=premise[0])
        for j in cited
    )
    return Proof(target=target, initial=premise, steps=steps, final_index=final_index)


def fresh_kb(*records):
    kb = KnowledgeBase()
    for rec in records:
        kb.add_conjecture(rec)
    return kb


# ---------------------------------------------------------------- add


def test_add_first_insert():
    kb = fresh_kb(A1)
    assert kb.partition().ud == ("A1",)
    assert kb.get("A1").status is Status.UNDERIVABLE


def test_add_renamed_duplicate_rejected():
    kb = fresh_kb(A1)
    renamed = record("A1x", program(le("x", "y"), le("y", "z")), le("x", "z"))
    with pytest.raises(DuplicateRecord) as err:
        kb.add_conjecture(renamed)
    assert err.value.existing == "A1"


def test_add_second_record():
    kb = fresh_kb(A1, C1)
    assert kb.partition().ud == ("A1", "C1")


def test_add_forces_underivable_status():
    loaded_as_axiom = IEPRecord(
        label="X",
        premise=program(le("a", "b")),
        conclusion=le("a", "a"),
        status=Status.AXIOM,
        tcl=("bogus",),
    )
    kb = fresh_kb(loaded_as_axiom)
    rec = kb.get("X")
    assert rec.status is Status.UNDERIVABLE and rec.tcl == ()


def test_add_rejects_invalid_records():
    from ra.knowledge import InvalidRecord

    kb = KnowledgeBase()
    with pytest.raises(InvalidRecord, match="empty premise"):
        kb.add_conjecture(record("E", Program(()), le("a", "b")))
    with pytest.raises(InvalidRecord, match="needs a conclusion"):
        kb.add_conjecture(IEPRecord(label="N", premise=program(le("a", "b")), conclusion=None))
    with pytest.raises(InvalidRecord, match="not fresh"):
        kb.add_conjecture(
            record("S", program(le("a", "c")), stmt("add", ["a", "b"], ["c"]))
        )


def test_add_epoch_increments():
    kb = KnowledgeBase()
    before = kb.epoch
    kb.add_conjecture(A1)
    assert kb.epoch == before + 1


# ---------------------------------------------------------------- commit


def test_commit_promotes_cited_underivable():
    kb = fresh_kb(A1, C1)
    kb.commit_proof("C1", stub_proof("C1", C1.premise, cited=("A1",)))
    assert kb.get("C1").status is Status.THEOREM
    assert kb.get("C1").tcl == ("A1",)
    assert kb.get("A1").status is Status.AXIOM
    assert kb.get("A1").tcl == ()


def test_commit_relabels_axiom_as_theorem():
    kb = fresh_kb(A1, C1)
    kb.commit_proof("C1", stub_proof("C1", C1.premise, cited=("A1",)))
    events = kb.commit_proof("A1", stub_proof("A1", A1.premise, cited=("C1",)))
    assert kb.get("A1").status is Status.THEOREM
    assert ("A1", Status.AXIOM, Status.THEOREM) in events


def test_commit_with_empty_tcl():
    kb = fresh_kb(A1)
    events = kb.commit_proof("A1", stub_proof("A1", A1.premise))
    assert kb.get("A1").status is Status.THEOREM and kb.get("A1").tcl == ()
    assert events == [("A1", Status.UNDERIVABLE, Status.THEOREM)]


def test_commit_unknown_label():
    kb = fresh_kb(A1)
    with pytest.raises(UnknownLabel):
        kb.commit_proof("nope", stub_proof("nope", A1.premise))


# ---------------------------------------------------------------- retract


def test_retract_demotes_dependent_theorem():
    kb = fresh_kb(A1, C1)
    kb.commit_proof("C1", stub_proof("C1", C1.premise, cited=("A1",)))
    touched = kb.retract_unsound("A1")
    assert touched == ["A1", "C1"]
    assert "A1" not in kb
    rec = kb.get("C1")
    assert rec.status is Status.UNDERIVABLE and rec.tcl == () and rec.proof is None


def test_retract_leaf_only():
    kb = fresh_kb(A1, C1)
    assert kb.retract_unsound("C1") == ["C1"]
    assert kb.partition().ud == ("A1",)


def test_retract_cascades_through_chain():
    b = record("B", program(le("a", "b")), le("a", "a"))
    t1 = record("T1", program(le("a", "b"), le("b", "c")), le("a", "c"))
    t2 = record("T2", program(le("a", "b"), le("b", "c"), le("c", "d")), le("a", "d"))
    kb = fresh_kb(b, t1, t2)
    kb.commit_proof("T1", stub_proof("T1", t1.premise, cited=("B",)))
    kb.commit_proof("T2", stub_proof("T2", t2.premise, cited=("T1",)))
    touched = kb.retract_unsound("B")
    assert set(touched) == {"B", "T1", "T2"}
    assert "B" not in kb
    for label in ("T1", "T2"):
        rec = kb.get(label)
        assert rec.status is Status.UNDERIVABLE and rec.tcl == () and rec.proof is None


def test_retract_unknown_label():
    kb = fresh_kb(A1)
    with pytest.raises(UnknownLabel):
        kb.retract_unsound("nope")


# ---------------------------------------------------------------- closure


def test_closure_empty_seed():
    kb = fresh_kb(A1)
    assert kb.closure("A1") == []


def test_closure_chain():
    tcl = {"3": ["2"], "2": ["1"], "1": []}
    assert dependency_closure(tcl, "3") == ["2", "1"]


def test_closure_cycle_retained():
    tcl = {"5": ["6"], "6": ["5"]}
    assert dependency_closure(tcl, "5") == ["6", "5"]


def test_closure_first_occurrence_order():
    tcl = {"r": ["a", "b"], "a": ["c"], "b": ["c", "d"], "c": [], "d": []}
    assert dependency_closure(tcl, "r") == ["a", "b", "c", "d"]


def _dfs_reachable(edges, start):
    seen, stack = set(), [start]
    while stack:
        node = stack.pop()
        for nxt in edges.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def test_closure_matches_reachability_oracle():
    rng = random.Random(20240521)
    for _ in range(100):
        n = rng.randint(2, 20)
        nodes = [f"n{i}" for i in range(n)]
        tcl = {
            a: [b for b in nodes if b != a and rng.random() < 0.2] for a in nodes
        }
        for k in nodes:
            assert set(dependency_closure(tcl, k)) == _dfs_reachable(tcl, k)
            independent = k not in dependency_closure(tcl, k)
            assert independent == (k not in _dfs_reachable(tcl, k))


def test_is_independent_examples():
    tcl_chain = {"3": ["2"], "2": ["1"], "1": []}
    assert "3" not in dependency_closure(tcl_chain, "3")
    tcl_cycle = {"5": ["6"], "6": ["5"]}
    assert "5" in dependency_closure(tcl_cycle, "5")
    kb = fresh_kb(A1)
    assert kb.is_independent("A1")


# ---------------------------------------------------------------- metrics


def test_metrics_empty():
    m = KnowledgeBase().metrics()
    assert (m.n_ax, m.n_th, m.n_ud, m.complete) == (0, 0, 0, True)


def test_metrics_counts():
    kb = fresh_kb(A1, C1)
    kb.commit_proof("C1", stub_proof("C1", C1.premise, cited=("A1",)))
    m = kb.metrics()
    assert (m.n_ax, m.n_th, m.n_ud, m.complete) == (1, 1, 0, True)


def test_metrics_incomplete():
    m = fresh_kb(A1).metrics()
    assert m.n_ud == 1 and not m.complete


# ---------------------------------------------------------------- snapshot


def test_snapshot_isolated_from_mutation():
    kb = fresh_kb(A1)
    snap = kb.snapshot()
    kb.add_conjecture(C1)
    assert snap.labels() == ("A1",)
    assert kb.labels() == ("A1", "C1")


def test_snapshots_equal_without_mutation():
    kb = fresh_kb(A1)
    assert kb.snapshot() == kb.snapshot()


def test_snapshot_epoch_matches_capture():
    kb = fresh_kb(A1)
    assert kb.snapshot().epoch == kb.epoch


def test_restore_rewinds_state():
    kb = fresh_kb(A1, C1)
    snap = kb.snapshot()
    kb.commit_proof("C1", stub_proof("C1", C1.premise, cited=("A1",)))
    kb.restore(snap)
    assert kb.get("C1").status is Status.UNDERIVABLE
    assert kb.get("A1").status is Status.UNDERIVABLE
    assert kb.epoch == snap.epoch


# ---------------------------------------------------------------- lifecycle


def test_status_transitions_confined():
    allowed = {
        (Status.UNDERIVABLE, Status.THEOREM),
        (Status.UNDERIVABLE, Status.AXIOM),
        (Status.AXIOM, Status.THEOREM),
        (Status.THEOREM, Status.AXIOM),
        (Status.THEOREM, Status.UNDERIVABLE),
    }
    kb = fresh_kb(A1, C1)
    seen: list[tuple[Status, Status]] = []

    def observe():
        nonlocal previous
        current = {label: kb.get(label).status for label in kb.labels()}
        for label, status in current.items():
            if label in previous and previous[label] is not status:
                seen.append((previous[label], status))
        previous = current

    previous = {label: kb.get(label).status for label in kb.labels()}
    kb.commit_proof("C1", stub_proof("C1", C1.premise, cited=("A1",)))
    observe()
    kb.commit_proof("A1", stub_proof("A1", A1.premise, cited=("C1",)))
    observe()
    kb.retract_unsound("A1")
    observe()
    assert seen and all(t in allowed for t in seen)


def test_soundness_run_notes():
    kb = fresh_kb(A1)
    kb.note_soundness_runs(["A1", "missing"])
    assert kb.get("A1").soundness_runs == 1


def test_generated_labels_monotonic():
    kb = KnowledgeBase()
    assert [kb.next_generated_label() for _ in range(3)] == ["G0001", "G0002", "G0003"]


def test_falsity_record_round_trip():
    falsity = IEPRecord(
        label="F1", premise=program(stmt("lt", ["a", "a"])), conclusion=None, kind=Kind.FALSITY
    )
    kb = fresh_kb(falsity)
    assert kb.get("F1").kind is Kind.FALSITY
    dup = IEPRecord(
        label="F2", premise=program(stmt("lt", ["x", "x"])), conclusion=None, kind=Kind.FALSITY
    )
    with pytest.raises(DuplicateRecord):
        kb.add_conjecture(dup)


def test_extension_and_falsity_not_structural_duplicates():
    ext = record("E", program(stmt("lt", ["a", "b"])), le("a", "b"))
    # falsity over the same premise shape must coexist with the extension
    fal = IEPRecord(
        label="F", premise=program(stmt("lt", ["a", "b"]), le("a", "b")),
        conclusion=None, kind=Kind.FALSITY,
    )
    kb = fresh_kb(ext)
    kb.add_conjecture(fal)
    assert set(kb.labels()) == {"E", "F"}


def test_persistence_round_trip():
    kb = fresh_kb(A1, C1)
    kb.commit_proof("C1", stub_proof("C1", C1.premise, cited=("A1",)))
    obj = kb.to_json_obj()
    text = json.dumps(obj)
    loaded = KnowledgeBase.from_json_obj(json.loads(text))
    assert loaded.labels() == kb.labels()
    assert loaded.epoch == kb.epoch
    for label in kb.labels():
        a, b = kb.get(label), loaded.get(label)
        assert (a.status, a.kind, a.tcl, a.premise, a.conclusion) == (
            b.status, b.kind, b.tcl, b.premise, b.conclusion,
        )
    assert loaded.get("C1").proof is not None
    assert loaded.get("C1").proof.to_json_obj() == kb.get("C1").proof.to_json_obj()
