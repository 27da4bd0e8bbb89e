import itertools

import pytest

from ra.application import enumerate_assignments
from ra.kernel import conc, execute, program, stmt
from ra.knowledge import IEPRecord, Kind, KnowledgeBase
from ra.soundness import check_ep, check_falsity, check_record, recheck_pass


def le(x, y):
    return stmt("le", [x, y])


def lt(x, y):
    return stmt("lt", [x, y])


def add(x, y, z):
    return stmt("add", [x, y], [z])


def ext(label, premise, conclusion):
    return IEPRecord(label=label, premise=premise, conclusion=conclusion, kind=Kind.EXTENSION)


def falsity(label, prog):
    return IEPRecord(label=label, premise=prog, conclusion=None, kind=Kind.FALSITY)


A1 = ext("A1", program(le("a", "b"), le("b", "c")), le("a", "c"))
C1 = ext("C1", program(le("a", "b"), le("b", "c"), le("c", "d")), le("a", "d"))
SYM = ext("SYM", program(le("a", "b")), le("b", "a"))
LTLE = ext("LTLE", program(lt("a", "b")), le("a", "b"))
ADDC = ext("ADDC", program(add("a", "b", "c")), add("b", "a", "d"))
BAD_STRICT = ext("BAD", program(le("a", "b")), lt("a", "b"))
VACUOUS = ext("VAC", program(lt("a", "a"), le("a", "b")), le("b", "b"))


# Independent full-domain oracle with hardcoded ARITH0 semantics: no shared
# code with execute / evaluate_ap / the sampler.


def _oracle_run(prog, env, vmax=9):
    env = dict(env)
    for i, s in enumerate(prog.statements, start=1):
        vals = [env[v] for v in s.inputs]
        if s.ap == "le":
            ok, outs = vals[0] <= vals[1], []
        elif s.ap == "lt":
            ok, outs = vals[0] < vals[1], []
        elif s.ap == "add":
            total = vals[0] + vals[1]
            ok, outs = 0 <= total <= vmax, [total]
        else:
            raise AssertionError(f"oracle has no semantics for {s.ap}")
        if not ok:
            return None, i
        env.update(zip(s.outputs, outs))
    return env, None


def _oracle_pil(prog):
    produced, pil = set(), []
    for s in prog.statements:
        for v in s.inputs:
            if v not in produced and v not in pil:
                pil.append(v)
        produced.update(s.outputs)
    return pil


def oracle_ep_counterexample(rec, vmax=9):
    extended = conc(rec.premise, rec.conclusion)
    pil = _oracle_pil(extended)
    for values in itertools.product(range(vmax + 1), repeat=len(pil)):
        env = dict(zip(pil, values))
        if _oracle_run(rec.premise, env, vmax)[0] is None:
            continue
        full, step = _oracle_run(extended, env, vmax)
        if full is None:
            return env, step
    return None, None


def oracle_falsity_counterexample(rec, vmax=9):
    pil = _oracle_pil(rec.premise)
    for values in itertools.product(range(vmax + 1), repeat=len(pil)):
        env = dict(zip(pil, values))
        if _oracle_run(rec.premise, env, vmax)[0] is not None:
            return env
    return None


# ---------------------------------------------------------------- check_ep


def test_check_ep_transitivity_exhaustive(arith0):
    report = check_ep(A1, arith0)
    assert report.ok and report.tested == 1000 and report.exhaustive


def test_check_ep_symmetry_counterexample(arith0):
    report = check_ep(SYM, arith0)
    assert not report.ok
    assert report.counterexample == {"a": 0, "b": 1}
    assert report.failing_step == 2


def test_check_ep_vacuous_premise(arith0):
    report = check_ep(VACUOUS, arith0)
    assert report.ok and report.exhaustive
    assert oracle_ep_counterexample(VACUOUS)[0] is None


def test_check_ep_rejects_falsity_kind(arith0):
    with pytest.raises(ValueError):
        check_ep(falsity("F", program(lt("a", "a"))), arith0)


@pytest.mark.parametrize("rec", [A1, C1, SYM, LTLE, ADDC, BAD_STRICT, VACUOUS])
def test_check_ep_matches_full_domain_oracle(rec, arith0):
    report = check_ep(rec, arith0)
    oracle_env, oracle_step = oracle_ep_counterexample(rec)
    assert report.ok == (oracle_env is None)
    if not report.ok:
        # exhaustive enumeration shares the lexicographic order, so the
        # reported assignment is the oracle's first violation
        assert dict(report.counterexample) == oracle_env
        assert report.failing_step == oracle_step


def test_check_ep_deterministic(arith0):
    assert check_ep(SYM, arith0) == check_ep(SYM, arith0)


def test_check_ep_counterexample_replays(arith0):
    report = check_ep(SYM, arith0)
    assert execute(SYM.premise, report.counterexample, arith0).computable
    result = execute(conc(SYM.premise, SYM.conclusion), report.counterexample, arith0)
    assert not result.computable and result.step == report.failing_step


# ---------------------------------------------------------------- falsity


def test_check_falsity_never_computable(arith0):
    report = check_falsity(falsity("F1", program(lt("a", "a"))), arith0)
    assert report.ok and report.tested == 10 and report.exhaustive


def test_check_falsity_reflexive_failure(arith0):
    report = check_falsity(falsity("FBAD", program(le("a", "a"))), arith0)
    assert not report.ok and report.counterexample == {"a": 0}


def test_check_falsity_sum_below_operand(arith0):
    # c = a + b is never below a on a non-negative domain, so this falsity
    # claim survives; verified against the exhaustive oracle.
    rec = falsity("FS", program(add("a", "b", "c"), lt("c", "a")))
    assert oracle_falsity_counterexample(rec) is None
    report = check_falsity(rec, arith0)
    assert report.ok and report.exhaustive and report.tested == 100


def test_check_falsity_sum_above_operand(arith0):
    rec = falsity("FA", program(add("a", "b", "c"), lt("a", "c")))
    oracle_env = oracle_falsity_counterexample(rec)
    assert oracle_env == {"a": 0, "b": 1}
    report = check_falsity(rec, arith0)
    assert not report.ok and dict(report.counterexample) == oracle_env


def test_check_falsity_counterexample_replays(arith0):
    rec = falsity("FBAD", program(le("a", "a")))
    report = check_falsity(rec, arith0)
    assert execute(rec.premise, report.counterexample, arith0).computable


# ---------------------------------------------------------------- recheck


def _kb_with(*records):
    kb = KnowledgeBase()
    for rec in records:
        kb.add_conjecture(rec)
    return kb


def test_recheck_all_sound(arith0):
    kb = _kb_with(A1, C1, LTLE)
    reports = recheck_pass(kb.snapshot(), arith0, epoch=1)
    assert len(reports) == 3 and all(r.ok for r in reports)


def test_recheck_flags_exactly_the_unsound_one(arith0):
    kb = _kb_with(A1, SYM, LTLE)
    reports = recheck_pass(kb.snapshot(), arith0, epoch=1)
    bad = [r for r in reports if not r.ok]
    assert [r.label for r in bad] == ["SYM"]


def test_recheck_mixed_kinds(arith0):
    kb = _kb_with(A1, falsity("F1", program(lt("a", "a"))))
    reports = recheck_pass(kb.snapshot(), arith0, epoch=3)
    assert [r.label for r in reports] == ["A1", "F1"]
    assert all(r.ok for r in reports)


def test_recheck_epoch_tag_changes_samples(arith0):
    vars = ["a", "b", "c", "d", "e"]
    epoch1 = list(enumerate_assignments(vars, arith0, tag="epoch1"))
    epoch2 = list(enumerate_assignments(vars, arith0, tag="epoch2"))
    assert epoch1 != epoch2
    assert epoch1 == list(enumerate_assignments(vars, arith0, tag="epoch1"))


def test_recheck_deterministic(arith0):
    kb = _kb_with(A1, C1)
    one = recheck_pass(kb.snapshot(), arith0, epoch=2)
    two = recheck_pass(kb.snapshot(), arith0, epoch=2)
    assert one == two


def test_check_record_dispatch(arith0):
    assert check_record(A1, arith0).ok
    assert check_record(falsity("F1", program(lt("a", "a"))), arith0).ok


def test_report_log_lines(arith0):
    assert check_ep(A1, arith0).log_line() == "SOUND label=A1 tested=1000 exhaustive=1"
    line = check_ep(SYM, arith0).log_line()
    assert line == "UNSOUND label=SYM asg=a=0,b=1 step=2"
