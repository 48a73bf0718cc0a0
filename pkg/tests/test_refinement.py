import random
from pathlib import Path

from hypothesis import given, strategies as st

from twophase.core import make_conf
from twophase.interp import Execution, FailStop, FuelExhausted, OOMStop, Print, Returned, UBStop
from twophase.ir import parse
from twophase.refinement import check_exec_sound, check_inf_fin, has_ub, lift_conf, set_refines, trace_refines
from twophase.values import DIPtr, DInt

from gen import rand_conf, rand_sbyte
from mutations import wrapping_iptr_result

ROOT = Path(__file__).resolve().parent.parent / "programs"


def ex(vals, outcome=Returned()):
    return Execution(tuple(Print(DInt(8, v)) for v in vals), outcome)


def test_trace_refines_examples():
    assert trace_refines(ex([]), ex([]))
    assert trace_refines(ex([1, 2, 3]), ex([1, 2], OOMStop()))
    assert not trace_refines(ex([1]), ex([2]))
    assert not trace_refines(ex([1, 2]), ex([1, 2, 3], OOMStop()))
    assert trace_refines(ex([1], FuelExhausted()), ex([1], FuelExhausted()))
    assert not trace_refines(ex([1], FuelExhausted()), ex([1]))
    assert trace_refines(ex([], UBStop("a")), ex([], UBStop("b")))
    assert not trace_refines(ex([], UBStop()), ex([], FailStop()))
    assert not trace_refines(ex([1, 2]), ex([1], OOMStop()), allow_oom=False)
    assert trace_refines(ex([1], OOMStop()), ex([1], OOMStop()), allow_oom=False)


def test_returned_values_compare():
    assert not trace_refines(ex([], Returned(DIPtr(1))), ex([], Returned(DIPtr(2))))


def test_set_refines_examples():
    assert set_refines({ex([], UBStop())}, {ex([9]), ex([7], FailStop())}).verdict
    assert set_refines({ex([1]), ex([2])}, {ex([2])}).verdict
    rep = set_refines({ex([1])}, {ex([2])})
    assert not rep.verdict and rep.witnesses == [ex([2])]
    assert rep.lines()[0] == "verdict=fail"
    assert rep.lines()[-1] == "witness=print i8 2 | ret void"
    assert has_ub(ex([], UBStop())) and not has_ub(ex([]))


execs = st.builds(
    lambda vals, k: ex(vals, [Returned(), UBStop(), OOMStop(), FailStop(), FuelExhausted()][k]),
    st.lists(st.integers(0, 2), max_size=4),
    st.integers(0, 4),
)


@given(execs)
def test_reflexive(e):
    assert trace_refines(e, e, lift=False)


@given(execs, execs, execs)
def test_transitive(a, b, c):
    if trace_refines(a, b) and trace_refines(b, c):
        assert trace_refines(a, c)


@given(st.sets(execs, max_size=4), st.sets(execs, max_size=4))
def test_exact_refinement_implies_oom_permissive(P, Q):
    if set_refines(P, Q, allow_oom=False).verdict:
        assert set_refines(P, Q, allow_oom=True).verdict


@given(st.sets(execs, min_size=1, max_size=4))
def test_subset_refines(P):
    Q = set(list(P)[: len(P) // 2 + 1])
    assert set_refines(P, Q).verdict


def test_lift_conf_examples():
    r = random.Random(0)
    b = rand_sbyte(r)
    assert lift_conf(make_conf()) == make_conf()
    c = make_conf(mem={5: (b, 2)}, used={0, 3})
    assert lift_conf(c) == c and lift_conf(c).used == frozenset({0, 3})
    for seed in range(50):
        c = rand_conf(random.Random(seed))
        assert lift_conf(c) == c


def load(name):
    return parse((ROOT / f"{name}.ll").read_text())


def test_small_programs_pass_both_checks():
    for name in ("ret", "entangled_stores", "undef_branch", "iptr_loop"):
        assert check_inf_fin(load(name)).verdict
        assert check_exec_sound(load(name)).verdict


def test_inf_fin_check_detects_wrapping_iptr(monkeypatch):
    monkeypatch.setattr("twophase.values.iptr_result", wrapping_iptr_result)
    rep = check_inf_fin(load("iptr_loop"))
    assert not rep.verdict
    assert any("print i32 666" in w.lines() for w in rep.witnesses)


def test_everything_oom_fin_side_passes():
    p = load("exhausted")
    assert check_inf_fin(p, addr_bits=2).verdict
