from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from twophase.core import EnumerationError, Ptr
from twophase.harness import gen_program
from twophase.interp import (
    Execution,
    FailStop,
    FuelExhausted,
    OOMStop,
    Print,
    Returned,
    RunConfig,
    UBStop,
    enumerate_behaviors,
    run,
    sorted_executions,
)
from twophase.ir import parse
from twophase.values import DAddr, DInt, DIPtr, EnumBounds, Mode

from oracles import entangled_mixed_values, entangled_store_values

ROOT = Path(__file__).resolve().parent.parent / "programs"
ENUM = RunConfig(undef_policy="enumerate")


def load(name):
    return parse((ROOT / f"{name}.ll").read_text())


def src(body, ret="void"):
    return parse(f"define {ret} @main() {{\nentry:\n{body}\n}}\n")


def printed(ex):
    return [e.value for e in ex.trace]


@pytest.mark.parametrize("order", ["little", "big"])
def test_entangled_stores_give_oracle_set(order):
    exs = enumerate_behaviors(load("entangled_stores"), RunConfig(mode=Mode.inf(order), undef_policy="enumerate"))
    got = {printed(ex)[0].v for ex in exs}
    assert got == entangled_store_values(order)
    assert not got & entangled_mixed_values(order)
    assert all(ex.outcome == Returned() for ex in exs)


def test_default_run_reads_undef_as_zero():
    assert printed(run(load("entangled_stores"))) == [DInt(32, 0)]


def test_undef_branch_has_two_behaviors():
    exs = sorted_executions(enumerate_behaviors(load("undef_branch"), ENUM))
    assert [printed(e) for e in exs] == [[DInt(32, 1)], [DInt(32, 2)]]


def test_store_load_forwarding():
    p = src("  %p = alloca i64\n  store i64 77, ptr %p\n  %v = load i64, ptr %p\n  ret i64 %v", "i64")
    assert run(p).outcome == Returned(DInt(64, 77))


def test_frames_are_reclaimed_across_calls():
    ex = run(load("call_frames"))
    assert printed(ex) == [DIPtr(1), DIPtr(1)]
    # main's own frame goes too
    assert len(ex.conf.mem) == 0 and ex.conf.stack == ()


def test_allocation_provenance_is_exact():
    p = src("  %a = alloca i8\n  %b = alloca i8\n  call void @print_ptr(ptr %b)\n  ret void")
    assert printed(run(p)) == [DAddr(Ptr(1, 1))]


def test_error_stops():
    assert isinstance(run(load("use_after_free")).outcome, UBStop)
    assert isinstance(run(load("exhausted"), RunConfig(mode=Mode.fin(2))).outcome, OOMStop)
    assert isinstance(run(load("spin"), RunConfig(fuel=500)).outcome, FuelExhausted)
    assert isinstance(run(parse("define void @main(i32 %a) {\n  ret void\n}\n")).outcome, FailStop)


def test_unvalidated_program_fails_cleanly():
    ex = run(src("  %x = add i32 %nope, 1\n  ret void"))
    assert isinstance(ex.outcome, FailStop) and "never defined" in ex.outcome.msg


def test_counting_loop_runs_out_in_small_domain():
    inf = run(load("iptr_loop"), RunConfig(fuel=10**5))
    fin = run(load("iptr_loop"), RunConfig(mode=Mode.fin(4), fuel=10**5))
    assert isinstance(fin.outcome, OOMStop)
    assert printed(fin) == [DIPtr(i) for i in range(16)]
    assert inf.trace[: len(fin.trace)] == fin.trace


def test_path_budget():
    p = src("\n".join(f"  br i1 undef, label %b{i}, label %b{i}\nb{i}:" for i in range(14)) + "\n  ret void")
    with pytest.raises(EnumerationError):
        enumerate_behaviors(p, ENUM, EnumBounds(max_paths=100))


def test_policy_names_are_checked():
    with pytest.raises(ValueError):
        RunConfig(undef_policy="sometimes")
    with pytest.raises(ValueError):
        run(load("ret"), ENUM)


def test_random_policy_is_seed_deterministic():
    p = load("undef_branch")
    r = {s: run(p, RunConfig(undef_policy="random", seed=s)) for s in range(20)}
    assert all(run(p, RunConfig(undef_policy="random", seed=s)) == r[s] for s in r)
    assert {printed(e)[0].v for e in r.values()} == {1, 2}
    every = enumerate_behaviors(p, ENUM)
    assert all(e in every for e in r.values())


CORPUS = sorted(p.stem for p in ROOT.glob("*.ll"))


@pytest.mark.parametrize("name", CORPUS)
def test_default_run_is_enumerated(name):
    p = load(name)
    cfg = RunConfig(fuel=10**4)
    assert run(p, cfg) in enumerate_behaviors(p, RunConfig(fuel=10**4, undef_policy="enumerate"))


@settings(max_examples=40)
@given(st.integers(0, 2**64 - 1), st.integers(1, 12))
def test_generated_default_run_is_enumerated(seed, size):
    p = gen_program(seed, size)
    try:
        every = enumerate_behaviors(p, RunConfig(fuel=10**4, undef_policy="enumerate"))
    except EnumerationError:
        return
    assert run(p, RunConfig(fuel=10**4)) in every


@settings(max_examples=40)
@given(st.integers(0, 2**64 - 1), st.integers(1, 12), st.integers(1, 200))
def test_fuel_is_monotone(seed, size, fuel):
    p = gen_program(seed, size)
    small = run(p, RunConfig(fuel=fuel))
    big = run(p, RunConfig(fuel=fuel * 10 + 10**4))
    if isinstance(small.outcome, FuelExhausted):
        assert big.trace[: len(small.trace)] == small.trace
    else:
        assert small == big


def test_execution_equality_ignores_memory_and_messages():
    a = Execution((Print(DInt(8, 1)),), UBStop("one"), conf="x")
    b = Execution((Print(DInt(8, 1)),), UBStop("two"), conf="y")
    assert a == b and hash(a) == hash(b)
    assert a.lines() == ["print i8 1", "UB: one"]
