import random

from hypothesis import given

from twophase.core import OOM, UB, EMPTY_CONF, Ok, Ptr, UNBOUNDED, accessible, bits, make_conf
from twophase.memexec import (
    ExecState,
    alloca_run,
    as_spec,
    free_run,
    malloc_run,
    max_plus_one,
    popf_run,
    pushf_run,
    read_byte_run,
    run_op,
    write_byte_run,
)
from twophase.memspec import Alloca, Malloc

from gen import conf_and_op, confs, rand_sbyte
from oracles import max_plus_one_oracle

SB = rand_sbyte(random.Random(0))
SB2 = rand_sbyte(random.Random(1))


def framed(dom=UNBOUNDED):
    return ExecState(make_conf(stack=[set()]), 0, dom)


def test_alloca_then_read_write():
    r = alloca_run(framed(), [SB, SB])
    assert r.value == Ptr(0, 0)
    st = r.conf
    assert st.next_prov == 1
    assert read_byte_run(st, Ptr(1, 0)).value == SB
    assert read_byte_run(st, Ptr(1, None)).value == SB
    assert isinstance(read_byte_run(st, Ptr(1, 5)), UB)
    w = write_byte_run(st, Ptr(1, None), SB2)
    assert w.conf.conf.mem[1] == (SB2, 0)


def test_next_block_goes_after_the_highest_cell():
    st = alloca_run(framed(), [SB]).conf
    st = malloc_run(st, [SB, SB]).conf
    assert max_plus_one(st.conf, 1, UNBOUNDED) == 3
    assert malloc_run(st, [SB]).value == Ptr(3, 2)


def test_allocation_oom_at_domain_edge():
    st = framed(bits(2))
    st = alloca_run(st, [SB, SB, SB]).conf
    assert isinstance(alloca_run(st, [SB, SB]), OOM)
    assert alloca_run(st, [SB]).value == Ptr(3, 1)
    assert isinstance(alloca_run(alloca_run(st, [SB]).conf, [SB]), OOM)


def test_alloca_needs_a_frame():
    assert isinstance(alloca_run(ExecState(), [SB]), UB)


def test_free_and_pop():
    st = malloc_run(framed(), [SB, SB]).conf
    assert isinstance(free_run(st, Ptr(1, 0)), UB)
    freed = free_run(st, Ptr(0, 0)).conf
    assert freed.conf.mem == {} and freed.conf.heap == {}
    assert isinstance(free_run(freed, Ptr(0, 0)), UB)
    st = alloca_run(pushf_run(framed()).conf, [SB]).conf
    popped = popf_run(st).conf
    assert popped.conf.mem == {} and len(popped.conf.stack) == 1
    assert isinstance(popf_run(ExecState()), UB)


@given(confs())
def test_max_plus_one_matches_oracle(c):
    a = max_plus_one(c, 1, UNBOUNDED)
    assert a == max_plus_one_oracle(c)


@given(conf_and_op())
def test_deterministic(co):
    c, op = co
    st = ExecState.from_conf(c, bits(4))
    assert run_op(st, op) == run_op(st, op)


@given(conf_and_op())
def test_allocation_never_overlaps_and_grows_used(co):
    c, op = co
    if not isinstance(op, (Alloca, Malloc)):
        return
    st = ExecState.from_conf(c, bits(4))
    r = run_op(st, op)
    if not isinstance(r, Ok):
        return
    new = r.conf.conf
    cells = {r.value.a + i for i in range(len(op.bytes))}
    assert not cells & set(c.mem)
    assert r.value.pr not in c.used and r.value.pr in new.used
    assert c.used < new.used
    assert r.conf.next_prov > r.value.pr
    for i in range(len(op.bytes)):
        assert accessible(new.mem, Ptr(r.value.a + i, r.value.pr))


def test_as_spec_strips_state():
    r = pushf_run(ExecState())
    assert as_spec(r) == Ok(make_conf(stack=[set()]), None)
    assert as_spec(OOM()) == OOM()
    assert EMPTY_CONF.stack == ()
