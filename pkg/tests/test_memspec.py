import random

import pytest
from hypothesis import given

from twophase.core import OOM, UB, EMPTY_CONF, EnumerationError, Fail, Ok, Ptr, UNBOUNDED, accessible, bits, make_conf
from twophase.memspec import (
    Alloca,
    Free,
    Malloc,
    PopFrame,
    PushFrame,
    ReadByte,
    WriteByte,
    canonical_provs,
    fresh_prov,
    spec_allows,
    spec_enumerate,
)

from gen import conf_and_op, rand_sbyte
from oracles import brute_force_placements

SB = rand_sbyte(random.Random(0))
SB2 = rand_sbyte(random.Random(1))


def full(n):
    return make_conf(mem={a: (SB, 0) for a in range(1 << n)}, stack=[set()], used={0})


def test_read_unmapped_is_ub():
    assert spec_allows(bits(3), ReadByte(Ptr(1, 0)), EMPTY_CONF, UB())


def test_oom_always_allowed_fail_never():
    c = make_conf(mem={0: (SB, 0)}, used={0})
    assert spec_allows(UNBOUNDED, WriteByte(Ptr(0, 0), SB2), c, OOM())
    assert not spec_allows(UNBOUNDED, WriteByte(Ptr(0, 0), SB2), c, Fail())


def test_alloca_in_full_domain_has_no_ok():
    c = full(2)
    cand = make_conf(mem={**{a: (SB, 0) for a in range(4)}}, stack=[{Ptr(0, 1)}], used={0, 1})
    assert not spec_allows(bits(2), Alloca((SB,)), c, Ok(cand, Ptr(0, 1)))
    assert spec_enumerate(bits(2), Alloca((SB,)), c) == {OOM()}


def test_enumerate_push():
    c = make_conf(stack=[set()])
    assert spec_enumerate(bits(2), PushFrame(), c) == {OOM(), Ok(c.replace(stack=(frozenset(),) + c.stack), None)}


def test_enumerate_alloca_placements_match_brute_force():
    c = make_conf(mem={0: (SB, 0)}, stack=[set()], used={0})
    out = spec_enumerate(bits(2), Alloca((SB2,)), c)
    starts = {o.value.a for o in out if isinstance(o, Ok)}
    assert starts == brute_force_placements(4, Alloca((SB2,)), c, 1) == {1, 2, 3}
    assert OOM() in out and len(out) == 4
    assert all(o.value.pr == fresh_prov(c) == 1 for o in out if isinstance(o, Ok))


def test_enumerate_read():
    c = make_conf(mem={0: (SB, 0)}, used={0})
    assert spec_enumerate(bits(1), ReadByte(Ptr(0, 0)), c) == {OOM(), Ok(c, SB)}


def test_empty_alloc_may_return_any_address():
    c = make_conf(mem={0: (SB, 0)}, stack=[set()], used={0})
    out = spec_enumerate(bits(2), Malloc(()), c)
    assert {o.value.a for o in out if isinstance(o, Ok)} == {0, 1, 2, 3}
    for o in out:
        if isinstance(o, Ok):
            assert o.conf.mem == c.mem and o.conf.heap == c.heap


def test_alloca_without_frame_is_ub():
    assert spec_enumerate(bits(2), Alloca((SB,)), EMPTY_CONF) == {OOM(), UB()}


def test_pop_empty_stack_is_ub():
    assert spec_allows(bits(2), PopFrame(), EMPTY_CONF, UB())
    assert spec_enumerate(bits(2), PopFrame(), EMPTY_CONF) == {OOM(), UB()}


def test_free_rules():
    blk = (Ptr(1, 0), Ptr(2, 0))
    c = make_conf(mem={1: (SB, 0), 2: (SB, 0)}, heap={1: blk}, used={0})
    out = spec_enumerate(bits(2), Free(Ptr(1, 0)), c)
    (ok,) = [o for o in out if isinstance(o, Ok)]
    assert ok.conf.mem == {} and ok.conf.heap == {}
    assert spec_allows(bits(2), Free(Ptr(2, 0)), c, UB())
    assert not spec_allows(bits(2), Free(Ptr(1, 0)), c, UB())


def test_enumeration_cap():
    with pytest.raises(EnumerationError):
        spec_enumerate(UNBOUNDED, Alloca((SB,)), make_conf(stack=[set()]))
    with pytest.raises(EnumerationError):
        spec_enumerate(bits(5), Malloc((SB,)), EMPTY_CONF)
    with pytest.raises(EnumerationError):
        spec_enumerate(bits(4), Malloc((SB,) * 9), EMPTY_CONF)


@given(conf_and_op(bits=3))
def test_enumeration_sound_and_ub_consistent(co):
    c, op = co
    dom = bits(3)
    try:
        out = spec_enumerate(dom, op, c)
    except EnumerationError:
        return
    for beh in out:
        assert spec_allows(dom, op, c, beh)
    assert (UB() in out) == spec_allows(dom, op, c, UB())


@given(conf_and_op(bits=2))
def test_enumeration_complete_for_allocation(co):
    """Every derivable Ok allocation with the canonical provenance is listed."""
    c, op = co
    if not isinstance(op, (Alloca, Malloc)) or (isinstance(op, Alloca) and not c.stack):
        return
    out = spec_enumerate(bits(2), op, c)
    pr = fresh_prov(c)
    for a in brute_force_placements(4, op, c, pr):
        ptrs = [Ptr(a + i, pr) for i in range(len(op.bytes))]
        mem = c.mem.update((p.a, (b, pr)) for p, b in zip(ptrs, op.bytes))
        if isinstance(op, Alloca):
            s2 = c.replace(mem=mem, stack=(c.stack[0] | frozenset(ptrs),) + c.stack[1:], used=c.used | {pr})
        else:
            heap = c.heap.set(a, tuple(ptrs)) if ptrs else c.heap
            s2 = c.replace(mem=mem, heap=heap, used=c.used | {pr})
        beh = Ok(s2, Ptr(a, pr))
        assert spec_allows(bits(2), op, c, beh)
        assert beh in out


@given(conf_and_op(bits=3))
def test_write_enumeration_complete_over_canonical_provenances(co):
    c, op = co
    if not isinstance(op, WriteByte) or not accessible(c.mem, op.p):
        return
    out = spec_enumerate(bits(3), op, c)
    for pr in canonical_provs(c, op):
        beh = Ok(c.replace(mem=c.mem.set(op.p.a, (op.b, pr))), None)
        assert spec_allows(bits(3), op, c, beh) == (beh in out)


@given(conf_and_op(bits=3))
def test_free_then_read_is_ub(co):
    c, op = co
    if not isinstance(op, Free):
        return
    for beh in spec_enumerate(bits(3), op, c):
        if isinstance(beh, Ok):
            for p in c.heap[op.p.a]:
                assert not accessible(beh.conf.mem, p)


def test_frame_discipline():
    c = make_conf(mem={0: (SB, 0)}, stack=[set()], used={0})
    dom = bits(2)
    for pushed in spec_enumerate(dom, PushFrame(), c):
        if not isinstance(pushed, Ok):
            continue
        for alloc in spec_enumerate(dom, Alloca((SB2, SB2)), pushed.conf):
            if not isinstance(alloc, Ok):
                continue
            for popped in spec_enumerate(dom, PopFrame(), alloc.conf):
                if isinstance(popped, Ok):
                    assert popped.conf.mem == c.mem
                    assert popped.conf.stack == c.stack
