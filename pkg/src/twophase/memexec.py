"""Deterministic executable memory model.

One function per primitive, each ``ExecState -> Outcome`` where ``Ok`` carries
the new state. Allocation places blocks just past the largest mapped address
and draws provenances from a counter.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from . import memspec
from .core import (
    OOM,
    UB,
    UNBOUNDED,
    AddressDomain,
    Conf,
    EMPTY_CONF,
    Ok,
    Outcome,
    Ptr,
    accessible,
    addr_add,
    lookup,
)


@dataclass(frozen=True)
class ExecState:
    conf: Conf = EMPTY_CONF
    next_prov: int = 0
    dom: AddressDomain = UNBOUNDED

    @classmethod
    def from_conf(cls, conf: Conf, dom: AddressDomain = UNBOUNDED) -> "ExecState":
        provs = [u for u in conf.used if u is not None]
        return cls(conf, max(provs) + 1 if provs else 0, dom)

    def with_conf(self, conf: Conf) -> "ExecState":
        return replace(self, conf=conf)


# An allocator maps (conf, size, domain) to a start address or OOM.
Allocator = Callable[[Conf, int, AddressDomain], "int | OOM"]


def max_plus_one(conf: Conf, n: int, dom: AddressDomain) -> int | OOM:
    if not conf.mem:
        a = 0
    else:
        a = addr_add(dom, max(conf.mem), 1)
        if isinstance(a, OOM):
            return OOM("address space exhausted")
    if not dom.contains(a):
        return OOM("address space exhausted")
    if n and isinstance(addr_add(dom, a, n - 1), OOM):
        return OOM(f"no room for {n} bytes at {a} in {dom}")
    return a


def read_byte_run(st: ExecState, p: Ptr) -> Outcome:
    b = lookup(st.conf.mem, p)
    if b is None:
        return UB(f"read of unallocated or provenance-mismatched pointer {p}")
    return Ok(st, b)


def write_byte_run(st: ExecState, p: Ptr, b) -> Outcome:
    mem = st.conf.mem
    if not accessible(mem, p):
        return UB(f"write to unallocated or provenance-mismatched pointer {p}")
    # keep the stored provenance: it already matches p
    stored = mem[p.a][1]
    return Ok(st.with_conf(st.conf.replace(mem=mem.set(p.a, (b, stored)))), None)


def _alloc(st: ExecState, op, allocator: Allocator) -> Outcome:
    a = allocator(st.conf, len(op.bytes), st.dom)
    if isinstance(a, OOM):
        return a
    placed = memspec.place(st.dom, op, st.conf, a, st.next_prov)
    if placed is None:
        raise AssertionError(f"allocator returned an occupied range at {a}")
    return Ok(ExecState(placed.conf, st.next_prov + 1, st.dom), placed.value)


def alloca_run(st: ExecState, bs, allocator: Allocator = max_plus_one) -> Outcome:
    if not st.conf.stack:
        return UB("alloca with no active frame")
    return _alloc(st, memspec.Alloca(tuple(bs)), allocator)


def malloc_run(st: ExecState, bs, allocator: Allocator = max_plus_one) -> Outcome:
    return _alloc(st, memspec.Malloc(tuple(bs)), allocator)


def free_run(st: ExecState, p: Ptr) -> Outcome:
    conf = st.conf
    blk = conf.heap.get(p.a)
    if blk is None:
        return UB(f"free of non-root address {p.a}")
    if not all(accessible(conf.mem, q) for q in blk):
        return UB(f"free of partially unmapped block at {p.a}")
    conf = conf.replace(mem=conf.mem.remove(*(q.a for q in blk)), heap=conf.heap.remove(p.a))
    return Ok(st.with_conf(conf), None)


def pushf_run(st: ExecState) -> Outcome:
    return Ok(st.with_conf(st.conf.replace(stack=(frozenset(),) + st.conf.stack)), None)


def popf_run(st: ExecState) -> Outcome:
    conf = st.conf
    if not conf.stack:
        return UB("pop of empty frame stack")
    top = conf.stack[0]
    if not all(accessible(conf.mem, q) for q in top):
        return UB("pop of frame with unmapped pointer")
    conf = conf.replace(mem=conf.mem.remove(*(q.a for q in top)), stack=conf.stack[1:])
    return Ok(st.with_conf(conf), None)


def run_op(st: ExecState, op) -> Outcome:
    """Dispatch a ``memspec`` operation to its executable counterpart."""
    if isinstance(op, memspec.ReadByte):
        return read_byte_run(st, op.p)
    if isinstance(op, memspec.WriteByte):
        return write_byte_run(st, op.p, op.b)
    if isinstance(op, memspec.Alloca):
        return alloca_run(st, op.bytes)
    if isinstance(op, memspec.Malloc):
        return malloc_run(st, op.bytes)
    if isinstance(op, memspec.Free):
        return free_run(st, op.p)
    if isinstance(op, memspec.PushFrame):
        return pushf_run(st)
    if isinstance(op, memspec.PopFrame):
        return popf_run(st)
    raise TypeError(f"not a memory operation: {op!r}")


def as_spec(out: Outcome) -> Outcome:
    """Strip the executable state down to its configuration."""
    if isinstance(out, Ok) and isinstance(out.conf, ExecState):
        return Ok(out.conf.conf, out.value)
    return out
