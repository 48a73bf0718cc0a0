"""The nondeterministic memory model as a checker and an enumerator.

``spec_allows`` decides whether a behavior is derivable from the inference
rules for one primitive. ``spec_enumerate`` lists every such behavior on a
small bounded address domain, with fresh provenances canonicalised to the
least unused natural.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .core import (
    OOM,
    UB,
    AddressDomain,
    Conf,
    EnumerationError,
    Fail,
    Ok,
    Outcome,
    Ptr,
    accessible,
    addr_add,
    mem_eq_except,
    reads,
)


# -- operations ---------------------------------------------------------------


@dataclass(frozen=True)
class ReadByte:
    p: Ptr


@dataclass(frozen=True)
class WriteByte:
    p: Ptr
    b: Any


@dataclass(frozen=True)
class Alloca:
    bytes: tuple


@dataclass(frozen=True)
class Malloc:
    bytes: tuple


@dataclass(frozen=True)
class Free:
    p: Ptr


@dataclass(frozen=True)
class PushFrame:
    pass


@dataclass(frozen=True)
class PopFrame:
    pass


MemOp = ReadByte | WriteByte | Alloca | Malloc | Free | PushFrame | PopFrame


@dataclass(frozen=True)
class SpecBounds:
    max_addr_bits: int = 4
    max_block: int = 8


DEFAULT_SPEC_BOUNDS = SpecBounds()


# -- checker ----------------------------------------------------------------


def spec_allows(dom: AddressDomain, op, sigma: Conf, beh: Outcome) -> bool:
    if isinstance(beh, OOM):
        return True
    if isinstance(beh, Fail):
        return False
    if isinstance(op, ReadByte):
        return _allows_read(op, sigma, beh)
    if isinstance(op, WriteByte):
        return _allows_write(op, sigma, beh)
    if isinstance(op, (Alloca, Malloc)):
        return _allows_alloc(dom, op, sigma, beh)
    if isinstance(op, Free):
        return _allows_free(op, sigma, beh)
    if isinstance(op, PushFrame):
        return _allows_push(sigma, beh)
    if isinstance(op, PopFrame):
        return _allows_pop(sigma, beh)
    raise TypeError(f"not a memory operation: {op!r}")


def _allows_read(op: ReadByte, s: Conf, beh) -> bool:
    if isinstance(beh, UB):
        return not accessible(s.mem, op.p)
    return beh.conf == s and reads(s.mem, op.p, beh.value)


def _allows_write(op: WriteByte, s1: Conf, beh) -> bool:
    ok = accessible(s1.mem, op.p)
    if isinstance(beh, UB):
        return not ok
    s2 = beh.conf
    return (
        ok
        and beh.value is None
        and isinstance(s2, Conf)
        and s2.heap == s1.heap
        and s2.stack == s1.stack
        and s2.used == s1.used
        and reads(s2.mem, op.p, op.b)
        and mem_eq_except(s1.mem, s2.mem, [op.p])
    )


def _block(dom: AddressDomain, a: int, n: int, pr) -> list[Ptr] | None:
    """Pointers ``(a, pr) .. (a+n-1, pr)`` or None if the range leaves ``dom``."""
    if not dom.contains(a):
        return None
    if n and isinstance(addr_add(dom, a, n - 1), OOM):
        return None
    return [Ptr(a + i, pr) for i in range(n)]


def _allows_alloc(dom, op, s1: Conf, beh) -> bool:
    # alloca needs a frame to extend; on an empty stack we classify it as UB
    if isinstance(op, Alloca) and not s1.stack:
        return isinstance(beh, UB)
    if isinstance(beh, UB):
        return False
    p0, s2 = beh.value, beh.conf
    if not isinstance(p0, Ptr) or not isinstance(s2, Conf):
        return False
    pr = p0.pr
    if pr is None or pr in s1.used:
        return False
    bs = op.bytes
    ptrs = _block(dom, p0.a, len(bs), pr)
    if ptrs is None:
        return False
    if any(p.a in s1.mem for p in ptrs):
        return False
    if s2.used != s1.used | {pr}:
        return False
    if isinstance(op, Alloca):
        top, tail = s1.stack[0], s1.stack[1:]
        if s2.stack != (top | frozenset(ptrs),) + tail or s2.heap != s1.heap:
            return False
    else:
        if s2.stack != s1.stack:
            return False
        expected = s1.heap.set(p0.a, tuple(ptrs)) if ptrs else s1.heap
        if s2.heap != expected:
            return False
    # the new cells carry exactly the allocation's provenance
    for p, b in zip(ptrs, bs):
        if s2.mem.get(p.a) != (b, pr):
            return False
    return mem_eq_except(s1.mem, s2.mem, ptrs)


def _allows_free(op: Free, s1: Conf, beh) -> bool:
    blk = s1.heap.get(op.p.a)
    ok = blk is not None and all(accessible(s1.mem, p) for p in blk)
    if isinstance(beh, UB):
        return not ok
    if not ok:
        return False
    s2 = beh.conf
    return (
        beh.value is None
        and isinstance(s2, Conf)
        and s2.stack == s1.stack
        and s2.used == s1.used
        and s2.heap == s1.heap.remove(op.p.a)
        and all(p.a not in s2.mem for p in blk)
        and mem_eq_except(s1.mem, s2.mem, blk)
    )


def _allows_push(s1: Conf, beh) -> bool:
    if isinstance(beh, UB):
        return False
    return beh.value is None and beh.conf == s1.replace(stack=(frozenset(),) + s1.stack)


def _allows_pop(s1: Conf, beh) -> bool:
    ok = bool(s1.stack) and all(accessible(s1.mem, p) for p in s1.stack[0])
    if isinstance(beh, UB):
        return not ok
    if not ok:
        return False
    s2 = beh.conf
    top = s1.stack[0]
    return (
        beh.value is None
        and isinstance(s2, Conf)
        and s2.heap == s1.heap
        and s2.used == s1.used
        and s2.stack == s1.stack[1:]
        and all(p.a not in s2.mem for p in top)
        and mem_eq_except(s1.mem, s2.mem, top)
    )


# -- enumerator -------------------------------------------------------------


def fresh_prov(s: Conf) -> int:
    k = 0
    while k in s.used:
        k += 1
    return k


def canonical_provs(s: Conf, op) -> set:
    """Provenances an enumerated write may store: used ones, wildcard, the pointer's."""
    cands = set(s.used) | {None}
    if isinstance(op, (WriteByte, ReadByte, Free)):
        cands.add(op.p.pr)
    return cands


def spec_enumerate(dom: AddressDomain, op, sigma: Conf, bounds: SpecBounds = DEFAULT_SPEC_BOUNDS) -> frozenset:
    out: set = {OOM()}
    if isinstance(op, ReadByte):
        if accessible(sigma.mem, op.p):
            out.add(Ok(sigma, sigma.mem[op.p.a][0]))
        else:
            out.add(UB())
    elif isinstance(op, WriteByte):
        if not accessible(sigma.mem, op.p):
            out.add(UB())
        else:
            for pr in canonical_provs(sigma, op):
                s2 = sigma.replace(mem=sigma.mem.set(op.p.a, (op.b, pr)))
                if reads(s2.mem, op.p, op.b):
                    out.add(Ok(s2, None))
    elif isinstance(op, (Alloca, Malloc)):
        out |= _enumerate_alloc(dom, op, sigma, bounds)
    elif isinstance(op, Free):
        blk = sigma.heap.get(op.p.a)
        if blk is None or not all(accessible(sigma.mem, p) for p in blk):
            out.add(UB())
        else:
            s2 = sigma.replace(
                mem=sigma.mem.remove(*(p.a for p in blk)), heap=sigma.heap.remove(op.p.a)
            )
            out.add(Ok(s2, None))
    elif isinstance(op, PushFrame):
        out.add(Ok(sigma.replace(stack=(frozenset(),) + sigma.stack), None))
    elif isinstance(op, PopFrame):
        if not sigma.stack or not all(accessible(sigma.mem, p) for p in sigma.stack[0]):
            out.add(UB())
        else:
            top = sigma.stack[0]
            s2 = sigma.replace(mem=sigma.mem.remove(*(p.a for p in top)), stack=sigma.stack[1:])
            out.add(Ok(s2, None))
    else:
        raise TypeError(f"not a memory operation: {op!r}")
    return frozenset(out)


def _enumerate_alloc(dom, op, s1: Conf, bounds: SpecBounds) -> set:
    if isinstance(op, Alloca) and not s1.stack:
        return {UB()}
    if dom.bits is None or dom.bits > bounds.max_addr_bits:
        raise EnumerationError(f"domain too large to enumerate: {dom}")
    n = len(op.bytes)
    if n > bounds.max_block:
        raise EnumerationError(f"block of {n} bytes exceeds enumeration cap {bounds.max_block}")
    out = set()
    for a in range(dom.size):
        placed = place(dom, op, s1, a, fresh_prov(s1))
        if placed is not None:
            out.add(placed)
    return out


def place(dom, op, s1: Conf, a: int, pr: int) -> Ok | None:
    """The unique Ok behavior of an allocation placed at ``a`` with ``pr``, if free."""
    bs = op.bytes
    ptrs = _block(dom, a, len(bs), pr)
    if ptrs is None or any(p.a in s1.mem for p in ptrs):
        return None
    mem = s1.mem.update((p.a, (b, pr)) for p, b in zip(ptrs, bs))
    used = s1.used | {pr}
    if isinstance(op, Alloca):
        stack = (s1.stack[0] | frozenset(ptrs),) + s1.stack[1:]
        s2 = Conf(mem=mem, heap=s1.heap, stack=stack, used=used)
    else:
        heap = s1.heap.set(a, tuple(ptrs)) if ptrs else s1.heap
        s2 = Conf(mem=mem, heap=heap, stack=s1.stack, used=used)
    return Ok(s2, Ptr(a, pr))

