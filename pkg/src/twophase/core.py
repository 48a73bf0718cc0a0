"""Address domains, pointers, memory configurations and the outcome lattice.

Everything here is immutable. A configuration is a value; operations build new
configurations instead of mutating old ones.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any, Optional

Prov = Optional[int]  # None is the wildcard provenance


@dataclass(frozen=True)
class AddressDomain:
    """Either every natural number (``bits is None``) or ``[0, 2**bits)``."""

    bits: Optional[int] = None

    def __post_init__(self):
        if self.bits is not None and not 1 <= self.bits <= 64:
            raise ValueError(f"address width must be in 1..64, got {self.bits}")

    @property
    def unbounded(self) -> bool:
        return self.bits is None

    @property
    def size(self) -> Optional[int]:
        return None if self.bits is None else 1 << self.bits

    def contains(self, a: int) -> bool:
        if a < 0:
            return False
        return self.bits is None or a < (1 << self.bits)

    def __str__(self):
        return "unbounded" if self.bits is None else f"bits({self.bits})"


UNBOUNDED = AddressDomain()


def bits(n: int) -> AddressDomain:
    return AddressDomain(n)


@dataclass(frozen=True, order=True)
class Ptr:
    a: int
    pr: Prov = None

    def __str__(self):
        return f"{self.a}@{'_' if self.pr is None else self.pr}"


class FrozenMap(Mapping):
    """A hashable mapping; updates return new maps."""

    __slots__ = ("_d", "_hash")

    def __init__(self, items: Iterable | Mapping = ()):
        self._d = dict(items)
        self._hash = None

    def __getitem__(self, k):
        return self._d[k]

    def __iter__(self) -> Iterator:
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __contains__(self, k):
        return k in self._d

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, FrozenMap):
            return self._d == other._d
        if isinstance(other, Mapping):
            return self._d == dict(other.items())
        return NotImplemented

    def __repr__(self):
        return f"FrozenMap({self._d!r})"

    def set(self, k, v) -> "FrozenMap":
        d = dict(self._d)
        d[k] = v
        return FrozenMap(d)

    def update(self, pairs: Iterable) -> "FrozenMap":
        d = dict(self._d)
        d.update(pairs)
        return FrozenMap(d)

    def remove(self, *keys) -> "FrozenMap":
        d = dict(self._d)
        for k in keys:
            d.pop(k, None)
        return FrozenMap(d)


EMPTY_MAP = FrozenMap()

# Memory: addr -> (sbyte, prov); Heap: root addr -> tuple of Ptr
Memory = FrozenMap
Frame = frozenset


@dataclass(frozen=True)
class Conf:
    mem: FrozenMap = EMPTY_MAP
    heap: FrozenMap = EMPTY_MAP
    stack: tuple = ()  # tuple of frozenset[Ptr], index 0 is the top frame
    used: frozenset = frozenset()

    def replace(self, **kw) -> "Conf":
        d = dict(mem=self.mem, heap=self.heap, stack=self.stack, used=self.used)
        d.update(kw)
        return Conf(**d)


EMPTY_CONF = Conf()


def make_conf(mem=None, heap=None, stack=(), used=()) -> Conf:
    return Conf(
        mem=FrozenMap(mem or {}),
        heap=FrozenMap({k: tuple(v) for k, v in (heap or {}).items()}),
        stack=tuple(frozenset(f) for f in stack),
        used=frozenset(used),
    )


class EnumerationError(Exception):
    """The requested behavior set is too large to list under the bounds."""


# -- outcomes ---------------------------------------------------------------


class Outcome:
    """Base of ``UB | OOM | Fail | Ok``.

    Error variants compare by kind only; the message is for humans.
    """

    __slots__ = ()

    @property
    def is_error(self) -> bool:
        return not isinstance(self, Ok)


@dataclass(frozen=True)
class UB(Outcome):
    msg: str = field(default="", compare=False)

    def __str__(self):
        return f"UB: {self.msg}"


@dataclass(frozen=True)
class OOM(Outcome):
    msg: str = field(default="", compare=False)

    def __str__(self):
        return f"OOM: {self.msg}"


@dataclass(frozen=True)
class Fail(Outcome):
    msg: str = field(default="", compare=False)

    def __str__(self):
        return f"FAIL: {self.msg}"


@dataclass(frozen=True)
class Ok(Outcome):
    conf: Any
    value: Any = None

    def __str__(self):
        return f"Ok({self.value})"


# -- operations ---------------------------------------------------------------


def addr_add(dom: AddressDomain, a: int, n: int) -> int | OOM:
    """``a + n``, or ``OOM`` when the sum leaves a bounded domain."""
    r = a + n
    if dom.bits is not None and r >= (1 << dom.bits):
        return OOM(f"address {a}+{n} overflows {dom}")
    return r


def prov_matches(stored: Prov, pr: Prov) -> bool:
    # wildcard on either side matches
    return stored is None or pr is None or stored == pr


def lookup(m: Mapping, p: Ptr):
    """The allowed-lookup relation: the byte at ``p`` or None."""
    entry = m.get(p.a)
    if entry is None:
        return None
    b, stored = entry
    if not prov_matches(stored, p.pr):
        return None
    return b


def reads(m: Mapping, p: Ptr, b) -> bool:
    """``m[p] = b`` including the provenance check."""
    entry = m.get(p.a)
    return entry is not None and prov_matches(entry[1], p.pr) and entry[0] == b


def accessible(m: Mapping, p: Ptr) -> bool:
    entry = m.get(p.a)
    return entry is not None and prov_matches(entry[1], p.pr)


def mem_eq_except(m1: Mapping, m2: Mapping, ps: Iterable[Ptr]) -> bool:
    """Memories agree on content and provenance outside the addresses of ``ps``.

    Agreement of the lookup relation for every pointer at an address reduces to
    equality of the stored entries, because a wildcard entry is visible to
    pointers that a tagged entry hides from.
    """
    excluded = {p.a for p in ps}
    for a in set(m1) | set(m2):
        if a in excluded:
            continue
        if m1.get(a) != m2.get(a):
            return False
    return True


def check_conf(conf: Conf, dom: AddressDomain) -> list[str]:
    """Well-formedness problems of ``conf`` in ``dom`` (empty when fine)."""
    problems = []
    for a in conf.mem:
        if not dom.contains(a):
            problems.append(f"memory address {a} outside {dom}")
    for root, ptrs in conf.heap.items():
        if not dom.contains(root):
            problems.append(f"heap root {root} outside {dom}")
        for p in ptrs:
            if p.a not in conf.mem:
                problems.append(f"heap block {root} lists unmapped {p}")
    for i, frame in enumerate(conf.stack):
        for p in frame:
            if not dom.contains(p.a):
                problems.append(f"frame {i} pointer {p} outside {dom}")
    return problems


def dump_conf(conf: Conf) -> str:
    """Canonical text form: memory by address, heap roots, frames top-first."""
    lines = []
    for a in sorted(conf.mem):
        b, pr = conf.mem[a]
        lines.append(f"{a}: {b} @{'_' if pr is None else pr}")
    for root in sorted(conf.heap):
        blk = " ".join(str(p) for p in conf.heap[root])
        lines.append(f"heap {root}: [{blk}]")
    for i, frame in enumerate(conf.stack):
        ptrs = " ".join(str(p) for p in sorted(frame))
        lines.append(f"frame {i}: {{{ptrs}}}")
    used = ",".join("_" if u is None else str(u) for u in sorted(conf.used, key=_prov_key))
    lines.append(f"used: {{{used}}}")
    return "\n".join(lines)


def _prov_key(pr: Prov):
    return -1 if pr is None else pr
