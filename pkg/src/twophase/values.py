"""Value layer: types, defined values, under-defined values and symbolic bytes.

Defined values (``DValue``) are what a program finally observes. Under-defined
values (``UValue``) are lazy expression trees over defined values and ``undef``;
``concretize`` maps one to the set of outcomes it may produce. Memory holds
``SByte``s, each naming one byte of a ``UValue`` together with the id of the
store that wrote it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional, Union

from .core import (
    OOM,
    UB,
    UNBOUNDED,
    AddressDomain,
    EnumerationError,
    Fail,
    Ok,
    Outcome,
    Ptr,
    bits as bits_domain,
)

# -- modes ----------------------------------------------------------------------


@dataclass(frozen=True)
class Mode:
    """Which model a value lives in.

    The infinite model has unbounded addresses and exact ``iptr`` arithmetic.
    The finite model has ``bits``-wide addresses, and an ``iptr`` result outside
    ``[0, 2**bits)`` is an out-of-memory halt.
    """

    finite: bool = False
    bits: int = 64
    byteorder: str = "little"

    def __post_init__(self):
        if self.byteorder not in ("little", "big"):
            raise ValueError(f"byteorder must be 'little' or 'big', got {self.byteorder!r}")
        if not 1 <= self.bits <= 64:
            raise ValueError(f"address width must be in 1..64, got {self.bits}")

    @classmethod
    def inf(cls, byteorder: str = "little") -> "Mode":
        return cls(False, 64, byteorder)

    @classmethod
    def fin(cls, bits: int = 64, byteorder: str = "little") -> "Mode":
        return cls(True, bits, byteorder)

    @property
    def dom(self) -> AddressDomain:
        return bits_domain(self.bits) if self.finite else UNBOUNDED

    def __str__(self):
        return f"fin({self.bits})" if self.finite else "inf"


INF = Mode.inf()

# -- types ----------------------------------------------------------------------


@dataclass(frozen=True)
class VoidT:
    def __str__(self):
        return "void"


@dataclass(frozen=True)
class IntT:
    w: int

    def __post_init__(self):
        if self.w not in (1, 8, 16, 32, 64):
            raise ValueError(f"unsupported integer width {self.w}")

    def __str__(self):
        return f"i{self.w}"


@dataclass(frozen=True)
class IPtrT:
    def __str__(self):
        return "iptr"


@dataclass(frozen=True)
class PtrT:
    def __str__(self):
        return "ptr"


@dataclass(frozen=True)
class ArrayT:
    n: int
    elem: "VType"

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("array length must be non-negative")

    def __str__(self):
        return f"[{self.n} x {self.elem}]"


VType = Union[VoidT, IntT, IPtrT, PtrT, ArrayT]

VOID = VoidT()
I1, I8, I16, I32, I64 = (IntT(w) for w in (1, 8, 16, 32, 64))
IPTR = IPtrT()
PTR = PtrT()

POINTER_BYTES = 8


def sizeof(t: VType) -> int:
    if isinstance(t, IntT):
        return (t.w + 7) // 8
    if isinstance(t, (IPtrT, PtrT)):
        return POINTER_BYTES
    if isinstance(t, ArrayT):
        return t.n * sizeof(t.elem)
    return 0


# -- defined values ---------------------------------------------------------------


@dataclass(frozen=True)
class DNone:
    pass


@dataclass(frozen=True)
class DInt:
    w: int
    v: int

    def __post_init__(self):
        if not 0 <= self.v < (1 << self.w):
            raise ValueError(f"i{self.w} value {self.v} not in canonical range")


@dataclass(frozen=True)
class DIPtr:
    v: int


@dataclass(frozen=True)
class DAddr:
    p: Ptr


@dataclass(frozen=True)
class DArray:
    elems: tuple
    elem: VType


@dataclass(frozen=True)
class DPoison:
    t: VType


DValue = Union[DNone, DInt, DIPtr, DAddr, DArray, DPoison]


def dint(w: int, v: int) -> DInt:
    """An ``iN`` value, reducing ``v`` modulo ``2**w``."""
    return DInt(w, v & ((1 << w) - 1))


def dtype(dv: DValue) -> VType:
    if isinstance(dv, DInt):
        return IntT(dv.w)
    if isinstance(dv, DIPtr):
        return IPTR
    if isinstance(dv, DAddr):
        return PTR
    if isinstance(dv, DArray):
        return ArrayT(len(dv.elems), dv.elem)
    if isinstance(dv, DPoison):
        return dv.t
    return VOID


def zero(t: VType) -> DValue:
    if isinstance(t, IntT):
        return DInt(t.w, 0)
    if isinstance(t, IPtrT):
        return DIPtr(0)
    if isinstance(t, PtrT):
        return DAddr(Ptr(0, None))
    if isinstance(t, ArrayT):
        return DArray(tuple(zero(t.elem) for _ in range(t.n)), t.elem)
    return DNone()


def contains_poison(dv: DValue) -> bool:
    if isinstance(dv, DPoison):
        return True
    if isinstance(dv, DArray):
        return any(contains_poison(e) for e in dv.elems)
    return False


# -- under-defined values -------------------------------------------------------


class BinOp(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    UDIV = "udiv"
    AND = "and"
    OR = "or"
    XOR = "xor"
    SHL = "shl"
    LSHR = "lshr"


class ICmpPred(str, Enum):
    EQ = "eq"
    NE = "ne"
    ULT = "ult"
    ULE = "ule"


class ConvKind(str, Enum):
    PTRTOINT = "ptrtoint"
    INTTOPTR = "inttoptr"
    TRUNC = "trunc"
    ZEXT = "zext"


@dataclass(frozen=True)
class Lift:
    dv: DValue


@dataclass(frozen=True)
class ArrayU:
    items: tuple
    elem: VType


@dataclass(frozen=True)
class Undef:
    t: VType


@dataclass(frozen=True)
class BinOpU:
    op: BinOp
    a: "UValue"
    b: "UValue"


@dataclass(frozen=True)
class ICmpU:
    pred: ICmpPred
    a: "UValue"
    b: "UValue"


@dataclass(frozen=True)
class SelectU:
    c: "UValue"
    a: "UValue"
    b: "UValue"


@dataclass(frozen=True)
class ConvU:
    kind: ConvKind
    v: "UValue"
    t: VType


@dataclass(frozen=True)
class ConcatBytes:
    bytes: tuple
    t: VType


UValue = Union[Lift, ArrayU, Undef, BinOpU, ICmpU, SelectU, ConvU, ConcatBytes]


@dataclass(frozen=True)
class SByte:
    """Byte ``idx`` of ``uv`` (stored at type ``t``) written by store ``sid``."""

    t: VType
    uv: UValue
    idx: int
    sid: int

    def __str__(self):
        return f"sb({self.t}, {render_u(self.uv)}, {self.idx}, #{self.sid})"


def utype(uv: UValue) -> VType:
    """The static type of an under-defined value."""
    if isinstance(uv, Lift):
        return dtype(uv.dv)
    if isinstance(uv, ArrayU):
        return ArrayT(len(uv.items), uv.elem)
    if isinstance(uv, (Undef, ConvU, ConcatBytes)):
        return uv.t
    if isinstance(uv, BinOpU):
        return utype(uv.a)
    if isinstance(uv, ICmpU):
        return I1
    if isinstance(uv, SelectU):
        return utype(uv.a)
    raise TypeError(f"not a uvalue: {uv!r}")


# -- serialization --------------------------------------------------------------


def serialize(uv: UValue, t: VType, sid: int) -> tuple:
    return tuple(SByte(t, uv, i, sid) for i in range(sizeof(t)))


def deserialize(bs: Iterable[SByte], t: VType) -> UValue:
    bs = tuple(bs)
    n = sizeof(t)
    if n == 0:
        return Lift(zero(t))
    if len(bs) == n:
        b0 = bs[0]
        if b0.t == t and all(
            b.idx == i and b.sid == b0.sid and b.t == t and b.uv == b0.uv for i, b in enumerate(bs)
        ):
            return b0.uv
    return ConcatBytes(bs, t)


def value_bytes(dv: DValue, byteorder: str = "little") -> list:
    """Concrete bytes of ``dv``; a poison byte is ``None``.

    Integers wider than the pointer size are reduced modulo ``2**64`` first.
    """
    if isinstance(dv, DInt):
        return list(dv.v.to_bytes(sizeof(IntT(dv.w)), byteorder))
    if isinstance(dv, DIPtr):
        return list((dv.v % (1 << 64)).to_bytes(POINTER_BYTES, byteorder))
    if isinstance(dv, DAddr):
        return list((dv.p.a % (1 << 64)).to_bytes(POINTER_BYTES, byteorder))
    if isinstance(dv, DArray):
        out = []
        for e in dv.elems:
            out.extend(value_bytes(e, byteorder))
        return out
    if isinstance(dv, DPoison):
        return [None] * sizeof(dv.t)
    return []


def bitcast(t: VType, raw: list, byteorder: str = "little") -> DValue:
    """Reassemble concrete bytes as a ``t`` value.

    Extra bytes are dropped and missing ones are zero, both at the end of the
    list in memory order. Rebuilt pointers carry the wildcard provenance.
    """
    n = sizeof(t)
    raw = list(raw[:n]) + [0] * max(0, n - len(raw))
    if isinstance(t, ArrayT):
        k = sizeof(t.elem)
        return DArray(tuple(bitcast(t.elem, raw[i * k:(i + 1) * k], byteorder) for i in range(t.n)), t.elem)
    v = int.from_bytes(bytes(raw), byteorder)
    if isinstance(t, IntT):
        return dint(t.w, v)
    if isinstance(t, IPtrT):
        return DIPtr(v)
    if isinstance(t, PtrT):
        return DAddr(Ptr(v, None))
    return DNone()


# -- arithmetic -----------------------------------------------------------------

# Left shifts of unbounded integers beyond this are refused rather than computed.
MAX_EXACT_SHIFT = 1 << 16


def ok(dv: DValue) -> Ok:
    return Ok(None, dv)


def iptr_result(mode: Mode, v: int) -> Outcome:
    """Wrap an exact ``iptr`` result, halting with OOM outside the finite range."""
    if mode.finite and not 0 <= v < (1 << mode.bits):
        return OOM(f"iptr value {v} outside [0, 2^{mode.bits})")
    return ok(DIPtr(v))


def _poison_operands(x: DValue, y: DValue) -> Outcome | None:
    if not isinstance(x, DPoison) and not isinstance(y, DPoison):
        return None
    tx, ty = dtype(x), dtype(y)
    if tx != ty:
        return Fail(f"operand types differ: {tx} and {ty}")
    return ok(DPoison(tx))


def _int_binop(op: BinOp, w: int, a: int, b: int) -> Outcome:
    mask = (1 << w) - 1
    if op is BinOp.ADD:
        r = a + b
    elif op is BinOp.SUB:
        r = a - b
    elif op is BinOp.MUL:
        r = a * b
    elif op is BinOp.UDIV:
        if b == 0:
            return UB("division by zero")
        r = a // b
    elif op is BinOp.AND:
        r = a & b
    elif op is BinOp.OR:
        r = a | b
    elif op is BinOp.XOR:
        r = a ^ b
    elif op is BinOp.SHL:
        if b >= w:
            return ok(DPoison(IntT(w)))
        r = a << b
    else:
        if b >= w:
            return ok(DPoison(IntT(w)))
        r = a >> b
    return ok(DInt(w, r & mask))


def _iptr_binop(mode: Mode, op: BinOp, a: int, b: int) -> Outcome:
    if op is BinOp.ADD:
        r = a + b
    elif op is BinOp.SUB:
        r = a - b
    elif op is BinOp.MUL:
        r = a * b
    elif op is BinOp.UDIV:
        if b == 0:
            return UB("division by zero")
        r = a // b
    elif op is BinOp.AND:
        r = a & b
    elif op is BinOp.OR:
        r = a | b
    elif op is BinOp.XOR:
        r = a ^ b
    elif op is BinOp.SHL:
        if a != 0 and b > MAX_EXACT_SHIFT:
            if mode.finite:
                return OOM(f"iptr shift by {b} leaves the address range")
            return Fail(f"iptr shift by {b} is too large to compute exactly")
        r = a << b
    else:
        r = a >> b
    return iptr_result(mode, r)


def eval_binop(mode: Mode, op: BinOp, x: DValue, y: DValue) -> Outcome:
    op = BinOp(op)
    p = _poison_operands(x, y)
    if p is not None:
        return p
    if isinstance(x, DInt) and isinstance(y, DInt) and x.w == y.w:
        return _int_binop(op, x.w, x.v, y.v)
    if isinstance(x, DIPtr) and isinstance(y, DIPtr):
        return _iptr_binop(mode, op, x.v, y.v)
    return Fail(f"{op.value} on {dtype(x)} and {dtype(y)}")


def _scalar(dv: DValue) -> int | None:
    if isinstance(dv, (DInt, DIPtr)):
        return dv.v
    if isinstance(dv, DAddr):
        return dv.p.a
    return None


def eval_icmp(mode: Mode, pred: ICmpPred, x: DValue, y: DValue) -> Outcome:
    pred = ICmpPred(pred)
    if isinstance(x, DPoison) or isinstance(y, DPoison):
        if dtype(x) != dtype(y):
            return Fail(f"icmp operand types differ: {dtype(x)} and {dtype(y)}")
        return ok(DPoison(I1))
    a, b = _scalar(x), _scalar(y)
    if a is None or b is None or dtype(x) != dtype(y):
        return Fail(f"icmp on {dtype(x)} and {dtype(y)}")
    r = {ICmpPred.EQ: a == b, ICmpPred.NE: a != b, ICmpPred.ULT: a < b, ICmpPred.ULE: a <= b}[pred]
    return ok(DInt(1, int(r)))


def eval_select(mode: Mode, c: DValue, x: DValue, y: DValue) -> Outcome:
    if dtype(x) != dtype(y):
        return Fail(f"select arms differ: {dtype(x)} and {dtype(y)}")
    if isinstance(c, DPoison):
        return ok(DPoison(dtype(x)))
    if not isinstance(c, DInt) or c.w != 1:
        return Fail(f"select condition of type {dtype(c)}")
    return ok(x if c.v else y)


def address_from_int(mode: Mode, v: int) -> Outcome:
    """The address named by an integer, as an inttoptr or address operand sees it."""
    if v < 0:
        return UB(f"negative address {v}")
    if not mode.dom.contains(v):
        return OOM(f"address {v} outside {mode.dom}")
    return ok(DAddr(Ptr(v, None)))


def eval_conv(mode: Mode, kind: ConvKind, x: DValue, t: VType) -> Outcome:
    kind = ConvKind(kind)
    if isinstance(x, DPoison):
        return ok(DPoison(t))
    if kind is ConvKind.TRUNC:
        if isinstance(t, IntT) and isinstance(x, (DInt, DIPtr)):
            if isinstance(x, DInt) and x.w < t.w:
                return Fail(f"trunc from i{x.w} to wider {t}")
            return ok(dint(t.w, x.v))
    elif kind is ConvKind.ZEXT:
        if isinstance(x, DInt):
            if isinstance(t, IntT) and t.w >= x.w:
                return ok(DInt(t.w, x.v))
            if isinstance(t, IPtrT):
                return iptr_result(mode, x.v)
    elif kind is ConvKind.PTRTOINT:
        if isinstance(x, DAddr):
            if isinstance(t, IPtrT):
                return iptr_result(mode, x.p.a)
            if isinstance(t, IntT):
                return ok(dint(t.w, x.p.a))
    elif kind is ConvKind.INTTOPTR:
        if isinstance(x, (DInt, DIPtr)) and isinstance(t, PtrT):
            return address_from_int(mode, x.v)
    return Fail(f"{kind.value} from {dtype(x)} to {t}")


def check_in_mode(mode: Mode, dv: DValue) -> Outcome:
    """``Ok dv`` if every address and iptr inside ``dv`` is representable in ``mode``."""
    if isinstance(dv, DIPtr):
        return iptr_result(mode, dv.v)
    if isinstance(dv, DAddr):
        if not mode.dom.contains(dv.p.a):
            return OOM(f"address {dv.p.a} outside {mode.dom}")
    elif isinstance(dv, DArray):
        for e in dv.elems:
            r = check_in_mode(mode, e)
            if r.is_error:
                return r
    return ok(dv)


# -- enumeration of type inhabitants ----------------------------------------------


@dataclass(frozen=True)
class EnumBounds:
    """Budgets for every enumerator in the package.

    ``max_undef`` caps exact enumeration of one ``undef``; wider types fault
    unless ``sample_wide`` substitutes a small representative sample.
    """

    max_undef: int = 256
    sample_wide: bool = False
    max_set: int = 1 << 16
    max_paths: int = 4096
    enum_alloc: bool = False
    inf_window_bits: int = 4
    spec_oom: bool = False
    max_addr_bits: int = 4
    max_block: int = 8

    def spec(self):
        from .memspec import SpecBounds

        return SpecBounds(self.max_addr_bits, self.max_block)


DEFAULT_BOUNDS = EnumBounds()


def count_values(t: VType) -> Optional[int]:
    """Number of non-poison values of ``t``, or None when treated as unbounded."""
    if isinstance(t, IntT):
        return 1 << t.w
    if isinstance(t, ArrayT):
        c = count_values(t.elem)
        return None if c is None else c ** t.n
    if isinstance(t, VoidT):
        return 1
    return None


def all_values(t: VType) -> list:
    if isinstance(t, IntT):
        return [DInt(t.w, v) for v in range(1 << t.w)]
    if isinstance(t, ArrayT):
        return [DArray(tuple(c), t.elem) for c in itertools.product(all_values(t.elem), repeat=t.n)]
    if isinstance(t, VoidT):
        return [DNone()]
    raise EnumerationError(f"cannot list every value of {t}")


def sample_values(t: VType) -> list:
    """A fixed representative sample, the same in both models."""
    if isinstance(t, IntT):
        out = [DInt(t.w, 0), DInt(t.w, 1), DInt(t.w, (1 << t.w) - 1)]
        return list(dict.fromkeys(out))
    if isinstance(t, IPtrT):
        return [DIPtr(0), DIPtr(1)]
    if isinstance(t, PtrT):
        return [DAddr(Ptr(0, None)), DAddr(Ptr(1, None))]
    if isinstance(t, ArrayT):
        if t.n == 0:
            return [zero(t)]
        return [DArray((s,) * t.n, t.elem) for s in sample_values(t.elem)]
    return [DNone()]


# -- concretization -----------------------------------------------------------------


class Concretizations(frozenset):
    """A set of outcomes; ``exhaustive`` is False when some undef was sampled."""

    def __new__(cls, items=(), exhaustive: bool = True):
        self = super().__new__(cls, items)
        self.exhaustive = exhaustive
        return self


def bind_all(sets: list, k: Callable[[list], Iterable[Outcome]]) -> set:
    """Sequential bind of outcome sets: errors short-circuit left to right."""
    results: set = set()

    def go(i, acc):
        if i == len(sets):
            results.update(k(acc))
            return
        for o in sets[i]:
            if o.is_error:
                results.add(o)
            else:
                go(i + 1, acc + [o.value])

    go(0, [])
    return results


class _Concretizer:
    def __init__(self, mode: Mode, bounds: EnumBounds, default: bool):
        self.mode = mode
        self.bounds = bounds
        self.default = default
        self.exhaustive = True

    def undef(self, t: VType) -> list:
        if self.default:
            return [zero(t)]
        c = count_values(t)
        if c is not None and c <= self.bounds.max_undef:
            return all_values(t)
        if self.bounds.sample_wide:
            self.exhaustive = False
            return sample_values(t)
        raise EnumerationError(f"undef<{t}> is too wide to enumerate")

    def _guard(self, n: int):
        if n > self.bounds.max_set:
            raise EnumerationError(f"concretization set of {n} elements exceeds {self.bounds.max_set}")

    def run(self, uv: UValue) -> set:
        mode = self.mode
        if isinstance(uv, Lift):
            return {ok(uv.dv)}
        if isinstance(uv, Undef):
            return {ok(dv) for dv in self.undef(uv.t)}
        if isinstance(uv, ArrayU):
            sets = [self.run(u) for u in uv.items]
            self._guard(_product_size(sets))
            return bind_all(sets, lambda vs: [ok(DArray(tuple(vs), uv.elem))])
        if isinstance(uv, BinOpU):
            sets = [self.run(uv.a), self.run(uv.b)]
            return bind_all(sets, lambda vs: [eval_binop(mode, uv.op, vs[0], vs[1])])
        if isinstance(uv, ICmpU):
            sets = [self.run(uv.a), self.run(uv.b)]
            return bind_all(sets, lambda vs: [eval_icmp(mode, uv.pred, vs[0], vs[1])])
        if isinstance(uv, ConvU):
            return bind_all([self.run(uv.v)], lambda vs: [eval_conv(mode, uv.kind, vs[0], uv.t)])
        if isinstance(uv, SelectU):
            return self._select(uv)
        if isinstance(uv, ConcatBytes):
            return self._concat(uv)
        raise TypeError(f"not a uvalue: {uv!r}")

    def _select(self, uv: SelectU) -> set:
        out = set()
        t = utype(uv.a)
        for c in self.run(uv.c):
            if c.is_error:
                out.add(c)
            elif isinstance(c.value, DPoison):
                out.add(ok(DPoison(t)))
            elif isinstance(c.value, DInt) and c.value.w == 1:
                out |= self.run(uv.a if c.value.v else uv.b)
            else:
                out.add(Fail(f"select condition of type {dtype(c.value)}"))
        return out

    def _concat(self, uv: ConcatBytes) -> set:
        if sizeof(uv.t) == 0:
            return {ok(zero(uv.t))}
        # bytes from one store concretize together
        groups: dict = {}
        for b in uv.bytes:
            groups.setdefault((b.sid, b.uv), b)
        keys = list(groups)
        sets = [self.run(k[1]) for k in keys]
        self._guard(_product_size(sets))
        index = {k: i for i, k in enumerate(keys)}
        order = self.mode.byteorder

        def assemble(vs):
            raw = []
            cache = {}
            for b in uv.bytes:
                i = index[(b.sid, b.uv)]
                if i not in cache:
                    cache[i] = value_bytes(vs[i], order)
                bs = cache[i]
                raw.append(bs[b.idx] if b.idx < len(bs) else 0)
            if any(x is None for x in raw):
                return [ok(DPoison(uv.t))]
            return [check_in_mode(self.mode, bitcast(uv.t, raw, order))]

        return bind_all(sets, assemble)


def _product_size(sets: list) -> int:
    n = 1
    for s in sets:
        n *= max(1, len(s))
    return n


def concretize(mode: Mode, uv: UValue, bounds: EnumBounds = DEFAULT_BOUNDS) -> Concretizations:
    c = _Concretizer(mode, bounds, default=False)
    out = c.run(uv)
    return Concretizations(out, c.exhaustive)


def concretize_default(mode: Mode, uv: UValue) -> Outcome:
    """The concretization obtained by reading every undef as zero."""
    out = _Concretizer(mode, DEFAULT_BOUNDS, default=True).run(uv)
    if len(out) != 1:
        raise AssertionError(f"default concretization is not deterministic: {out}")
    return next(iter(out))


# -- lifting from the finite to the infinite model ---------------------------------


def lift_value(v, dom: AddressDomain | None = None):
    """Inject a finite-model value into the infinite model.

    Addresses and iptr values are already unbounded integers, so lifting is a
    structural identity; with ``dom`` given, out-of-range leaves are rejected.
    """
    if dom is not None:
        for leaf in _leaves(v):
            if isinstance(leaf, DAddr) and not dom.contains(leaf.p.a):
                raise ValueError(f"address {leaf.p.a} is not a {dom} address")
            if isinstance(leaf, DIPtr) and not dom.contains(leaf.v):
                raise ValueError(f"iptr {leaf.v} is not a {dom} value")
    return v


def _leaves(v):
    if isinstance(v, (DAddr, DIPtr)):
        yield v
    elif isinstance(v, DArray):
        for e in v.elems:
            yield from _leaves(e)
    elif isinstance(v, Lift):
        yield from _leaves(v.dv)
    elif isinstance(v, ArrayU):
        for e in v.items:
            yield from _leaves(e)
    elif isinstance(v, (BinOpU, ICmpU)):
        yield from _leaves(v.a)
        yield from _leaves(v.b)
    elif isinstance(v, SelectU):
        for e in (v.c, v.a, v.b):
            yield from _leaves(e)
    elif isinstance(v, ConvU):
        yield from _leaves(v.v)
    elif isinstance(v, ConcatBytes):
        for b in v.bytes:
            yield from _leaves(b)
    elif isinstance(v, SByte):
        yield from _leaves(v.uv)


# -- text -----------------------------------------------------------------------


def render(dv: DValue) -> str:
    if isinstance(dv, DInt):
        return f"i{dv.w} {dv.v}"
    if isinstance(dv, DIPtr):
        return f"iptr {dv.v}"
    if isinstance(dv, DAddr):
        return f"ptr {dv.p}"
    if isinstance(dv, DPoison):
        return f"poison<{dv.t}>"
    if isinstance(dv, DArray):
        if not dv.elems:
            return f"[]<{dv.elem}>"
        return "[" + ", ".join(render(e) for e in dv.elems) + "]"
    return "void"


def render_u(uv: UValue) -> str:
    if isinstance(uv, Lift):
        return render(uv.dv)
    if isinstance(uv, Undef):
        return f"undef<{uv.t}>"
    if isinstance(uv, ArrayU):
        return "[" + ", ".join(render_u(e) for e in uv.items) + "]"
    if isinstance(uv, BinOpU):
        return f"({uv.op.value} {render_u(uv.a)}, {render_u(uv.b)})"
    if isinstance(uv, ICmpU):
        return f"(icmp {uv.pred.value} {render_u(uv.a)}, {render_u(uv.b)})"
    if isinstance(uv, SelectU):
        return f"(select {render_u(uv.c)}, {render_u(uv.a)}, {render_u(uv.b)})"
    if isinstance(uv, ConvU):
        return f"({uv.kind.value} {render_u(uv.v)} to {uv.t})"
    if isinstance(uv, ConcatBytes):
        return f"bytes<{uv.t}>[" + ", ".join(str(b) for b in uv.bytes) + "]"
    raise TypeError(f"not a uvalue: {uv!r}")


def outcome_key(o: Outcome) -> tuple:
    """A total order on value outcomes for stable output."""
    if isinstance(o, Ok):
        return (0, render(o.value))
    return ({UB: 1, OOM: 2, Fail: 3}[type(o)], "")


class ValueSyntaxError(ValueError):
    pass


def parse_type(text: str) -> VType:
    t, rest = _parse_type(text.strip())
    if rest.strip():
        raise ValueSyntaxError(f"trailing text after type: {rest!r}")
    return t


def _parse_type(s: str):
    s = s.lstrip()
    if s.startswith("["):
        inner = s[1:]
        num, _, rest = inner.partition("x")
        try:
            n = int(num.strip())
        except ValueError:
            raise ValueSyntaxError(f"bad array length in {s!r}") from None
        elem, rest = _parse_type(rest)
        rest = rest.lstrip()
        if not rest.startswith("]"):
            raise ValueSyntaxError(f"expected ']' in {s!r}")
        return ArrayT(n, elem), rest[1:]
    for name, t in (("void", VOID), ("iptr", IPTR), ("ptr", PTR)):
        if s.startswith(name):
            return t, s[len(name):]
    if s.startswith("i"):
        j = 1
        while j < len(s) and s[j].isdigit():
            j += 1
        if j > 1:
            try:
                return IntT(int(s[1:j])), s[j:]
            except ValueError as e:
                raise ValueSyntaxError(str(e)) from None
    raise ValueSyntaxError(f"expected a type at {s[:20]!r}")


def parse_dvalue(text: str) -> DValue:
    """Inverse of ``render``."""
    dv, rest = _parse_dvalue(text.strip())
    if rest.strip():
        raise ValueSyntaxError(f"trailing text after value: {rest!r}")
    return dv


def _parse_dvalue(s: str):
    s = s.lstrip()
    if s.startswith("poison<"):
        t, rest = _parse_type(s[len("poison<"):])
        rest = rest.lstrip()
        if not rest.startswith(">"):
            raise ValueSyntaxError("expected '>' after poison type")
        return DPoison(t), rest[1:]
    if s.startswith("void"):
        return DNone(), s[4:]
    if s.startswith("["):
        rest = s[1:].lstrip()
        elems = []
        if rest.startswith("]"):
            rest = rest[1:]
            if not rest.startswith("<"):
                raise ValueSyntaxError("empty array literal needs an element type: []<T>")
            t, rest = _parse_type(rest[1:])
            rest = rest.lstrip()
            if not rest.startswith(">"):
                raise ValueSyntaxError("expected '>' after array element type")
            return DArray((), t), rest[1:]
        while True:
            e, rest = _parse_dvalue(rest)
            elems.append(e)
            rest = rest.lstrip()
            if rest.startswith(","):
                rest = rest[1:]
                continue
            if rest.startswith("]"):
                break
            raise ValueSyntaxError(f"expected ',' or ']' at {rest[:20]!r}")
        t = dtype(elems[0])
        if any(dtype(e) != t for e in elems):
            raise ValueSyntaxError("array elements have different types")
        return DArray(tuple(elems), t), rest[1:]
    t, rest = _parse_type(s)
    rest = rest.lstrip()
    tok = ""
    while rest and (rest[0].isalnum() or rest[0] in "@_-"):
        tok += rest[0]
        rest = rest[1:]
    try:
        if isinstance(t, IntT):
            return DInt(t.w, int(tok)), rest
        if isinstance(t, IPtrT):
            return DIPtr(int(tok)), rest
        if isinstance(t, PtrT):
            a, _, pr = tok.partition("@")
            return DAddr(Ptr(int(a), None if pr == "_" else int(pr))), rest
    except ValueError as e:
        raise ValueSyntaxError(f"bad {t} literal {tok!r}: {e}") from None
    raise ValueSyntaxError(f"no literal syntax for {t}")
