"""Event-traced evaluator for the IR, plus an exhaustive behavior enumerator.

Registers hold under-defined values. Operations over fully defined operands
are evaluated on the spot; anything touching ``undef`` stays symbolic until a
forcing point (branch condition, memory address, print argument, pointer
conversion, gep operand, malloc count, returned value) concretizes it.

``run`` resolves every choice deterministically. ``enumerate_behaviors``
re-executes the program once per sequence of choices and collects the set of
distinct executions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import memexec, memspec
from .core import OOM, UB, EnumerationError, Fail, Ok, Outcome, Ptr, addr_add
from .ir import (
    Alloca,
    Bin,
    Br,
    Call,
    Const,
    Conv,
    Function,
    Gep,
    ICmp,
    Load,
    PoisonC,
    Program,
    Reg,
    Ret,
    Select,
    Store,
    UndefC,
    Unreachable,
    is_print,
    validate,
)
from .values import (
    DEFAULT_BOUNDS,
    INF,
    ArrayT,
    BinOpU,
    ConvKind,
    ConvU,
    DAddr,
    DInt,
    DIPtr,
    DNone,
    DPoison,
    DValue,
    EnumBounds,
    ICmpU,
    IntT,
    IPtrT,
    Lift,
    Mode,
    PtrT,
    SelectU,
    Undef,
    UValue,
    address_from_int,
    check_in_mode,
    concretize,
    concretize_default,
    contains_poison,
    deserialize,
    dint,
    dtype,
    eval_binop,
    eval_conv,
    eval_icmp,
    eval_select,
    outcome_key,
    render,
    serialize,
    sizeof,
    utype,
)

# -- executions -----------------------------------------------------------------


@dataclass(frozen=True)
class Print:
    value: DValue

    def __str__(self):
        return f"print {render(self.value)}"


@dataclass(frozen=True)
class Returned:
    value: DValue = DNone()

    def __str__(self):
        return f"ret {render(self.value)}"


@dataclass(frozen=True)
class UBStop:
    msg: str = field(default="", compare=False)

    def __str__(self):
        return f"UB: {self.msg}"


@dataclass(frozen=True)
class OOMStop:
    msg: str = field(default="", compare=False)

    def __str__(self):
        return f"OOM: {self.msg}"


@dataclass(frozen=True)
class FailStop:
    msg: str = field(default="", compare=False)

    def __str__(self):
        return f"FAIL: {self.msg}"


@dataclass(frozen=True)
class FuelExhausted:
    def __str__(self):
        return "FUEL"


@dataclass(frozen=True)
class Execution:
    trace: tuple
    outcome: object
    # final memory, kept for inspection only; equality ignores it
    conf: object = field(default=None, compare=False, repr=False)

    def lines(self) -> list[str]:
        return [str(e) for e in self.trace] + [str(self.outcome)]

    def __str__(self):
        return "\n".join(self.lines())


def execution_key(ex: Execution) -> tuple:
    return (tuple(str(e) for e in ex.trace), type(ex.outcome).__name__, str(ex.outcome))


def stop_for(o: Outcome):
    if isinstance(o, UB):
        return UBStop(o.msg)
    if isinstance(o, OOM):
        return OOMStop(o.msg)
    return FailStop(getattr(o, "msg", str(o)))


# -- configuration ----------------------------------------------------------------

POLICIES = ("default", "enumerate", "random")


@dataclass(frozen=True)
class RunConfig:
    mode: Mode = INF
    fuel: int = 10**6
    undef_policy: str = "default"
    seed: int = 0
    max_depth: int = 200
    # largest single allocation the interpreter will build in the infinite model
    max_alloc_bytes: int = 1 << 20

    def __post_init__(self):
        if self.undef_policy not in POLICIES:
            raise ValueError(f"undef_policy must be one of {POLICIES}")


class _Stop(Exception):
    def __init__(self, outcome):
        self.outcome = outcome


# -- choice resolution --------------------------------------------------------------


class _Default:
    """Deterministic choices: undef reads as zero, the executable allocator places."""

    enum_alloc = False
    spec_oom = False

    def force(self, mode: Mode, uv: UValue) -> Outcome:
        return concretize_default(mode, uv)

    def pick(self, options: list):
        return options[0]


class _Random(_Default):
    def __init__(self, seed: int, bounds: EnumBounds):
        self.rng = random.Random(seed)
        self.bounds = EnumBounds(**{**bounds.__dict__, "sample_wide": True})

    def force(self, mode, uv):
        opts = sorted(concretize(mode, uv, self.bounds), key=outcome_key)
        return self.rng.choice(opts)


class _Replay:
    """Follows a prefix of choice indices, then always takes the first option."""

    def __init__(self, prefix: tuple, bounds: EnumBounds):
        self.prefix = prefix
        self.bounds = bounds
        self.enum_alloc = bounds.enum_alloc
        self.spec_oom = bounds.spec_oom
        self.taken: list[int] = []
        self.counts: list[int] = []

    def pick(self, options: list):
        d = len(self.taken)
        i = self.prefix[d] if d < len(self.prefix) else 0
        self.taken.append(i)
        self.counts.append(len(options))
        return options[i]

    def force(self, mode, uv):
        if isinstance(uv, Lift):
            return Ok(None, uv.dv)
        opts = sorted(concretize(mode, uv, self.bounds), key=outcome_key)
        return self.pick(opts) if len(opts) > 1 else opts[0]


# -- the machine ------------------------------------------------------------------


class _Machine:
    def __init__(self, prog: Program, cfg: RunConfig, chooser):
        self.prog = prog
        self.cfg = cfg
        self.mode = cfg.mode
        self.dom = cfg.mode.dom
        self.ch = chooser
        self.st = memexec.ExecState(dom=self.dom)
        self.trace: list = []
        self.steps = 0
        self.sid = 0
        self.depth = 0

    # helpers
    def stop(self, o):
        raise _Stop(stop_for(o) if isinstance(o, Outcome) else o)

    def tick(self):
        self.steps += 1
        if self.steps > self.cfg.fuel:
            raise _Stop(FuelExhausted())

    def fresh_sid(self) -> int:
        self.sid += 1
        return self.sid

    def mem(self, out: Outcome):
        if out.is_error:
            self.stop(out)
        self.st = out.conf
        return out.value

    def force(self, uv: UValue) -> DValue:
        o = self.ch.force(self.mode, uv)
        if o.is_error:
            self.stop(o)
        return o.value

    def force_ptr(self, uv: UValue, what: str) -> Ptr:
        dv = self.force(uv)
        if isinstance(dv, DPoison):
            self.stop(UB(f"{what} through a poison pointer"))
        if not isinstance(dv, DAddr):
            self.stop(Fail(f"{what} through a non-pointer {render(dv)}"))
        return dv.p

    def force_count(self, uv: UValue, what: str) -> int:
        dv = self.force(uv)
        if isinstance(dv, DPoison):
            self.stop(UB(f"poison {what}"))
        if not isinstance(dv, (DInt, DIPtr)):
            self.stop(Fail(f"{what} of type {dtype(dv)}"))
        return dv.v

    def operand(self, regs: dict, o, t) -> UValue:
        if isinstance(o, Reg):
            if o.name not in regs:
                self.stop(Fail(f"register %{o.name} read before it is assigned"))
            return regs[o.name]
        if isinstance(o, UndefC):
            return Undef(t)
        if isinstance(o, PoisonC):
            return Lift(DPoison(t))
        if isinstance(o, Const):
            if isinstance(t, IntT):
                return Lift(dint(t.w, o.v))
            if isinstance(t, IPtrT):
                r = check_in_mode(self.mode, DIPtr(o.v))
            elif isinstance(t, PtrT):
                r = address_from_int(self.mode, o.v)
            else:
                self.stop(Fail(f"no integer literal of type {t}"))
            if r.is_error:
                self.stop(r)
            return Lift(r.value)
        raise TypeError(f"not an operand: {o!r}")

    def fold(self, lazy: UValue, parts: tuple, compute) -> UValue:
        """Evaluate now when every part is defined, otherwise keep ``lazy``."""
        if all(isinstance(p, Lift) for p in parts):
            r = compute(*(p.dv for p in parts))
            if r.is_error:
                self.stop(r)
            return Lift(r.value)
        return lazy

    # allocation
    def allocate(self, op) -> Ptr:
        n = len(op.bytes)
        if isinstance(op, memspec.Alloca) and not self.st.conf.stack:
            self.stop(UB("alloca with no active frame"))
        if not self.ch.enum_alloc:
            run = memexec.alloca_run if isinstance(op, memspec.Alloca) else memexec.malloc_run
            return self.mem(run(self.st, op.bytes))
        opts = sorted(self.placements(op), key=lambda o: o.value.a)
        if self.ch.spec_oom or not opts:
            opts.append(OOM(f"no placement chosen for {n} bytes"))
        o = self.ch.pick(opts) if len(opts) > 1 else opts[0]
        if o.is_error:
            self.stop(o)
        self.st = memexec.ExecState(o.conf, self.st.next_prov + 1, self.dom)
        return o.value

    def placements(self, op) -> list:
        conf, b = self.st.conf, self.ch.bounds
        n = len(op.bytes)
        if self.dom.bits is not None and self.dom.bits <= b.max_addr_bits and n <= b.max_block:
            return [o for o in memspec.spec_enumerate(self.dom, op, conf, b.spec()) if isinstance(o, Ok)]
        # a window of low start addresses plus the executable placement
        starts = set(range(1 << b.inf_window_bits))
        top = memexec.max_plus_one(conf, n, self.dom)
        if not isinstance(top, OOM):
            starts.add(top)
        out = []
        for a in sorted(starts):
            o = memspec.place(self.dom, op, conf, a, self.st.next_prov)
            if o is not None:
                out.append(o)
        return out

    def initial_bytes(self, t) -> tuple:
        return serialize(Undef(t), t, self.fresh_sid())

    # execution
    def call(self, f: Function, args: list) -> UValue:
        if self.depth >= self.cfg.max_depth:
            raise _Stop(FuelExhausted())
        self.depth += 1
        self.mem(memexec.pushf_run(self.st))
        regs = {name: v for (_, name), v in zip(f.params, args)}
        result = self.body(f, regs)
        self.mem(memexec.popf_run(self.st))
        self.depth -= 1
        return result

    def body(self, f: Function, regs: dict) -> UValue:
        blk, prev = f.entry, None
        while True:
            if blk.phis:
                if prev is None:
                    self.stop(Fail(f"phi in entry block of @{f.name}"))
                vals = {}
                for phi in blk.phis:
                    self.tick()
                    src = [v for v, lbl in phi.incoming if lbl == prev]
                    if not src:
                        self.stop(Fail(f"phi %{phi.dst} has no entry for block {prev}"))
                    vals[phi.dst] = self.operand(regs, src[0], phi.t)
                regs.update(vals)
            for ins in blk.instrs:
                self.tick()
                self.step(ins, regs)
            self.tick()
            term = blk.term
            if isinstance(term, Ret):
                if term.val is None:
                    return Lift(DNone())
                return self.operand(regs, term.val, term.t)
            if isinstance(term, Unreachable):
                self.stop(UB(f"reached unreachable in @{f.name}"))
            if isinstance(term, Br):
                target = term.target
            else:
                c = self.force(self.operand(regs, term.c, IntT(1)))
                if isinstance(c, DPoison):
                    self.stop(UB("branch on poison"))
                if not isinstance(c, DInt) or c.w != 1:
                    self.stop(Fail(f"branch condition of type {dtype(c)}"))
                target = term.then if c.v else term.other
            prev, blk = blk.label, f.block(target)

    def step(self, ins, regs: dict):
        mode = self.mode
        if isinstance(ins, Bin):
            a, b = self.operand(regs, ins.a, ins.t), self.operand(regs, ins.b, ins.t)
            regs[ins.dst] = self.fold(BinOpU(ins.op, a, b), (a, b), lambda x, y: eval_binop(mode, ins.op, x, y))
        elif isinstance(ins, ICmp):
            a, b = self.operand(regs, ins.a, ins.t), self.operand(regs, ins.b, ins.t)
            regs[ins.dst] = self.fold(ICmpU(ins.pred, a, b), (a, b), lambda x, y: eval_icmp(mode, ins.pred, x, y))
        elif isinstance(ins, Select):
            c = self.operand(regs, ins.c, IntT(1))
            a, b = self.operand(regs, ins.a, ins.t), self.operand(regs, ins.b, ins.t)
            if isinstance(c, Lift) and isinstance(c.dv, DInt) and utype(a) == utype(b):
                regs[ins.dst] = a if c.dv.v else b
            else:
                regs[ins.dst] = self.fold(SelectU(c, a, b), (c, a, b), lambda x, y, z: eval_select(mode, x, y, z))
        elif isinstance(ins, Conv):
            v = self.operand(regs, ins.v, ins.src_t)
            if ins.kind is ConvKind.INTTOPTR:
                v = Lift(self.force(v))
            regs[ins.dst] = self.fold(ConvU(ins.kind, v, ins.t), (v,), lambda x: eval_conv(mode, ins.kind, x, ins.t))
        elif isinstance(ins, Alloca):
            p = self.allocate(memspec.Alloca(self.initial_bytes(ins.t)))
            regs[ins.dst] = Lift(DAddr(p))
        elif isinstance(ins, Load):
            p = self.force_ptr(self.operand(regs, ins.ptr, PtrT()), "load")
            bs = []
            for i in range(sizeof(ins.t)):
                bs.append(self.mem(memexec.read_byte_run(self.st, self.byte_ptr(p, i))))
            regs[ins.dst] = deserialize(bs, ins.t)
        elif isinstance(ins, Store):
            v = self.operand(regs, ins.val, ins.t)
            if utype(v) != ins.t:
                self.stop(Fail(f"store of a {utype(v)} value at type {ins.t}"))
            p = self.force_ptr(self.operand(regs, ins.ptr, PtrT()), "store")
            for i, b in enumerate(serialize(v, ins.t, self.fresh_sid())):
                self.mem(memexec.write_byte_run(self.st, self.byte_ptr(p, i), b))
        elif isinstance(ins, Gep):
            p = self.force_ptr(self.operand(regs, ins.base, PtrT()), "getelementptr")
            k = self.force_count(self.operand(regs, ins.idx, ins.idx_t), "getelementptr index")
            a = addr_add(self.dom, p.a, k * sizeof(ins.elem)) if k >= 0 else p.a + k * sizeof(ins.elem)
            if isinstance(a, OOM):
                self.stop(a)
            if a < 0:
                self.stop(UB(f"getelementptr below address zero ({a})"))
            regs[ins.dst] = Lift(DAddr(Ptr(a, p.pr)))
        elif isinstance(ins, Call):
            self.do_call(ins, regs)
        else:
            self.stop(Fail(f"unsupported instruction {type(ins).__name__}"))

    def byte_ptr(self, p: Ptr, i: int) -> Ptr:
        a = addr_add(self.dom, p.a, i)
        if isinstance(a, OOM):
            self.stop(a)
        return Ptr(a, p.pr)

    def do_call(self, ins: Call, regs: dict):
        if is_print(ins.fn):
            t, o = ins.args[0]
            dv = self.force(self.operand(regs, o, t))
            if contains_poison(dv):
                self.stop(UB("print of poison"))
            self.trace.append(Print(dv))
            return
        if ins.fn == "malloc":
            elem = ins.args[0][0]
            t, o = ins.args[1]
            n = self.force_count(self.operand(regs, o, t), "malloc count")
            total = n * sizeof(elem)
            if self.dom.bits is not None and total > self.dom.size:
                self.stop(OOM(f"malloc of {total} bytes exceeds {self.dom}"))
            if total > self.cfg.max_alloc_bytes:
                self.stop(Fail(f"malloc of {total} bytes is beyond this interpreter"))
            at = ArrayT(n, elem)
            p = self.allocate(memspec.Malloc(self.initial_bytes(at)))
            regs[ins.dst] = Lift(DAddr(p))
            return
        if ins.fn == "free":
            t, o = ins.args[0]
            p = self.force_ptr(self.operand(regs, o, t), "free")
            self.mem(memexec.free_run(self.st, p))
            return
        callee = self.prog.func(ins.fn)
        args = [self.operand(regs, o, t) for t, o in ins.args]
        r = self.call(callee, args)
        if ins.dst is not None:
            regs[ins.dst] = r

    def main(self) -> Execution:
        try:
            problems = validate(self.prog)
            if problems:
                raise _Stop(FailStop("; ".join(problems)))
            f = self.prog.entry
            if f.params:
                raise _Stop(FailStop(f"entry function @{f.name} takes parameters"))
            r = self.call(f, [])
            dv = self.force(r)
            if contains_poison(dv):
                self.stop(UB("returned poison"))
            outcome = Returned(dv)
        except _Stop as s:
            outcome = s.outcome
        return Execution(tuple(self.trace), outcome, self.st.conf)


def run(prog: Program, cfg: RunConfig = RunConfig(), bounds: EnumBounds = DEFAULT_BOUNDS) -> Execution:
    """One deterministic execution under ``cfg.undef_policy``."""
    if cfg.undef_policy == "enumerate":
        raise ValueError("use enumerate_behaviors for the enumerate policy")
    chooser = _Random(cfg.seed, bounds) if cfg.undef_policy == "random" else _Default()
    return _Machine(prog, cfg, chooser).main()


def enumerate_behaviors(prog: Program, cfg: RunConfig = RunConfig(), bounds: EnumBounds = DEFAULT_BOUNDS) -> frozenset:
    """Every distinct execution reachable by some resolution of the choice points."""
    results = set()
    pending = [()]
    paths = 0
    while pending:
        prefix = pending.pop()
        paths += 1
        if paths > bounds.max_paths:
            raise EnumerationError(f"more than {bounds.max_paths} execution paths")
        ch = _Replay(prefix, bounds)
        results.add(_Machine(prog, cfg, ch).main())
        for d in range(len(prefix), len(ch.counts)):
            for alt in range(ch.counts[d] - 1, 0, -1):
                pending.append(tuple(ch.taken[:d]) + (alt,))
    return frozenset(results)


def sorted_executions(exs) -> list:
    return sorted(exs, key=execution_key)
