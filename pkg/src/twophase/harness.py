"""Seeded random programs, a greedy shrinker and differential campaigns."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

from .core import EnumerationError
from .interp import RunConfig
from .ir import Program, parse, pretty, validate
from .refinement import check_exec_sound, check_inf_fin
from .values import DEFAULT_BOUNDS, EnumBounds, Mode

INT_TYPES = ("i8", "i16", "i32", "i64")
SLOT_TYPES = ("i8", "i16", "i32", "i64", "iptr")
SIZES = {"i8": 1, "i16": 2, "i32": 4, "i64": 8, "iptr": 8, "ptr": 8}


@dataclass
class _Slot:
    reg: str
    t: str
    reusable: bool = True


class _Gen:
    """Emits one program as text, tracking which registers are safe to use."""

    def __init__(self, seed: int, size: int):
        self.r = random.Random(seed)
        self.size = size
        self.lines: list[str] = []
        self.n = 0
        self.ints: dict[str, list[str]] = {t: [] for t in INT_TYPES}
        self.iptrs: list[str] = []
        self.slots: list[_Slot] = []
        self.heap: list[str] = []
        self.undef_budget = 2
        self.wide_undef_used = False
        self.helper = False
        self.label_id = 0

    def fresh(self, base: str = "v") -> str:
        self.n += 1
        return f"{base}{self.n}"

    def emit(self, s: str):
        self.lines.append("  " + s)

    def const(self, t: str) -> str:
        if t == "iptr":
            return str(self.r.randint(0, 64))
        hi = {"i8": 255, "i16": 65535}.get(t, 100000)
        return str(self.r.choice([0, 1, 2, 3, 7, 42, hi, self.r.randint(0, hi)]))

    def value(self, t: str) -> str:
        pool = self.iptrs if t == "iptr" else self.ints[t]
        if pool and self.r.random() < 0.7:
            return "%" + self.r.choice(pool)
        return self.const(t)

    def add_int(self, t: str, reg: str):
        (self.iptrs if t == "iptr" else self.ints[t]).append(reg)

    # actions
    def act_alloca(self):
        t = self.r.choice(SLOT_TYPES)
        p = self.fresh("p")
        self.emit(f"%{p} = alloca {t}")
        self.emit(f"store {t} {self.value(t)}, ptr %{p}")
        self.slots.append(_Slot(p, t))

    def usable_slots(self):
        return [s for s in self.slots if s.reusable]

    def act_load(self):
        slots = self.usable_slots()
        if not slots:
            return self.act_alloca()
        s = self.r.choice(slots)
        v = self.fresh()
        self.emit(f"%{v} = load {s.t}, ptr %{s.reg}")
        self.add_int(s.t, v)

    def act_store(self):
        slots = self.usable_slots()
        if not slots:
            return self.act_alloca()
        s = self.r.choice(slots)
        self.emit(f"store {s.t} {self.value(s.t)}, ptr %{s.reg}")

    def act_gep(self):
        slots = [s for s in self.usable_slots() if SIZES[s.t] > 1]
        if not slots:
            return self.act_alloca()
        s = self.r.choice(slots)
        k = self.r.randrange(SIZES[s.t])
        q, v = self.fresh("q"), self.fresh()
        self.emit(f"%{q} = getelementptr i8, ptr %{s.reg}, i64 {k}")
        self.emit(f"%{v} = load i8, ptr %{q}")
        self.add_int("i8", v)

    def act_casts(self):
        slots = self.usable_slots()
        if not slots:
            return self.act_alloca()
        s = self.r.choice(slots)
        i = self.fresh("a")
        self.emit(f"%{i} = ptrtoint ptr %{s.reg} to iptr")
        self.iptrs.append(i)
        if self.r.random() < 0.6:
            j, q = self.fresh("a"), self.fresh("q")
            off = self.r.randrange(SIZES[s.t])
            self.emit(f"%{j} = add iptr %{i}, {off}")
            self.emit(f"%{q} = inttoptr iptr %{j} to ptr")
            if off == 0:
                self.slots.append(_Slot(q, s.t))
            else:
                v = self.fresh()
                self.emit(f"%{v} = load i8, ptr %{q}")
                self.add_int("i8", v)

    def act_iptr_arith(self):
        if not self.iptrs:
            return self.act_casts()
        op = self.r.choice(["add", "add", "sub", "mul", "and", "or", "xor", "udiv", "lshr"])
        a = "%" + self.r.choice(self.iptrs)
        b = self.value("iptr")
        v = self.fresh("a")
        self.emit(f"%{v} = {op} iptr {a}, {b}")
        self.iptrs.append(v)

    def act_int_arith(self):
        t = self.r.choice(INT_TYPES)
        op = self.r.choice(["add", "sub", "mul", "and", "or", "xor", "shl", "lshr", "udiv"])
        v = self.fresh()
        b = self.value(t)
        if op == "udiv" and self.r.random() < 0.8:
            b = str(self.r.randint(1, 9))
        if op in ("shl", "lshr") and self.r.random() < 0.8:
            b = str(self.r.randrange(8))
        self.emit(f"%{v} = {op} {t} {self.value(t)}, {b}")
        self.add_int(t, v)

    def act_convert(self):
        t = self.r.choice(INT_TYPES)
        if not self.ints[t]:
            return self.act_int_arith()
        src = "%" + self.r.choice(self.ints[t])
        kind = self.r.choice(["trunc", "zext", "zext_iptr"])
        v = self.fresh()
        if kind == "zext_iptr":
            self.emit(f"%{v} = zext {t} {src} to iptr")
            self.iptrs.append(v)
            return
        wider = [u for u in INT_TYPES if SIZES[u] > SIZES[t]]
        narrower = [u for u in INT_TYPES if SIZES[u] < SIZES[t]]
        if kind == "trunc" and narrower:
            u = self.r.choice(narrower)
            self.emit(f"%{v} = trunc {t} {src} to {u}")
        elif wider:
            u = self.r.choice(wider)
            self.emit(f"%{v} = zext {t} {src} to {u}")
        else:
            u = "i8"
            self.emit(f"%{v} = trunc {t} {src} to i8")
        self.add_int(u, v)

    def act_select(self):
        t = self.r.choice(INT_TYPES)
        c, v = self.fresh("c"), self.fresh()
        pred = self.r.choice(["eq", "ne", "ult", "ule"])
        self.emit(f"%{c} = icmp {pred} {t} {self.value(t)}, {self.value(t)}")
        self.emit(f"%{v} = select i1 %{c}, {t} {self.value(t)}, {t} {self.value(t)}")
        self.add_int(t, v)

    def act_undef(self):
        if self.undef_budget <= 0:
            return self.act_select()
        self.undef_budget -= 1
        t = self.r.choice(["i16", "i32"])
        x, p, v = self.fresh("u"), self.fresh("p"), self.fresh()
        self.emit(f"%{x} = select i1 undef, {t} {self.const(t)}, {t} {self.const(t)}")
        self.emit(f"%{p} = alloca {t}")
        self.emit(f"store {t} %{x}, ptr %{p}")
        if self.r.random() < 0.5:
            q = self.fresh("q")
            self.emit(f"%{q} = getelementptr i8, ptr %{p}, i64 1")
            self.emit(f"store i8 {self.const('i8')}, ptr %{q}")
        self.emit(f"%{v} = load {t}, ptr %{p}")
        self.emit(f"call void @print_{t}({t} %{v})")
        self.slots.append(_Slot(p, t, reusable=False))

    def act_wide_undef(self):
        if self.wide_undef_used:
            return self.act_undef()
        self.wide_undef_used = True
        v = self.fresh("u")
        self.emit(f"%{v} = {self.r.choice(['add', 'mul', 'and', 'xor'])} i8 undef, {self.const('i8')}")
        self.emit(f"call void @print_i8(i8 %{v})")

    def act_malloc(self):
        n = self.r.randint(1, 4)
        p = self.fresh("m")
        self.emit(f"%{p} = call ptr @malloc(i8, i64 {n})")
        self.emit(f"store i8 {self.value('i8')}, ptr %{p}")
        v = self.fresh()
        self.emit(f"%{v} = load i8, ptr %{p}")
        self.add_int("i8", v)
        if self.r.random() < 0.6:
            self.emit(f"call void @free(ptr %{p})")
            if self.r.random() < 0.15:
                # occasionally touch the freed block
                w = self.fresh()
                self.emit(f"%{w} = load i8, ptr %{p}")
        else:
            self.slots.append(_Slot(p, "i8"))

    def act_call(self):
        self.helper = True
        v = self.fresh()
        self.emit(f"%{v} = call i32 @helper(i32 {self.value('i32')})")
        self.add_int("i32", v)

    def act_diamond(self):
        self.label_id += 1
        k = self.label_id
        t = self.r.choice(INT_TYPES)
        c = self.fresh("c")
        if self.undef_budget > 0 and self.r.random() < 0.25:
            self.undef_budget -= 1
            cond = "undef"
        else:
            self.emit(f"%{c} = icmp ult {t} {self.value(t)}, {self.value(t)}")
            cond = f"%{c}"
        x, y, z = self.fresh(), self.fresh(), self.fresh()
        self.emit(f"br i1 {cond}, label %then{k}, label %else{k}")
        self.lines.append(f"then{k}:")
        self.emit(f"%{x} = add {t} {self.value(t)}, {self.const(t)}")
        self.emit(f"call void @print_{t}({t} %{x})")
        self.emit(f"br label %join{k}")
        self.lines.append(f"else{k}:")
        self.emit(f"%{y} = xor {t} {self.value(t)}, {self.const(t)}")
        self.emit(f"br label %join{k}")
        self.lines.append(f"join{k}:")
        self.emit(f"%{z} = phi {t} [%{x}, %then{k}], [%{y}, %else{k}]")
        self.add_int(t, z)

    ACTIONS = [
        ("act_alloca", 4),
        ("act_load", 4),
        ("act_store", 3),
        ("act_gep", 3),
        ("act_casts", 4),
        ("act_iptr_arith", 4),
        ("act_int_arith", 3),
        ("act_convert", 2),
        ("act_select", 2),
        ("act_undef", 1),
        ("act_wide_undef", 1),
        ("act_malloc", 3),
        ("act_call", 1),
        ("act_diamond", 1),
    ]

    def program(self) -> str:
        names = [a for a, _ in self.ACTIONS]
        weights = [w for _, w in self.ACTIONS]
        self.lines = ["define void @main() {", "entry:"]
        for _ in range(self.size):
            getattr(self, self.r.choices(names, weights)[0])()
        if self.size:
            live = [(t, v) for t in INT_TYPES for v in self.ints[t]] + [("iptr", v) for v in self.iptrs]
            self.r.shuffle(live)
            for t, v in live[: self.r.randint(1, 3)]:
                self.emit(f"call void @print_{t}({t} %{v})")
            if not live:
                self.emit("call void @print_i32(i32 0)")
        self.emit("ret void")
        self.lines.append("}")
        text = "\n".join(self.lines)
        if self.helper:
            text = _HELPER + "\n" + text
        return text + "\n"


_HELPER = """define i32 @helper(i32 %x) {
entry:
  %p = alloca i32
  store i32 %x, ptr %p
  %q = getelementptr i8, ptr %p, i64 1
  %b = load i8, ptr %q
  %w = zext i8 %b to i32
  %y = add i32 %x, %w
  ret i32 %y
}
"""


def gen_text(seed: int, size: int) -> str:
    return _Gen(seed, size).program()


def gen_program(seed: int, size: int) -> Program:
    """A statically valid random program, deterministic in ``(seed, size)``."""
    return parse(gen_text(seed, size))


# -- shrinking ----------------------------------------------------------------------


def _removals(p: Program):
    for fi, f in enumerate(p.functions):
        for bi, b in enumerate(f.blocks):
            for ii in range(len(b.instrs)):
                blk = replace(b, instrs=b.instrs[:ii] + b.instrs[ii + 1:])
                fn = replace(f, blocks=f.blocks[:bi] + (blk,) + f.blocks[bi + 1:])
                yield replace(p, functions=p.functions[:fi] + (fn,) + p.functions[fi + 1:])


def shrink(p: Program, fails: Callable[[Program], bool], max_rounds: int = 200) -> Program:
    """Drop instructions one at a time while the program stays valid and failing."""
    for _ in range(max_rounds):
        for cand in _removals(p):
            if validate(cand):
                continue
            try:
                still = fails(cand)
            except EnumerationError:
                still = False
            if still:
                p = cand
                break
        else:
            return p
    return p


# -- campaigns ----------------------------------------------------------------------

CAMPAIGNS = ("exec-vs-spec", "inf-vs-fin")


@dataclass
class CaseResult:
    seed: int
    size: int
    verdict: str
    witness_file: Optional[str] = None
    witness: Optional[Program] = None

    def line(self) -> str:
        return f"seed={self.seed} verdict={self.verdict} witness_file={self.witness_file or '-'}"


@dataclass
class FuzzReport:
    campaign: str
    cases: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [c for c in self.cases if c.verdict == "fail"]

    def count(self, verdict: str) -> int:
        return sum(1 for c in self.cases if c.verdict == verdict)

    def lines(self) -> list[str]:
        out = [c.line() for c in self.cases]
        out.append(
            f"campaign={self.campaign} cases={len(self.cases)} pass={self.count('pass')} "
            f"fail={self.count('fail')} skip={self.count('skip')}"
        )
        return out


def campaign_check(campaign: str, bounds: EnumBounds, addr_bits: int = 4, fuel: int = 10**4):
    """The pass/fail predicate of one campaign, as ``Program -> bool`` (True = passes)."""
    if campaign == "exec-vs-spec":
        cfg = RunConfig(mode=Mode.inf(), fuel=fuel)
        return lambda p: check_exec_sound(p, cfg, bounds).verdict
    if campaign == "inf-vs-fin":
        return lambda p: check_inf_fin(p, addr_bits, bounds, fuel).verdict
    raise ValueError(f"unknown campaign {campaign!r}; expected one of {CAMPAIGNS}")


def case_seeds(seed: int, n: int) -> list[int]:
    r = random.Random(seed)
    return [r.getrandbits(64) for _ in range(n)]


def fuzz_diff(
    campaign: str,
    n: int,
    seed: int = 0,
    bounds: EnumBounds = DEFAULT_BOUNDS,
    addr_bits: int = 4,
    max_size: int = 12,
    out_dir: str | Path | None = None,
    fuel: int = 10**4,
) -> FuzzReport:
    check = campaign_check(campaign, bounds, addr_bits, fuel)
    report = FuzzReport(campaign)
    for i, s in enumerate(case_seeds(seed, n)):
        size = 1 + s % max_size
        prog = gen_program(s, size)
        try:
            ok = check(prog)
        except EnumerationError:
            report.cases.append(CaseResult(s, size, "skip"))
            continue
        if ok:
            report.cases.append(CaseResult(s, size, "pass"))
            continue
        witness = shrink(prog, lambda p: not check(p))
        path = None
        if out_dir is not None:
            d = Path(out_dir)
            d.mkdir(parents=True, exist_ok=True)
            path = str(d / f"witness_{s}.ll")
            Path(path).write_text(pretty(witness))
        report.cases.append(CaseResult(s, size, "fail", path, witness))
    return report
