"""A small LLVM-like IR: syntax tree, parser, printer and static checks.

Supported forms::

    define <ty> @name(<ty> %a, ...) {
    label:
      %r = add|sub|mul|udiv|and|or|xor|shl|lshr <ty> <op>, <op>
      %r = icmp eq|ne|ult|ule <ty> <op>, <op>
      %r = select i1 <op>, <ty> <op>, <ty> <op>
      %r = alloca <ty>
      %r = load <ty>, ptr <op>
      store <ty> <op>, ptr <op>
      %r = ptrtoint|inttoptr|trunc|zext <ty> <op> to <ty>
      %r = getelementptr <ty>, ptr <op>, <ty> <op>
      %r = phi <ty> [<op>, %label], ...
      [%r =] call <ty> @f(<ty> <op>, ...)
      ret <ty> [<op>] | br label %l | br i1 <op>, label %a, label %b | unreachable
    }

Intrinsics are ``@print_*(ty v)``, ``@malloc(ty, <ty> n)`` and ``@free(ptr p)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .values import (
    ArrayT,
    BinOp,
    ConvKind,
    ICmpPred,
    IntT,
    IPTR,
    PTR,
    VOID,
    VType,
)

# -- syntax tree ------------------------------------------------------------------


@dataclass(frozen=True)
class Reg:
    name: str

    def __str__(self):
        return f"%{self.name}"


@dataclass(frozen=True)
class Const:
    v: int

    def __str__(self):
        return str(self.v)


@dataclass(frozen=True)
class UndefC:
    def __str__(self):
        return "undef"


@dataclass(frozen=True)
class PoisonC:
    def __str__(self):
        return "poison"


Operand = Union[Reg, Const, UndefC, PoisonC]


@dataclass(frozen=True)
class Bin:
    dst: str
    op: BinOp
    t: VType
    a: Operand
    b: Operand


@dataclass(frozen=True)
class ICmp:
    dst: str
    pred: ICmpPred
    t: VType
    a: Operand
    b: Operand


@dataclass(frozen=True)
class Select:
    dst: str
    c: Operand
    t: VType
    a: Operand
    b: Operand


@dataclass(frozen=True)
class Alloca:
    dst: str
    t: VType


@dataclass(frozen=True)
class Load:
    dst: str
    t: VType
    ptr: Operand


@dataclass(frozen=True)
class Store:
    t: VType
    val: Operand
    ptr: Operand


@dataclass(frozen=True)
class Conv:
    dst: str
    kind: ConvKind
    src_t: VType
    v: Operand
    t: VType


@dataclass(frozen=True)
class Gep:
    dst: str
    elem: VType
    base: Operand
    idx_t: VType
    idx: Operand


@dataclass(frozen=True)
class Phi:
    dst: str
    t: VType
    incoming: tuple  # of (Operand, label)


@dataclass(frozen=True)
class Call:
    dst: Optional[str]
    ret_t: VType
    fn: str
    args: tuple  # of (VType, Operand); malloc's first entry is (VType, None)


@dataclass(frozen=True)
class Ret:
    t: VType
    val: Optional[Operand]


@dataclass(frozen=True)
class Br:
    target: str


@dataclass(frozen=True)
class CondBr:
    c: Operand
    then: str
    other: str


@dataclass(frozen=True)
class Unreachable:
    pass


Instr = Union[Bin, ICmp, Select, Alloca, Load, Store, Conv, Gep, Call]
Terminator = Union[Ret, Br, CondBr, Unreachable]


@dataclass(frozen=True)
class Block:
    label: str
    phis: tuple
    instrs: tuple
    term: Terminator


@dataclass(frozen=True)
class Function:
    name: str
    ret_t: VType
    params: tuple  # of (VType, name)
    blocks: tuple

    @property
    def entry(self) -> Block:
        return self.blocks[0]

    def block(self, label: str) -> Optional[Block]:
        for b in self.blocks:
            if b.label == label:
                return b
        return None


@dataclass(frozen=True)
class Program:
    functions: tuple

    def func(self, name: str) -> Optional[Function]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    @property
    def entry(self) -> Optional[Function]:
        return self.func("main") or (self.functions[0] if self.functions else None)


INTRINSICS = ("malloc", "free")


def is_print(fn: str) -> bool:
    return fn.startswith("print_")


def defined_reg(ins) -> Optional[str]:
    return getattr(ins, "dst", None)


def operands(ins) -> list:
    """Operands read by an instruction, phi or terminator."""
    if isinstance(ins, (Bin, ICmp)):
        return [ins.a, ins.b]
    if isinstance(ins, Select):
        return [ins.c, ins.a, ins.b]
    if isinstance(ins, Load):
        return [ins.ptr]
    if isinstance(ins, Store):
        return [ins.val, ins.ptr]
    if isinstance(ins, Conv):
        return [ins.v]
    if isinstance(ins, Gep):
        return [ins.base, ins.idx]
    if isinstance(ins, Phi):
        return [v for v, _ in ins.incoming]
    if isinstance(ins, Call):
        return [v for _, v in ins.args if v is not None]
    if isinstance(ins, Ret):
        return [ins.val] if ins.val is not None else []
    if isinstance(ins, CondBr):
        return [ins.c]
    return []


def uses(f: Function, reg: str) -> int:
    n = 0
    for b in f.blocks:
        for ins in (*b.phis, *b.instrs, b.term):
            n += sum(1 for o in operands(ins) if o == Reg(reg))
    return n


# -- printing ---------------------------------------------------------------------


def _call_args(c: Call) -> str:
    parts = []
    for t, v in c.args:
        parts.append(str(t) if v is None else f"{t} {v}")
    return ", ".join(parts)


def pretty_instr(ins) -> str:
    if isinstance(ins, Bin):
        return f"%{ins.dst} = {ins.op.value} {ins.t} {ins.a}, {ins.b}"
    if isinstance(ins, ICmp):
        return f"%{ins.dst} = icmp {ins.pred.value} {ins.t} {ins.a}, {ins.b}"
    if isinstance(ins, Select):
        return f"%{ins.dst} = select i1 {ins.c}, {ins.t} {ins.a}, {ins.t} {ins.b}"
    if isinstance(ins, Alloca):
        return f"%{ins.dst} = alloca {ins.t}"
    if isinstance(ins, Load):
        return f"%{ins.dst} = load {ins.t}, ptr {ins.ptr}"
    if isinstance(ins, Store):
        return f"store {ins.t} {ins.val}, ptr {ins.ptr}"
    if isinstance(ins, Conv):
        return f"%{ins.dst} = {ins.kind.value} {ins.src_t} {ins.v} to {ins.t}"
    if isinstance(ins, Gep):
        return f"%{ins.dst} = getelementptr {ins.elem}, ptr {ins.base}, {ins.idx_t} {ins.idx}"
    if isinstance(ins, Phi):
        inc = ", ".join(f"[{v}, %{lbl}]" for v, lbl in ins.incoming)
        return f"%{ins.dst} = phi {ins.t} {inc}"
    if isinstance(ins, Call):
        lhs = f"%{ins.dst} = " if ins.dst is not None else ""
        return f"{lhs}call {ins.ret_t} @{ins.fn}({_call_args(ins)})"
    if isinstance(ins, Ret):
        return f"ret {ins.t}" if ins.val is None else f"ret {ins.t} {ins.val}"
    if isinstance(ins, Br):
        return f"br label %{ins.target}"
    if isinstance(ins, CondBr):
        return f"br i1 {ins.c}, label %{ins.then}, label %{ins.other}"
    if isinstance(ins, Unreachable):
        return "unreachable"
    raise TypeError(f"not an instruction: {ins!r}")


def pretty_function(f: Function) -> str:
    params = ", ".join(f"{t} %{n}" for t, n in f.params)
    lines = [f"define {f.ret_t} @{f.name}({params}) {{"]
    for b in f.blocks:
        lines.append(f"{b.label}:")
        for ins in (*b.phis, *b.instrs, b.term):
            lines.append("  " + pretty_instr(ins))
    lines.append("}")
    return "\n".join(lines)


def pretty(p: Program) -> str:
    return "\n\n".join(pretty_function(f) for f in p.functions) + "\n"


# -- parsing ----------------------------------------------------------------------


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>;[^\n]*)
  | (?P<local>%[A-Za-z0-9_.]+)
  | (?P<global>@[A-Za-z0-9_.]+)
  | (?P<int>-?[0-9]+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<punct>[=,()\[\]{}:])
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            toks.append(Tok(kind, s, line, pos - line_start + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


_BINOPS = {op.value: op for op in BinOp}
_PREDS = {p.value: p for p in ICmpPred}
_CONVS = {k.value: k for k in ConvKind}
_INT_TYPE = re.compile(r"i([0-9]+)$")


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def next(self) -> Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Tok:
        if self.tok.text != text:
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def accept(self, text: str) -> bool:
        if self.tok.text == text:
            self.i += 1
            return True
        return False

    def local(self) -> str:
        if self.tok.kind != "local":
            raise self.error(f"expected a %name, found {self.tok.text!r}")
        return self.next().text[1:]

    # grammar
    def program(self) -> Program:
        fns = []
        while self.tok.kind != "eof":
            fns.append(self.function())
        return Program(tuple(fns))

    def function(self) -> Function:
        self.expect("define")
        ret_t = self.type()
        if self.tok.kind != "global":
            raise self.error("expected a function name")
        name = self.next().text[1:]
        self.expect("(")
        params = []
        if not self.accept(")"):
            while True:
                t = self.type()
                params.append((t, self.local()))
                if self.accept(")"):
                    break
                self.expect(",")
        self.expect("{")
        blocks = []
        label = "entry"
        if self.tok.kind == "word" and self.peek().text == ":":
            label = self.next().text
            self.next()
        while True:
            blocks.append(self.block(label))
            if self.accept("}"):
                break
            if self.tok.kind == "word" and self.peek().text == ":":
                label = self.next().text
                self.next()
            else:
                raise self.error("expected a block label after a terminator")
        return Function(name, ret_t, tuple(params), tuple(blocks))

    def block(self, label: str) -> Block:
        phis, instrs = [], []
        while True:
            t = self.tok
            if t.kind == "eof" or t.text == "}":
                raise self.error(f"block {label!r} has no terminator")
            if t.text in ("ret", "br", "unreachable"):
                return Block(label, tuple(phis), tuple(instrs), self.terminator())
            ins = self.instr()
            if isinstance(ins, Phi):
                if instrs:
                    raise self.error("phi after a non-phi instruction", t)
                phis.append(ins)
            else:
                instrs.append(ins)

    def type(self) -> VType:
        t = self.tok
        if t.text == "[":
            self.next()
            if self.tok.kind != "int":
                raise self.error("expected an array length")
            n = int(self.next().text)
            if n < 0:
                raise self.error("negative array length")
            self.expect("x")
            elem = self.type()
            self.expect("]")
            return ArrayT(n, elem)
        if t.kind == "word":
            if t.text == "void":
                self.next()
                return VOID
            if t.text == "iptr":
                self.next()
                return IPTR
            if t.text == "ptr":
                self.next()
                return PTR
            m = _INT_TYPE.match(t.text)
            if m and int(m.group(1)) in (1, 8, 16, 32, 64):
                self.next()
                return IntT(int(m.group(1)))
        raise self.error(f"expected a type, found {t.text!r}")

    def operand(self) -> Operand:
        t = self.tok
        if t.kind == "local":
            return Reg(self.next().text[1:])
        if t.kind == "int":
            return Const(int(self.next().text))
        if t.text == "undef":
            self.next()
            return UndefC()
        if t.text == "poison":
            self.next()
            return PoisonC()
        if t.text in ("true", "false"):
            self.next()
            return Const(int(t.text == "true"))
        raise self.error(f"expected an operand, found {t.text!r}")

    def instr(self):
        t = self.tok
        if t.text == "store":
            self.next()
            ty = self.type()
            val = self.operand()
            self.expect(",")
            self.expect("ptr")
            return Store(ty, val, self.operand())
        if t.text == "call":
            return self.call(None)
        if t.kind != "local":
            raise self.error(f"unknown instruction {t.text!r}")
        dst = self.next().text[1:]
        self.expect("=")
        op = self.tok
        if op.kind != "word":
            raise self.error(f"expected an instruction name, found {op.text!r}")
        name = op.text
        if name == "call":
            return self.call(dst)
        self.next()
        if name in _BINOPS:
            ty = self.type()
            a = self.operand()
            self.expect(",")
            return Bin(dst, _BINOPS[name], ty, a, self.operand())
        if name == "icmp":
            if self.tok.text not in _PREDS:
                raise self.error(f"unknown icmp predicate {self.tok.text!r}")
            pred = _PREDS[self.next().text]
            ty = self.type()
            a = self.operand()
            self.expect(",")
            return ICmp(dst, pred, ty, a, self.operand())
        if name == "select":
            self.expect("i1")
            c = self.operand()
            self.expect(",")
            ty = self.type()
            a = self.operand()
            self.expect(",")
            ty2 = self.type()
            if ty2 != ty:
                raise self.error(f"select arms have types {ty} and {ty2}")
            return Select(dst, c, ty, a, self.operand())
        if name == "alloca":
            return Alloca(dst, self.type())
        if name == "load":
            ty = self.type()
            self.expect(",")
            self.expect("ptr")
            return Load(dst, ty, self.operand())
        if name in _CONVS:
            src = self.type()
            v = self.operand()
            self.expect("to")
            return Conv(dst, _CONVS[name], src, v, self.type())
        if name == "getelementptr":
            elem = self.type()
            self.expect(",")
            self.expect("ptr")
            base = self.operand()
            self.expect(",")
            it = self.type()
            return Gep(dst, elem, base, it, self.operand())
        if name == "phi":
            ty = self.type()
            inc = []
            while True:
                self.expect("[")
                v = self.operand()
                self.expect(",")
                lbl = self.local()
                self.expect("]")
                inc.append((v, lbl))
                if not self.accept(","):
                    break
            return Phi(dst, ty, tuple(inc))
        raise self.error(f"unknown instruction {name!r}", op)

    def call(self, dst: Optional[str]) -> Call:
        self.expect("call")
        ret_t = self.type()
        if self.tok.kind != "global":
            raise self.error("expected a callee name")
        fn = self.next().text[1:]
        self.expect("(")
        args = []
        if not self.accept(")"):
            first = True
            while True:
                ty = self.type()
                if fn == "malloc" and first:
                    args.append((ty, None))
                else:
                    args.append((ty, self.operand()))
                first = False
                if self.accept(")"):
                    break
                self.expect(",")
        return Call(dst, ret_t, fn, tuple(args))

    def terminator(self):
        t = self.next()
        if t.text == "unreachable":
            return Unreachable()
        if t.text == "ret":
            ty = self.type()
            if ty == VOID:
                return Ret(VOID, None)
            return Ret(ty, self.operand())
        if self.accept("label"):
            return Br(self.local())
        self.expect("i1")
        c = self.operand()
        self.expect(",")
        self.expect("label")
        a = self.local()
        self.expect(",")
        self.expect("label")
        return CondBr(c, a, self.local())


def parse(text: str) -> Program:
    return _Parser(text).program()


# -- static validation -------------------------------------------------------------


def validate(p: Program) -> list[str]:
    """Static problems that make a program unrunnable (empty when fine)."""
    problems = []
    if not p.functions:
        return ["program has no functions"]
    names = [f.name for f in p.functions]
    for n in set(names):
        if names.count(n) > 1:
            problems.append(f"function @{n} defined more than once")
    sigs = {f.name: f for f in p.functions}
    for f in p.functions:
        problems.extend(f"@{f.name}: {m}" for m in _validate_function(f, sigs))
    return problems


def _validate_function(f: Function, sigs: dict) -> Iterator[str]:
    labels = [b.label for b in f.blocks]
    for lbl in set(labels):
        if labels.count(lbl) > 1:
            yield f"label {lbl} defined more than once"
    defs = [n for _, n in f.params]
    for b in f.blocks:
        for ins in (*b.phis, *b.instrs):
            d = defined_reg(ins)
            if d is not None:
                defs.append(d)
    for d in set(defs):
        if defs.count(d) > 1:
            yield f"register %{d} assigned more than once"
    known = set(defs)
    label_set = set(labels)
    for b in f.blocks:
        for ins in (*b.phis, *b.instrs, b.term):
            for o in operands(ins):
                if isinstance(o, Reg) and o.name not in known:
                    yield f"register %{o.name} used but never defined"
            if isinstance(ins, Phi):
                for _, lbl in ins.incoming:
                    if lbl not in label_set:
                        yield f"phi %{ins.dst} names unknown block {lbl}"
            if isinstance(ins, Br) and ins.target not in label_set:
                yield f"branch to unknown block {ins.target}"
            if isinstance(ins, CondBr):
                for lbl in (ins.then, ins.other):
                    if lbl not in label_set:
                        yield f"branch to unknown block {lbl}"
            if isinstance(ins, Call):
                yield from _validate_call(ins, sigs)
            if isinstance(ins, Ret) and ins.t != f.ret_t:
                yield f"ret {ins.t} in a function returning {f.ret_t}"


def _validate_call(c: Call, sigs: dict) -> Iterator[str]:
    if is_print(c.fn):
        if len(c.args) != 1:
            yield f"@{c.fn} takes one argument"
    elif c.fn == "malloc":
        if len(c.args) != 2 or c.args[0][1] is not None or c.ret_t != PTR:
            yield "@malloc is called as 'call ptr @malloc(<ty>, <ty> <count>)'"
    elif c.fn == "free":
        if len(c.args) != 1 or c.args[0][0] != PTR:
            yield "@free takes one ptr argument"
    elif c.fn not in sigs:
        yield f"call to undefined function @{c.fn}"
    else:
        callee = sigs[c.fn]
        if len(callee.params) != len(c.args):
            yield f"@{c.fn} expects {len(callee.params)} arguments, got {len(c.args)}"
        elif any(t != pt for (t, _), (pt, _) in zip(c.args, callee.params)):
            yield f"argument types of call to @{c.fn} do not match its parameters"
        if callee.ret_t != c.ret_t:
            yield f"call of @{c.fn} at type {c.ret_t}, but it returns {callee.ret_t}"
    if c.dst is not None and c.ret_t == VOID:
        yield f"void call result assigned to %{c.dst}"
