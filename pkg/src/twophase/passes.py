"""Three micro-transformations and a check that each one refines its input.

Removing an unused ``alloca`` and removing an unused ``ptrtoint`` are sound
with unbounded memory; adding an ``alloca`` is sound in both models because a
new out-of-memory stop is always an acceptable refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .interp import RunConfig, enumerate_behaviors
from .ir import Alloca, Conv, Function, Program, uses, validate
from .refinement import RefinementReport, set_refines
from .values import DEFAULT_BOUNDS, I64, ConvKind, EnumBounds, Mode, VType


class TransformError(Exception):
    """The transformation's syntactic precondition does not hold."""


@dataclass(frozen=True)
class RemoveDeadAlloca:
    reg: Optional[str] = None

    def candidates(self, f: Function) -> list[str]:
        return [i.dst for b in f.blocks for i in b.instrs if isinstance(i, Alloca) and uses(f, i.dst) == 0]

    def apply(self, f: Function) -> Function:
        return _remove(f, self.reg, self.candidates(f), "unused alloca")


@dataclass(frozen=True)
class RemoveDeadPtrToInt:
    reg: Optional[str] = None

    def candidates(self, f: Function) -> list[str]:
        return [
            i.dst
            for b in f.blocks
            for i in b.instrs
            if isinstance(i, Conv) and i.kind is ConvKind.PTRTOINT and uses(f, i.dst) == 0
        ]

    def apply(self, f: Function) -> Function:
        return _remove(f, self.reg, self.candidates(f), "unused ptrtoint")


@dataclass(frozen=True)
class InsertAlloca:
    t: VType = I64
    reg: Optional[str] = None

    def candidates(self, f: Function) -> list[str]:
        return [self.reg or _fresh_name(f, "extra")]

    def apply(self, f: Function) -> Function:
        name = self.reg or _fresh_name(f, "extra")
        if name in _all_names(f):
            raise TransformError(f"%{name} is already defined in @{f.name}")
        entry = f.entry
        entry = replace(entry, instrs=(Alloca(name, self.t),) + entry.instrs)
        return replace(f, blocks=(entry,) + f.blocks[1:])


Transform = RemoveDeadAlloca | RemoveDeadPtrToInt | InsertAlloca

PASSES = {
    "dead-alloca": RemoveDeadAlloca,
    "dead-ptoi": RemoveDeadPtrToInt,
    "insert-alloca": InsertAlloca,
}


def _all_names(f: Function) -> set:
    names = {n for _, n in f.params}
    for b in f.blocks:
        for i in (*b.phis, *b.instrs):
            if getattr(i, "dst", None) is not None:
                names.add(i.dst)
    return names


def _fresh_name(f: Function, base: str) -> str:
    names = _all_names(f)
    k, name = 0, base
    while name in names:
        k += 1
        name = f"{base}{k}"
    return name


def _remove(f: Function, reg, cands: list, what: str) -> Function:
    if reg is None:
        if not cands:
            raise TransformError(f"@{f.name} has no {what}")
        reg = cands[0]
    elif reg not in cands:
        raise TransformError(f"%{reg} in @{f.name} is not an {what}")
    blocks = tuple(replace(b, instrs=tuple(i for i in b.instrs if getattr(i, "dst", None) != reg)) for b in f.blocks)
    return replace(f, blocks=blocks)


def apply_transform(t: Transform, f: Function) -> Function:
    out = t.apply(f)
    problems = validate(Program((out,)))
    # calls to other functions cannot be resolved in isolation; ignore those
    problems = [p for p in problems if "undefined function" not in p and "expects" not in p]
    if problems:
        raise TransformError("; ".join(problems))
    return out


def apply_to_program(t: Transform, prog: Program, fn: Optional[str] = None) -> Program:
    """Apply ``t`` to ``fn``, or to the first function where it applies."""
    targets = [prog.func(fn)] if fn else list(prog.functions)
    if fn and targets[0] is None:
        raise TransformError(f"no function @{fn}")
    for f in targets:
        if t.candidates(f):
            try:
                new = apply_transform(t, f)
            except TransformError:
                if fn:
                    raise
                continue
            return replace(prog, functions=tuple(new if g is f else g for g in prog.functions))
    raise TransformError(f"{type(t).__name__} does not apply to any function")


def validate_transform(
    t: Transform,
    prog: Program,
    mode: Mode,
    bounds: EnumBounds = DEFAULT_BOUNDS,
    fuel: int = 10**5,
) -> tuple[Program, RefinementReport]:
    """Transform ``prog`` and check the result refines it, enumerating placements."""
    after = apply_to_program(t, prog)
    b = replace(bounds, enum_alloc=True)
    cfg = RunConfig(mode=mode, fuel=fuel, undef_policy="enumerate")
    P = enumerate_behaviors(prog, cfg, b)
    Q = enumerate_behaviors(after, cfg, b)
    return after, set_refines(P, Q, cross_language=False)
