"""Compare the counting loop in both models, with and without wrapping iptr arithmetic."""

from pathlib import Path

import twophase.values as values
from twophase.interp import RunConfig, run
from twophase.ir import parse
from twophase.refinement import check_inf_fin
from twophase.values import DIPtr, Mode, Ok

PROGRAM = Path(__file__).resolve().parent.parent / "programs" / "iptr_loop.ll"


def wrapping(mode, v):
    if mode.finite:
        v %= 1 << mode.bits
    return Ok(None, DIPtr(v))


def summary(ex, keep=3):
    lines = ex.lines()
    if len(lines) <= 2 * keep:
        return " | ".join(lines)
    return " | ".join(lines[:keep] + ["..."] + lines[-keep:])


def main():
    prog = parse(PROGRAM.read_text())
    print("inf  :", summary(run(prog, RunConfig(fuel=2000))))
    print("fin4 :", summary(run(prog, RunConfig(mode=Mode.fin(4), fuel=2000))))
    print("check:", check_inf_fin(prog).lines()[0])
    original = values.iptr_result
    values.iptr_result = wrapping
    try:
        print("fin4 wrapping :", summary(run(prog, RunConfig(mode=Mode.fin(4), fuel=2000))))
        print("check wrapping:", check_inf_fin(prog).lines()[0])
    finally:
        values.iptr_result = original


if __name__ == "__main__":
    main()
