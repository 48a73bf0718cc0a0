"""Validate each transformation in both models and print a verdict table."""

from pathlib import Path

from twophase.ir import parse
from twophase.passes import PASSES, validate_transform
from twophase.values import INF, Mode

ROOT = Path(__file__).resolve().parent.parent / "programs"

CASES = [
    ("alloca", "dead-alloca"),
    ("ptoi", "dead-ptoi"),
    ("ret", "insert-alloca"),
    ("exhausted", "dead-alloca"),
]
MODES = [("inf", INF), ("fin4", Mode.fin(4)), ("fin2", Mode.fin(2))]


def main():
    print(f"{'program':<12}{'pass':<15}" + "".join(f"{m:<7}" for m, _ in MODES))
    for name, pass_name in CASES:
        prog = parse((ROOT / f"{name}.ll").read_text())
        cells = []
        for _, mode in MODES:
            _, rep = validate_transform(PASSES[pass_name](), prog, mode)
            cells.append("pass" if rep.verdict else "FAIL")
        print(f"{name:<12}{pass_name:<15}" + "".join(f"{c:<7}" for c in cells))


if __name__ == "__main__":
    main()
