from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from twophase.harness import gen_program
from twophase.ir import Bin, Const, ParseError, Reg, Ret, parse, pretty, uses, validate
from twophase.values import BinOp, I32

PROGRAMS = sorted(Path(__file__).resolve().parent.parent.joinpath("programs").glob("*.ll"))


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_corpus_parses_and_round_trips(path):
    p = parse(path.read_text())
    assert validate(p) == []
    assert parse(pretty(p)) == p


@settings(max_examples=60)
@given(st.integers(0, 2**64 - 1), st.integers(0, 14))
def test_generated_programs_round_trip(seed, size):
    p = gen_program(seed, size)
    assert validate(p) == []
    assert parse(pretty(p)) == p


def test_parse_basic_shape():
    p = parse("define i32 @main() {\n  %x = add i32 1, 2\n  ret i32 %x\n}\n")
    f = p.entry
    assert f.name == "main" and f.entry.label == "entry"
    assert f.entry.instrs == (Bin("x", BinOp.ADD, I32, Const(1), Const(2)),)
    assert f.entry.term == Ret(I32, Reg("x"))
    assert uses(f, "x") == 1


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("define void @main() {\n  ret void\n", 3, 1),
        ("define void @main() {\n  %x = frob i32 1\n  ret void\n}", 2, 8),
        ("define void @main() {\n  ret void $\n}", 2, 12),
        ("define i9 @main() {\n ret void\n}", 1, 8),
    ],
)
def test_parse_errors_are_positioned(text, line, col):
    with pytest.raises(ParseError) as e:
        parse(text)
    assert (e.value.line, e.value.col) == (line, col)


@pytest.mark.parametrize(
    "body,needle",
    [
        ("%x = add i32 %y, 1\n  ret void", "never defined"),
        ("%x = add i32 1, 1\n  %x = add i32 1, 1\n  ret void", "more than once"),
        ("br label %nowhere", "unknown block"),
        ("call void @missing()\n  ret void", "undefined function"),
        ("ret i32 0", "returning void"),
        ("call void @print_i32(i32 1, i32 2)\n  ret void", "one argument"),
        ("call void @free(i32 1)\n  ret void", "one ptr argument"),
    ],
)
def test_validation_problems(body, needle):
    p = parse("define void @main() {\nentry:\n  " + body + "\n}\n")
    probs = validate(p)
    assert any(needle in m for m in probs), probs


def test_call_arity_and_type_checked():
    src = """
define i32 @f(i32 %a) {
  ret i32 %a
}
define void @main() {
  %r = call i32 @f(i32 1, i32 2)
  %s = call i64 @f(i32 1)
  ret void
}
"""
    probs = validate(parse(src))
    assert any("expects 1 arguments" in m for m in probs)
    assert any("returns i32" in m for m in probs)


def test_duplicate_function():
    src = "define void @main() {\n ret void\n}\ndefine void @main() {\n ret void\n}\n"
    assert validate(parse(src)) == ["function @main defined more than once"]
