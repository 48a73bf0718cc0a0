"""Each corpus program lists its expected default-run output in ``; expect <mode>:`` lines."""

import re
from pathlib import Path

import pytest

from twophase.interp import RunConfig, run
from twophase.ir import parse
from twophase.values import INF, Mode

ROOT = Path(__file__).resolve().parent.parent / "programs"
EXPECT = re.compile(r"^; expect (inf|fin\d+): (.*)$", re.M)
STOPS = ("UB", "OOM", "FAIL")


def cases():
    for path in sorted(ROOT.glob("*.ll")):
        by_mode: dict = {}
        for mode, line in EXPECT.findall(path.read_text()):
            by_mode.setdefault(mode, []).append(line.strip())
        for mode, lines in by_mode.items():
            yield pytest.param(path, mode, lines, id=f"{path.stem}-{mode}")


def line_matches(expected: str, actual: str) -> bool:
    if expected in STOPS:
        return actual.startswith(expected + ":")
    return expected == actual


def test_corpus_is_large_and_annotated():
    paths = sorted(ROOT.glob("*.ll"))
    assert len(paths) >= 30
    assert all(EXPECT.search(p.read_text()) for p in paths)


@pytest.mark.parametrize("path,mode,expected", list(cases()))
def test_expected_output(path, mode, expected):
    m = INF if mode == "inf" else Mode.fin(int(mode[3:]))
    ex = run(parse(path.read_text()), RunConfig(mode=m, fuel=10**4))
    actual = ex.lines()
    assert len(actual) == len(expected), actual
    for e, a in zip(expected, actual):
        assert line_matches(e, a), (e, a)
