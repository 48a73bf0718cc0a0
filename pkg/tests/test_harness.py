from twophase.harness import case_seeds, fuzz_diff, gen_program, gen_text, shrink
from twophase.interp import run
from twophase.ir import Call, parse, pretty, validate

from mutations import wrapping_iptr_result


def test_same_seed_same_program():
    assert gen_text(123, 10) == gen_text(123, 10)
    assert gen_text(123, 10) != gen_text(124, 10)


def test_size_zero_is_minimal():
    p = gen_program(5, 0)
    (f,) = p.functions
    assert f.name == "main" and len(f.blocks) == 1
    assert f.entry.instrs == () and pretty(p).strip().endswith("ret void\n}")


def test_thousand_programs_round_trip():
    for i, s in enumerate(case_seeds(1, 1000)):
        p = gen_program(s, i % 16)
        assert validate(p) == [], (s, validate(p))
        assert parse(pretty(p)) == p


def test_programs_end_with_prints():
    for s in case_seeds(2, 50):
        p = gen_program(s, 8)
        last = p.entry.blocks[-1].instrs
        assert last and isinstance(last[-1], Call) and last[-1].fn.startswith("print_")


def test_shrunk_witness_still_fails():
    p = gen_program(7, 12)

    def fails(q):
        return any(e.value.__class__.__name__ == "DInt" for e in run(q).trace)

    if not fails(p):
        return
    small = shrink(p, fails)
    assert fails(small) and validate(small) == []
    assert len(pretty(small)) <= len(pretty(p))


def test_exec_campaign_is_clean(tmp_path):
    rep = fuzz_diff("exec-vs-spec", 30, seed=3, out_dir=tmp_path)
    assert rep.failures == []
    assert rep.lines()[-1].startswith("campaign=exec-vs-spec cases=30 ")


def test_inf_fin_campaign_finds_wrapping_iptr(monkeypatch, tmp_path):
    monkeypatch.setattr("twophase.values.iptr_result", wrapping_iptr_result)
    rep = fuzz_diff("inf-vs-fin", 40, seed=0, out_dir=tmp_path)
    assert rep.failures
    case = rep.failures[0]
    assert case.line().startswith(f"seed={case.seed} verdict=fail witness_file=")
    witness = parse(open(case.witness_file).read())
    assert validate(witness) == []
