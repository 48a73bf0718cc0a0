"""Command-line entry point: ``twophase <command> ...``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .core import EnumerationError, dump_conf
from .harness import CAMPAIGNS, fuzz_diff
from .interp import (
    FailStop,
    FuelExhausted,
    OOMStop,
    Returned,
    RunConfig,
    UBStop,
    enumerate_behaviors,
    run,
    sorted_executions,
)
from .ir import ParseError, parse, pretty
from .passes import PASSES, TransformError, apply_to_program, validate_transform
from .refinement import check_exec_sound, check_inf_fin
from .values import DEFAULT_BOUNDS, Mode

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_UB = 2
EXIT_OOM = 3
EXIT_FAIL = 4
EXIT_FUEL = 5
EXIT_USAGE = 64
EXIT_PARSE = 65


def exit_code(outcome) -> int:
    return {
        Returned: EXIT_OK,
        UBStop: EXIT_UB,
        OOMStop: EXIT_OOM,
        FailStop: EXIT_FAIL,
        FuelExhausted: EXIT_FUEL,
    }[type(outcome)]


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _model_args(p: argparse.ArgumentParser, addr_default: int = 64):
    p.add_argument("--model", choices=["inf", "fin"], default="inf")
    p.add_argument("--addr-bits", type=int, default=addr_default)
    p.add_argument("--fuel", type=int, default=10**6)
    p.add_argument("--big-endian", action="store_true", help="use big-endian byte order")


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgumentParser(prog="twophase", description="Two-phase memory model interpreter and checkers.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("run", help="execute a program once")
    p.add_argument("file")
    _model_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=["default", "random"], default="default")
    p.add_argument("--trace", action="store_true", help="also print the final memory configuration")

    p = sub.add_parser("enum", help="list every behavior")
    p.add_argument("file")
    _model_args(p)
    p.add_argument("--enum-alloc", action="store_true", help="enumerate allocation placements")
    p.add_argument("--max-behaviors", type=int, default=DEFAULT_BOUNDS.max_paths)
    p.add_argument("--sample-wide", action="store_true", help="sample wide undef values")

    p = sub.add_parser("check-inf-fin", help="check the finite model adds no behavior")
    p.add_argument("file")
    p.add_argument("--addr-bits", type=int, default=4)
    p.add_argument("--fuel", type=int, default=10**5)
    p.add_argument("--big-endian", action="store_true")

    p = sub.add_parser("check-exec", help="check the deterministic run is an allowed behavior")
    p.add_argument("file")
    _model_args(p)

    p = sub.add_parser("opt", help="apply a transformation, optionally validating it")
    p.add_argument("file")
    p.add_argument("--pass", dest="pass_name", choices=sorted(PASSES), required=True)
    p.add_argument("--validate", action="store_true")
    _model_args(p, addr_default=4)

    p = sub.add_parser("fuzz", help="run a differential campaign on generated programs")
    p.add_argument("--campaign", choices=CAMPAIGNS, required=True)
    p.add_argument("-n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--addr-bits", type=int, default=4)
    p.add_argument("--max-size", type=int, default=12)
    p.add_argument("--out", help="directory for shrunk witnesses")
    p.add_argument("--report", help="write the report lines to this file")

    p = sub.add_parser("parse", help="print the normalized program")
    p.add_argument("file")
    return ap


def _mode(args) -> Mode:
    order = "big" if getattr(args, "big_endian", False) else "little"
    if args.model == "fin":
        return Mode.fin(args.addr_bits, order)
    return Mode.inf(order)


def _load(path: str):
    return parse(Path(path).read_text())


def _cmd_run(args) -> int:
    prog = _load(args.file)
    ex = run(prog, RunConfig(mode=_mode(args), fuel=args.fuel, undef_policy=args.policy, seed=args.seed))
    for line in ex.lines():
        print(line)
    if args.trace:
        print("-- final configuration")
        print(dump_conf(ex.conf))
    return exit_code(ex.outcome)


def _cmd_enum(args) -> int:
    prog = _load(args.file)
    bounds = replace(DEFAULT_BOUNDS, enum_alloc=args.enum_alloc, max_paths=args.max_behaviors, sample_wide=args.sample_wide)
    exs = enumerate_behaviors(prog, RunConfig(mode=_mode(args), fuel=args.fuel, undef_policy="enumerate"), bounds)
    exs = sorted_executions(exs)
    print(f"behaviors={len(exs)}")
    for i, ex in enumerate(exs):
        print(f"-- behavior {i}")
        for line in ex.lines():
            print(line)
    return EXIT_OK


def _report(rep) -> int:
    for line in rep.lines():
        print(line)
    return EXIT_OK if rep.verdict else EXIT_CHECK_FAILED


def _cmd_check_inf_fin(args) -> int:
    order = "big" if args.big_endian else "little"
    return _report(check_inf_fin(_load(args.file), args.addr_bits, DEFAULT_BOUNDS, args.fuel, order))


def _cmd_check_exec(args) -> int:
    cfg = RunConfig(mode=_mode(args), fuel=args.fuel)
    return _report(check_exec_sound(_load(args.file), cfg, DEFAULT_BOUNDS))


def _cmd_opt(args) -> int:
    prog = _load(args.file)
    t = PASSES[args.pass_name]()
    if not args.validate:
        print(pretty(apply_to_program(t, prog)), end="")
        return EXIT_OK
    after, rep = validate_transform(t, prog, _mode(args), DEFAULT_BOUNDS, min(args.fuel, 10**5))
    print(pretty(after), end="")
    return _report(rep)


def _cmd_fuzz(args) -> int:
    rep = fuzz_diff(args.campaign, args.n, args.seed, DEFAULT_BOUNDS, args.addr_bits, args.max_size, args.out)
    lines = rep.lines()
    for line in lines:
        print(line)
    if args.report:
        Path(args.report).write_text("\n".join(lines) + "\n")
    return EXIT_OK if not rep.failures else EXIT_CHECK_FAILED


def _cmd_parse(args) -> int:
    print(pretty(_load(args.file)), end="")
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "enum": _cmd_enum,
    "check-inf-fin": _cmd_check_inf_fin,
    "check-exec": _cmd_check_exec,
    "opt": _cmd_opt,
    "fuzz": _cmd_fuzz,
    "parse": _cmd_parse,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError:
        return EXIT_USAGE
    try:
        return COMMANDS[args.cmd](args)
    except ParseError as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TransformError, EnumerationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
