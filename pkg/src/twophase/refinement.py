"""Refinement between executions and between sets of executions.

A finite-model execution refines an infinite-model one when it shows the same
events and result under lifting, or when it shows a prefix of the events and
then runs out of memory. A set ``Q`` refines ``P`` when each member of ``Q`` is
matched by some member of ``P``, where any ``P`` member that hits undefined
behavior matches everything.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .core import Conf, FrozenMap, Ptr
from .interp import (
    Execution,
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
from .ir import Program
from .values import DEFAULT_BOUNDS, EnumBounds, Mode, lift_value


def lift_ptr(p: Ptr) -> Ptr:
    return Ptr(p.a, p.pr)


def lift_conf(conf: Conf) -> Conf:
    """Inject a finite configuration into the infinite model, field by field."""
    mem = FrozenMap({a: (lift_value(b), pr) for a, (b, pr) in conf.mem.items()})
    heap = FrozenMap({a: tuple(lift_ptr(p) for p in ptrs) for a, ptrs in conf.heap.items()})
    stack = tuple(frozenset(lift_ptr(p) for p in fr) for fr in conf.stack)
    return Conf(mem, heap, stack, conf.used)


def lift_execution(ex: Execution) -> Execution:
    out = ex.outcome
    if isinstance(out, Returned):
        out = Returned(lift_value(out.value))
    return Execution(tuple(replace(e, value=lift_value(e.value)) for e in ex.trace), out)


def _outcomes_match(a, b) -> bool:
    if isinstance(a, Returned) and isinstance(b, Returned):
        return a.value == b.value
    return type(a) is type(b) and isinstance(a, (UBStop, OOMStop, FailStop))


def trace_refines(inf: Execution, fin: Execution, lift: bool = True, allow_oom: bool = True) -> bool:
    """``fin`` matches ``inf`` exactly, or is a prefix of it ending in OOM.

    With ``allow_oom`` off an OOM stop must be matched by an OOM stop.
    """
    if lift:
        fin = lift_execution(fin)
    if isinstance(fin.outcome, OOMStop) and allow_oom:
        n = len(fin.trace)
        return inf.trace[:n] == fin.trace
    if fin.trace != inf.trace:
        return False
    if isinstance(fin.outcome, FuelExhausted):
        return isinstance(inf.outcome, FuelExhausted)
    return _outcomes_match(inf.outcome, fin.outcome)


def has_ub(ex: Execution) -> bool:
    return isinstance(ex.outcome, UBStop)


@dataclass
class RefinementReport:
    verdict: bool
    witnesses: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict

    def lines(self) -> list[str]:
        out = [f"verdict={'pass' if self.verdict else 'fail'}"]
        for k in sorted(self.stats):
            out.append(f"{k}={self.stats[k]}")
        for w in self.witnesses:
            out.append("witness=" + " | ".join(w.lines()))
        return out

    def __str__(self):
        return "\n".join(self.lines())


def set_refines(P, Q, cross_language: bool = False, allow_oom: bool = True) -> RefinementReport:
    P, Q = sorted_executions(P), sorted_executions(Q)
    stats = {"source_behaviors": len(P), "target_behaviors": len(Q)}
    if any(has_ub(p) for p in P):
        stats["source_ub"] = True
        return RefinementReport(True, [], stats)
    witnesses = [q for q in Q if not any(trace_refines(p, q, lift=cross_language, allow_oom=allow_oom) for p in P)]
    return RefinementReport(not witnesses, witnesses, stats)


def check_inf_fin(
    prog: Program,
    addr_bits: int = 4,
    bounds: EnumBounds = DEFAULT_BOUNDS,
    fuel: int = 10**5,
    byteorder: str = "little",
) -> RefinementReport:
    """The finite model adds no behavior the infinite model lacks."""
    inf = enumerate_behaviors(prog, RunConfig(mode=Mode.inf(byteorder), fuel=fuel, undef_policy="enumerate"), bounds)
    fin_cfg = RunConfig(mode=Mode.fin(addr_bits, byteorder), fuel=fuel, undef_policy="enumerate")
    fin = enumerate_behaviors(prog, fin_cfg, bounds)
    return set_refines(inf, fin, cross_language=True)


def check_exec_sound(prog: Program, cfg: RunConfig = RunConfig(), bounds: EnumBounds = DEFAULT_BOUNDS) -> RefinementReport:
    """The deterministic run is one of the enumerated behaviors."""
    P = enumerate_behaviors(prog, replace(cfg, undef_policy="enumerate"), bounds)
    Q = {run(prog, replace(cfg, undef_policy="default"), bounds)}
    return set_refines(P, Q, cross_language=False)

