"""Run both differential campaigns and write their reports.

    python3 scripts/run_fuzz.py --exec 500 --inf-fin 200 --seed 2026 --out fuzz_out
"""

import argparse
import time
from pathlib import Path

from twophase.harness import fuzz_diff


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--exec", dest="n_exec", type=int, default=500)
    ap.add_argument("--inf-fin", dest="n_inf_fin", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--addr-bits", type=int, default=4)
    ap.add_argument("--out", default="fuzz_out")
    args = ap.parse_args()
    out = Path(args.out)
    worst = 0
    for campaign, n in (("exec-vs-spec", args.n_exec), ("inf-vs-fin", args.n_inf_fin)):
        t0 = time.perf_counter()
        rep = fuzz_diff(campaign, n, args.seed, addr_bits=args.addr_bits, out_dir=out / campaign)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{campaign}.txt").write_text("\n".join(rep.lines()) + "\n")
        print(f"{rep.lines()[-1]} seconds={time.perf_counter() - t0:.1f}")
        worst = max(worst, len(rep.failures))
    raise SystemExit(1 if worst else 0)


if __name__ == "__main__":
    main()
