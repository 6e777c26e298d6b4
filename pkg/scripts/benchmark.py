"""Run the strategy benchmark sweep and write the CSV report plus a short digest."""

import argparse
import sys
import time

from dmtl.bench import BenchConfig, sweep, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--constants", default="500,1000,2000,5000")
    ap.add_argument("--facts-per-constant", type=int, default=20)
    ap.add_argument("--iterations", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-o", "--output", default="bench.csv")
    args = ap.parse_args()
    cfg = BenchConfig(constants=tuple(int(x) for x in args.constants.split(",")),
                      facts_per_constant=args.facts_per_constant,
                      iterations=args.iterations, seed=args.seed)
    t0 = time.perf_counter()
    cells = sweep(cfg, log=lambda m: print(m, file=sys.stderr))
    with open(args.output, "w", newline="") as fh:
        write_report(cells, fh)
    for c in cells:
        print(f"{c.facts} facts / {c.constants} constants")
        for name, res in c.runs.items():
            peak = max(it.stored_facts for it in res.stats.iterations)
            print(f"  {name:10s} applied={res.stats.applied:8d} peak_stored={peak:7d} "
                  f"per-step={res.stats.applied_per_iteration()}")
    print(f"total {time.perf_counter() - t0:.1f}s, report in {args.output}")


if __name__ == "__main__":
    main()
