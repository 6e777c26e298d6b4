"""Materialise the four-rule example with all three strategies and print each step."""

import argparse
from pathlib import Path

from dmtl.analysis import optimised
from dmtl.dataset import Dataset
from dmtl.reasoner import naive, seminaive
from dmtl.syntax import parse_program

DATA = Path(__file__).resolve().parent.parent / "data"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=4)
    args = ap.parse_args()
    program = parse_program((DATA / "example.dmtl").read_text())
    dataset = Dataset.parse((DATA / "example.data").read_text())
    for name, fn in (("naive", naive), ("seminaive", seminaive), ("optimised", optimised)):
        res = fn(program, dataset, args.steps, trace=True)
        print(f"== {name}")
        for k, d in enumerate(res.trace):
            print(f"D^{k}: {', '.join(str(f) for f in d.facts())}")
        for k, delta in enumerate(res.deltas, 1):
            print(f"Delta after step {k}: {', '.join(sorted(str(f) for f in delta))}")
        print("applied per step:", res.stats.applied_per_iteration())
        for e in res.events:
            bound = "" if e.bound is None else f", t_r = {e.bound}"
            print(f"step {e.iteration}: removed {e.rule} ({e.reason}{bound})")


if __name__ == "__main__":
    main()
