"""Strategy benchmark over generated datasets with a constant-count sweep.

The bench program has a non-recursive part that saturates within two rounds
and a recursive part where ``Pulse`` repeats every 4 time units, so each
round adds disjoint intervals and naive evaluation redoes ever more work.

Report columns (one row per cell, strategy and iteration):

    cell, constants, facts, strategy, iteration, wall_time, enumerated,
    applied, cumulative_applied, derived, stored_facts, peak_stored_facts,
    active_rules, flag_iteration
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .analysis import optimised
from .dataset import Dataset
from .generate import GeneratorSpec, generate_dataset
from .reasoner import Materialisation, naive, seminaive
from .syntax import Program, parse_program

BENCH_PROGRAM = """\
% non-recursive part
Busy(x) :- Professor(x), Diamondminus[0,2] Teaches(x,y).
Boxplus[1,1] Alert(x) :- Busy(x), Diamondminus[0,1] Busy(x).
Active(x) :- Diamondminus[0,3] Student(x), Diamondminus[0,3] Enrolled(x,y).
% recursive part
Pulse(x) :- Active(x).
Pulse(x) :- Diamondminus[4,4] Pulse(x).
Mentored(y) :- Pulse(x), Advises(x,y).
"""

BENCH_SCHEMAS = (("Professor", 1), ("Teaches", 2), ("Student", 1), ("Enrolled", 2), ("Advises", 2))

REPORT_COLUMNS = ("cell", "constants", "facts", "strategy", "iteration", "wall_time", "enumerated",
                  "applied", "cumulative_applied", "derived", "stored_facts", "peak_stored_facts",
                  "active_rules", "flag_iteration")

STRATEGIES = {"naive": naive, "seminaive": seminaive, "optimised": optimised}


def bench_program() -> Program:
    return parse_program(BENCH_PROGRAM)


def bench_spec(constants: int, facts: int, span: Tuple[int, int] = (0, 20)) -> GeneratorSpec:
    return GeneratorSpec(schemas=BENCH_SCHEMAS, constants=constants, facts=facts,
                         min_length=0, max_length=1, span=span)


@dataclass
class BenchConfig:
    constants: Sequence[int] = (500, 1000, 2000, 5000)
    facts_per_constant: int = 20
    iterations: int = 10
    strategies: Sequence[str] = ("naive", "seminaive", "optimised")
    span: Tuple[int, int] = (0, 20)
    seed: int = 0
    timing: bool = True


@dataclass
class CellResult:
    cell: int
    constants: int
    facts: int
    runs: Dict[str, Materialisation] = field(default_factory=dict)

    def rows(self, timing: bool = True):
        for name, res in self.runs.items():
            cum, peak = 0, 0
            for it in res.stats.iterations:
                cum += it.applied
                peak = max(peak, it.stored_facts)
                yield {
                    "cell": self.cell, "constants": self.constants, "facts": self.facts,
                    "strategy": name, "iteration": it.iteration,
                    "wall_time": f"{it.wall_time:.6f}" if timing else "0",
                    "enumerated": it.enumerated, "applied": it.applied, "cumulative_applied": cum,
                    "derived": it.derived, "stored_facts": it.stored_facts, "peak_stored_facts": peak,
                    "active_rules": it.active_rules,
                    "flag_iteration": "" if res.flag_iteration is None else res.flag_iteration,
                }


def run_cell(program: Program, dataset: Dataset, strategies: Sequence[str], iterations: int,
             cell: int = 0, constants: int = 0, facts: int = 0) -> CellResult:
    out = CellResult(cell, constants, facts)
    for name in strategies:
        out.runs[name] = STRATEGIES[name](program, dataset, iterations)
    return out


def sweep(cfg: BenchConfig, program: Program = None, log=None) -> List[CellResult]:
    program = program or bench_program()
    cells = []
    for i, n in enumerate(cfg.constants):
        facts = n * cfg.facts_per_constant
        d = generate_dataset(bench_spec(n, facts, cfg.span), cfg.seed + i)
        t0 = time.perf_counter()
        cells.append(run_cell(program, d, cfg.strategies, cfg.iterations, i, n, facts))
        if log:
            log(f"cell {i}: {n} constants, {facts} facts, {time.perf_counter() - t0:.1f}s")
    return cells


def write_report(cells: Sequence[CellResult], fh, timing: bool = True):
    w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for c in cells:
        for row in c.rows(timing):
            w.writerow(row)
