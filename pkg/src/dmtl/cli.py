"""Command-line front end.

Exit codes: 0 success, 2 parse or validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from dataclasses import dataclass
from typing import Optional

from . import temporal as tm
from .analysis import optimised
from .bench import STRATEGIES, BenchConfig, sweep, write_report
from .dataset import Dataset
from .generate import GeneratorSpec, generate_facts, parse_schemas, render_facts
from .oracle import compare, grid_load, grid_materialise, safe_region
from .reasoner import Materialisation
from .syntax import ParseError, Program, parse_fact, parse_facts, parse_program

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 2, 3


class InvalidConfig(ValueError):
    pass


@dataclass
class RunConfig:
    program: str
    dataset: str
    strategy: str = "seminaive"
    max_iters: int = 10
    output: Optional[str] = None
    stats_out: Optional[str] = None
    summary_out: Optional[str] = None
    seed: int = 0
    explain_pruning: bool = False
    timing: bool = True

    def validate(self):
        if self.strategy not in STRATEGIES:
            raise InvalidConfig(f"unknown strategy {self.strategy!r}")
        if self.max_iters < 0:
            raise InvalidConfig("--max-iters must be >= 0")
        return self


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_inputs(cfg: RunConfig):
    program = parse_program(_read(cfg.program))
    facts = parse_facts(_read(cfg.dataset), dict(program.arities))
    return program, Dataset(facts)


def run(cfg: RunConfig, program: Program, dataset: Dataset) -> Materialisation:
    fn = STRATEGIES[cfg.strategy]
    if fn is optimised:
        return fn(program, dataset, cfg.max_iters, explain=cfg.explain_pruning)
    return fn(program, dataset, cfg.max_iters)


def summary(cfg: RunConfig, res: Materialisation) -> dict:
    s = res.stats.summary()
    if not cfg.timing:
        s["wall_time"] = 0
    s.update(reached_fixpoint=res.reached_fixpoint, stored_facts=len(res.dataset),
             flag_iteration=res.flag_iteration,
             pruned=[{"iteration": e.iteration, "rule": e.rule, "check": e.reason,
                      "t_r": None if e.bound is None else tm.format_time(e.bound)} for e in res.events])
    return s


def _stats_csv(res: Materialisation, timing: bool) -> str:
    buf = io.StringIO()
    if not timing:
        for it in res.stats.iterations:
            it.wall_time = 0.0
    res.stats.write_csv(buf)
    return buf.getvalue()


def cmd_materialise(args) -> int:
    cfg = _config(args)
    program, dataset = load_inputs(cfg)
    res = run(cfg, program, dataset)
    _write(cfg.output, res.dataset.render())
    if cfg.stats_out:
        _write(cfg.stats_out, _stats_csv(res, cfg.timing))
    s = summary(cfg, res)
    if cfg.summary_out:
        _write(cfg.summary_out, json.dumps(s, indent=2, sort_keys=True) + "\n")
    else:
        print(f"iterations={s['iterations']} fixpoint={str(res.reached_fixpoint).lower()} "
              f"stored_facts={s['stored_facts']} applied={s['applied']}", file=sys.stderr)
    return EXIT_OK


def cmd_query(args) -> int:
    cfg = _config(args)
    program, dataset = load_inputs(cfg)
    atom, iv = parse_fact(args.fact)
    res = run(cfg, program, dataset)
    if res.dataset.entails(atom, iv):
        print(f"entailed-at-{cfg.max_iters}")
    elif res.reached_fixpoint:
        print(f"not-entailed-at-{cfg.max_iters}")
    else:
        print(f"not-entailed-at-{cfg.max_iters} (bounded answer: no fixpoint reached)")
    return EXIT_OK


def cmd_generate(args) -> int:
    spec = GeneratorSpec(schemas=parse_schemas(args.schemas), constants=args.constants,
                         facts=args.facts, min_length=args.min_length, max_length=args.max_length,
                         span=(args.span_lo, args.span_hi))
    _write(args.output, render_facts(generate_facts(spec, args.seed)))
    return EXIT_OK


def _ints(text: str):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InvalidConfig(f"expected comma-separated integers, got {text!r}") from None


def cmd_bench(args) -> int:
    strategies = tuple(s.strip() for s in args.strategies.split(","))
    bad = [s for s in strategies if s not in STRATEGIES]
    if bad:
        raise InvalidConfig(f"unknown strategy {bad[0]!r}")
    cfg = BenchConfig(constants=_ints(args.constants), facts_per_constant=args.facts_per_constant,
                      iterations=args.max_iters if args.max_iters is not None else 10,
                      strategies=strategies, seed=args.seed, timing=not args.no_timing)
    program = parse_program(_read(args.program)) if args.program else None
    cells = sweep(cfg, program, log=lambda m: print(m, file=sys.stderr))
    buf = io.StringIO()
    write_report(cells, buf, cfg.timing)
    _write(args.output, buf.getvalue())
    return EXIT_OK


def _interval_arg(text: str) -> tm.Interval:
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise InvalidConfig(f"expected 'lo,hi' integers, got {text!r}") from None
    return tm.Interval(lo, hi)


def cmd_oracle_check(args) -> int:
    cfg = _config(args)
    program, dataset = load_inputs(cfg)
    window = _interval_arg(args.window)
    k = cfg.max_iters
    region = _interval_arg(args.region) if args.region else safe_region(program, window, k)
    if region is None:
        raise InvalidConfig("window too small for a safe region; pass --region")
    res = run(cfg, program, dataset)
    grids = grid_materialise(program, grid_load(dataset, window), k)
    diffs = compare(res.dataset, grids[k], region)
    for d in diffs:
        print(d)
    print(f"{len(diffs)} disagreements on {region}")
    return EXIT_OK if not diffs else 1


def _config(args) -> RunConfig:
    return RunConfig(program=args.program, dataset=args.dataset, strategy=args.strategy,
                     max_iters=args.max_iters if args.max_iters is not None else 10,
                     output=getattr(args, "output", None), stats_out=args.stats_out,
                     summary_out=getattr(args, "summary_out", None), seed=args.seed,
                     explain_pruning=args.explain_pruning,
                     timing=not getattr(args, "no_timing", False)).validate()


def _common(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--strategy", default=d("seminaive"), help="naive | seminaive | optimised")
    p.add_argument("--max-iters", type=int, default=d(None), help="materialisation steps (default 10)")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--stats-out", default=d(None), help="per-iteration statistics CSV")
    p.add_argument("--explain-pruning", action="store_true", default=d(False),
                   help="log each rule removal with its check and bound")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dmtl", description="DatalogMTL materialisation")
    _common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def inputs(p):
        p.add_argument("-p", "--program", required=True)
        p.add_argument("-d", "--dataset", required=True)

    m = sub.add_parser("materialise", help="materialise a dataset")
    inputs(m)
    m.add_argument("-o", "--output", help="output dataset (default stdout)")
    m.add_argument("--summary-out", help="JSON run summary")
    m.add_argument("--no-timing", action="store_true", help="write zero wall times")
    m.set_defaults(func=cmd_materialise)

    q = sub.add_parser("query", help="bounded entailment of one fact")
    inputs(q)
    q.add_argument("fact", help="e.g. \"R5(c2)@[2,2]\"")
    q.add_argument("-k", dest="max_iters", type=int, default=argparse.SUPPRESS)
    q.set_defaults(func=cmd_query)

    g = sub.add_parser("generate", help="synthetic dataset")
    g.add_argument("--schemas", required=True, help="e.g. Person/1,Advises/2")
    g.add_argument("--constants", type=int, required=True)
    g.add_argument("--facts", type=int, required=True)
    g.add_argument("--min-length", type=int, default=0)
    g.add_argument("--max-length", type=int, default=3)
    g.add_argument("--span-lo", type=int, default=0)
    g.add_argument("--span-hi", type=int, default=100)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="strategy benchmark sweep")
    b.add_argument("--constants", default="500,1000,2000,5000")
    b.add_argument("--facts-per-constant", type=int, default=20)
    b.add_argument("--strategies", default="naive,seminaive,optimised")
    b.add_argument("-p", "--program", help="override the built-in bench program")
    b.add_argument("--no-timing", action="store_true")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle-check", help=argparse.SUPPRESS)
    inputs(o)
    o.add_argument("--window", default="-50,60")
    o.add_argument("--region")
    o.set_defaults(func=cmd_oracle_check)

    for p in (m, q, g, b, o):
        _common(p, suppress=True)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logger = logging.getLogger("dmtl")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.INFO if args.explain_pruning else logging.WARNING)
    try:
        return args.func(args)
    except (ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    finally:
        logger.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
