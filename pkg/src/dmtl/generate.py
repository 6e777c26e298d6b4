"""Seeded generators: synthetic temporal datasets and small random programs."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .dataset import Dataset, Fact
from .syntax import (BOTTOM, TOP, Atom, Binary, Metric, Program, Rule, Unary, Var, check_safety,
                     relational_atoms)
from .temporal import Interval


@dataclass
class GeneratorSpec:
    """Shape of a synthetic dataset: schemas, constants, fact count and interval lengths."""

    schemas: Tuple[Tuple[str, int], ...] = (("P", 1),)
    constants: int = 10
    facts: int = 100
    min_length: int = 0
    max_length: int = 3
    span: Tuple[int, int] = (0, 100)
    constant_prefix: str = "c"

    def validate(self):
        if not self.schemas:
            raise ValueError("at least one predicate schema is required")
        for name, arity in self.schemas:
            if not name or arity < 0:
                raise ValueError(f"bad schema {name}/{arity}")
        if self.constants <= 0 or self.facts <= 0:
            raise ValueError("constant and fact counts must be positive")
        if not 0 <= self.min_length <= self.max_length:
            raise ValueError("need 0 <= min_length <= max_length")
        lo, hi = self.span
        if hi - lo < self.max_length:
            raise ValueError("span is shorter than the longest interval")
        return self


def parse_schemas(text: str) -> Tuple[Tuple[str, int], ...]:
    """``"Person/1,Advises/2"`` -> ``(("Person", 1), ("Advises", 2))``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, arity = part.partition("/")
        try:
            out.append((name.strip(), int(arity)))
        except ValueError:
            raise ValueError(f"bad schema {part!r}, expected Name/arity") from None
    return tuple(out)


def generate_facts(spec: GeneratorSpec, seed: int) -> List[Fact]:
    """Exactly ``spec.facts`` facts; the same seed always gives the same list."""
    spec.validate()
    rng = random.Random(seed)
    consts = [f"{spec.constant_prefix}{i}" for i in range(spec.constants)]
    lo, hi = spec.span
    out = []
    for _ in range(spec.facts):
        name, arity = spec.schemas[rng.randrange(len(spec.schemas))]
        atom = Atom(name, tuple(rng.choice(consts) for _ in range(arity)))
        length = rng.randint(spec.min_length, spec.max_length)
        start = rng.randint(lo, hi - length)
        out.append(Fact(atom, Interval(start, start + length)))
    return out


def generate_dataset(spec: GeneratorSpec, seed: int) -> Dataset:
    return Dataset(generate_facts(spec, seed))


def render_facts(facts: Sequence[Fact]) -> str:
    return "".join(f"{f}\n" for f in facts)


# -- random programs for differential testing ---------------------------------

@dataclass
class RandomProgramSpec:
    max_rules: int = 6
    predicates: int = 3
    max_arity: int = 2
    max_range: int = 3
    max_body: int = 3
    max_depth: int = 2
    constants: int = 3
    max_facts: int = 20
    horizon: int = 10
    operators: Tuple[str, ...] = ("Diamondminus", "Diamondplus", "Boxminus", "Boxplus", "Since", "Until")
    head_boxes: Tuple[str, ...] = ("Boxminus", "Boxplus")
    top_bottom: bool = True


def _range(rng: random.Random, spec: RandomProgramSpec) -> Interval:
    a = rng.randint(0, spec.max_range)
    b = rng.randint(a, spec.max_range)
    if a == b:
        return Interval(a, b)
    return Interval(a, b, rng.random() < 0.75, rng.random() < 0.75)


@dataclass
class _Sig:
    arities: dict = field(default_factory=dict)
    consts: Tuple[str, ...] = ()


def _term(rng: random.Random, sig: _Sig, vars_: Sequence[Var]):
    if rng.random() < 0.1:
        return rng.choice(sig.consts)
    return rng.choice(vars_)


def _atom(rng, sig: _Sig, vars_, pred=None) -> Atom:
    pred = pred or rng.choice(sorted(sig.arities))
    return Atom(pred, tuple(_term(rng, sig, vars_) for _ in range(sig.arities[pred])))


def _metric(rng, spec: RandomProgramSpec, sig: _Sig, vars_, depth: int) -> Metric:
    if spec.top_bottom and rng.random() < 0.03:
        return rng.choice((TOP, BOTTOM))
    if depth == 0 or rng.random() < 0.4:
        return _atom(rng, sig, vars_)
    op = rng.choice(spec.operators)
    if op in ("Since", "Until"):
        return Binary(op, _range(rng, spec), _metric(rng, spec, sig, vars_, depth - 1),
                      _metric(rng, spec, sig, vars_, depth - 1))
    return Unary(op, _range(rng, spec), _metric(rng, spec, sig, vars_, depth - 1))


def random_rule(rng: random.Random, spec: RandomProgramSpec, sig: _Sig) -> Rule:
    vars_ = [Var(n) for n in "xyz"[: rng.randint(1, 3)]]
    body = tuple(_metric(rng, spec, sig, vars_, spec.max_depth)
                 for _ in range(rng.randint(1, spec.max_body)))
    # head variables must come from body positions outside Since/Until left operands
    bound = sorted({t for m in body for a in relational_atoms(m, skip_left=True)
                    for t in a.args if isinstance(t, Var)}, key=lambda v: v.name)
    pred = rng.choice(sorted(sig.arities))
    args = tuple(rng.choice(bound) if bound and rng.random() < 0.9 else rng.choice(sig.consts)
                 for _ in range(sig.arities[pred]))
    head: Metric = Atom(pred, args)
    for _ in range(rng.choice((0, 0, 1, 1, 2))):
        if spec.head_boxes:
            head = Unary(rng.choice(spec.head_boxes), _range(rng, spec), head)
    rule = Rule(head, body)
    assert check_safety(rule) is None
    return rule


def random_program(rng: random.Random, spec: RandomProgramSpec = RandomProgramSpec()) -> Program:
    n_preds = rng.randint(1, spec.predicates)
    sig = _Sig({f"P{i}": rng.randint(0, spec.max_arity) for i in range(n_preds)},
               tuple(f"c{i}" for i in range(spec.constants)))
    rules = tuple(random_rule(rng, spec, sig) for _ in range(rng.randint(1, spec.max_rules)))
    return Program(rules, dict(sig.arities))


def random_dataset(rng: random.Random, program: Program, spec: RandomProgramSpec = RandomProgramSpec()) -> Dataset:
    consts = [f"c{i}" for i in range(spec.constants)]
    d = Dataset()
    preds = sorted(program.arities)
    for _ in range(rng.randint(0, spec.max_facts)):
        p = rng.choice(preds)
        atom = Atom(p, tuple(rng.choice(consts) for _ in range(program.arities[p])))
        a = rng.randint(0, spec.horizon)
        b = rng.randint(a, min(spec.horizon, a + 4))
        iv = Interval(a, b) if a == b else Interval(a, b, rng.random() < 0.7, rng.random() < 0.7)
        d.insert(atom, iv)
    return d


def random_instance(seed: int, spec: RandomProgramSpec = RandomProgramSpec()) -> Tuple[Program, Dataset]:
    rng = random.Random(seed)
    p = random_program(rng, spec)
    return p, random_dataset(rng, p, spec)
