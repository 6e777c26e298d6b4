"""Rule instances, one-step rule application and the naive/seminaive procedures."""

from __future__ import annotations

import itertools
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

from . import temporal as tm
from .dataset import Dataset, Fact, coalesce_merge, semantic_diff
from .evaluation import Evaluator, head_project
from .syntax import Atom, Metric, Program, Rule, Var, relational_atoms, substitute
from .temporal import Interval

Substitution = Dict[Var, str]


class InvariantError(AssertionError):
    pass


class RuleInstance(NamedTuple):
    rule: int
    body: Tuple[Tuple[Metric, Interval], ...]


# -- grounding ------------------------------------------------------------------

class CompiledRule:
    """Per-rule data reused across rounds."""

    def __init__(self, index: int, rule: Rule):
        self.index = index
        self.rule = rule
        self.positive = [a for m in rule.body for a in relational_atoms(m, skip_left=True)]
        self.occurrences = [a for m in rule.body for a in relational_atoms(m)]
        self.vars = sorted(rule.variables(), key=lambda v: v.name)
        self.head_pred = rule.head_atom.pred if rule.head_atom is not None else None

    @property
    def name(self) -> str:
        return f"r{self.index + 1}"

    def __repr__(self):
        return f"<{self.name}: {self.rule}>"


def compile_rules(rules) -> List[CompiledRule]:
    """Accepts a Program, (index, Rule) pairs, plain Rules or CompiledRules."""
    if isinstance(rules, Program):
        rules = rules.effective_rules()
    out = []
    for i, r in enumerate(rules):
        if isinstance(r, CompiledRule):
            out.append(r)
        elif isinstance(r, tuple):
            out.append(CompiledRule(*r))
        else:
            out.append(CompiledRule(i, r))
    return out


def _match(pattern: Atom, ground: Atom, sigma: Substitution) -> Optional[Substitution]:
    out = sigma
    copied = False
    for p, g in zip(pattern.args, ground.args):
        if isinstance(p, Var):
            v = out.get(p)
            if v is None:
                if not copied:
                    out, copied = dict(out), True
                out[p] = g
            elif v != g:
                return None
        elif p != g:
            return None
    return out


def _bound_positions(pattern: Atom, sigma: Substitution) -> Dict[int, str]:
    bound = {}
    for i, a in enumerate(pattern.args):
        if isinstance(a, Var):
            if a in sigma:
                bound[i] = sigma[a]
        else:
            bound[i] = a
    return bound


def join(patterns: Sequence[Atom], d: Dataset, sigma: Substitution) -> Iterator[Substitution]:
    """Substitutions extending ``sigma`` that map every pattern onto a stored atom."""
    if not patterns:
        yield sigma
        return
    best = min(range(len(patterns)),
               key=lambda i: len(patterns[i].args) - len(_bound_positions(patterns[i], sigma)))
    pat = patterns[best]
    rest = patterns[:best] + patterns[best + 1:]
    for g in list(d.matching(pat.pred, _bound_positions(pat, sigma))):
        s2 = _match(pat, g, sigma)
        if s2 is not None:
            yield from join(rest, d, s2)


# warn once the active-domain enumeration for unbound variables gets this large
ENUMERATION_LIMIT = 100_000


def _complete(cr: CompiledRule, sigma: Substitution, domain: Sequence[str]) -> Iterator[Substitution]:
    free = [v for v in cr.vars if v not in sigma]
    if not free:
        yield sigma
        return
    if len(domain) ** len(free) > ENUMERATION_LIMIT:
        names = ", ".join(v.name for v in free)
        warnings.warn(f"grounding {names} over {len(domain)} constants enumerates "
                      f"{len(domain) ** len(free)} substitutions", RuntimeWarning, stacklevel=2)
    for combo in itertools.product(domain, repeat=len(free)):
        s = dict(sigma)
        s.update(zip(free, combo))
        yield s


def active_domain(program_or_rules, d: Dataset) -> List[str]:
    consts = set(d.constants)
    for cr in compile_rules(program_or_rules):
        for a in cr.occurrences:
            consts.update(x for x in a.args if not isinstance(x, Var))
        if cr.rule.head_atom is not None:
            consts.update(x for x in cr.rule.head_atom.args if not isinstance(x, Var))
    return sorted(consts)


def ground_substitutions(rule, d: Dataset, domain: Optional[Sequence[str]] = None,
                         evaluator: Optional[Evaluator] = None) -> Iterator[Substitution]:
    """Every substitution over the active domain making all body holding sets non-empty."""
    cr = rule if isinstance(rule, CompiledRule) else CompiledRule(0, rule)
    if domain is None:
        domain = active_domain([cr], d)
    ev = evaluator or Evaluator(d)
    seen = set()
    for s0 in join(cr.positive, d, {}):
        for s in _complete(cr, s0, domain):
            key = tuple(s[v] for v in cr.vars)
            if key in seen:
                continue
            seen.add(key)
            if all(ev(substitute(m, s)) for m in cr.rule.body):
                yield s


# -- instances and derivation ---------------------------------------------------

def _instances_for(cr: CompiledRule, sigma: Substitution, ev: Evaluator,
                   old_ev: Optional[Evaluator] = None, delta_atoms: Optional[Set[Atom]] = None):
    """Instances of ``cr`` under ``sigma``; with ``old_ev``, only those not entailed by it."""
    ground = [substitute(m, sigma) for m in cr.rule.body]
    sets = []
    for g in ground:
        hs = ev(g)
        if not hs:
            return
        sets.append(hs)
    if old_ev is None:
        for combo in itertools.product(*sets):
            yield RuleInstance(cr.index, tuple(zip(ground, combo))), sigma
        return
    old_sets = []
    touched = False
    for g, hs in zip(ground, sets):
        if any(a in delta_atoms for a in relational_atoms(g)):
            old_sets.append(old_ev(g))
            touched = True
        else:
            old_sets.append(None)  # same holding set with or without delta
    if not touched:
        return
    for combo in itertools.product(*sets):
        for iv, old in zip(combo, old_sets):
            if old is not None and tm.covering(old, iv) is None:
                yield RuleInstance(cr.index, tuple(zip(ground, combo))), sigma
                break


def instances(rule, d: Dataset, domain=None) -> Set[RuleInstance]:
    cr = rule if isinstance(rule, CompiledRule) else CompiledRule(0, rule)
    ev = Evaluator(d)
    domain = active_domain([cr], d) if domain is None else domain
    out = set()
    for s0 in join(cr.positive, d, {}):
        for s in _complete(cr, s0, domain):
            out.update(inst for inst, _ in _instances_for(cr, s, ev))
    return out


class _Minus:
    """Read-only view of a dataset with some stored facts removed."""

    def __init__(self, base: Dataset, removed: Iterable[Fact]):
        self.base = base
        self.removed: Dict[Atom, Set[Interval]] = {}
        for atom, iv in removed:
            if iv not in base.holding(atom):
                raise ValueError(f"{Fact(atom, iv)} is not a stored fact of the dataset")
            self.removed.setdefault(atom, set()).add(iv)

    def holding(self, atom: Atom):
        hs = self.base.holding(atom)
        gone = self.removed.get(atom)
        if gone:
            return tuple(iv for iv in hs if iv not in gone)
        return hs


def _delta_substitutions(cr: CompiledRule, d: Dataset, delta_atoms: Dict[str, List[Atom]],
                         domain) -> Iterator[Substitution]:
    seen = set()
    for occ in cr.occurrences:
        for g in delta_atoms.get(occ.pred, ()):
            s0 = _match(occ, g, {})
            if s0 is None:
                continue
            for s1 in join(cr.positive, d, s0):
                for s in _complete(cr, s1, domain):
                    key = tuple(s[v] for v in cr.vars)
                    if key not in seen:
                        seen.add(key)
                        yield s


def _whole(d: Dataset, delta: List[Fact]) -> bool:
    """Check ``delta`` holds stored facts of ``d`` only; True when it holds all of them.

    With Delta = D every instance counts as new. Testing entailment by the empty
    dataset instead would wrongly skip instances whose conjuncts hold over no
    data at all, such as Top or Boxminus[0,1] Top.
    """
    for atom, iv in delta:
        if iv not in d.holding(atom):
            raise ValueError(f"{Fact(atom, iv)} is not a stored fact of the dataset")
    return len(set(delta)) == len(d)


def instances_relative(rule, d: Dataset, delta: Iterable[Fact], domain=None,
                       previous: Optional[Dataset] = None) -> Set[RuleInstance]:
    """Instances of ``rule`` over ``d`` with some conjunct not entailed by ``d`` minus ``delta``.

    With ``previous`` (the dataset before the last merge) a conjunct counts as
    new when ``previous`` does not entail it instead.
    """
    cr = rule if isinstance(rule, CompiledRule) else CompiledRule(0, rule)
    delta = list(delta)
    domain = active_domain([cr], d) if domain is None else domain
    if _whole(d, delta):
        return instances(cr, d, domain)
    ev = Evaluator(d)
    old_ev = Evaluator(_Minus(d, delta) if previous is None else previous)
    datoms = {f.atom for f in delta}
    by_pred: Dict[str, List[Atom]] = {}
    for a in datoms:
        by_pred.setdefault(a.pred, []).append(a)
    out = set()
    for s in _delta_substitutions(cr, d, by_pred, domain):
        out.update(inst for inst, _ in _instances_for(cr, s, ev, old_ev, datoms))
    return out


def apply_instance(cr_or_rule, inst: RuleInstance, sigma: Optional[Substitution] = None) -> Optional[Fact]:
    """The fact derived by an instance, or None when its body intervals do not meet."""
    rule = cr_or_rule.rule if isinstance(cr_or_rule, CompiledRule) else cr_or_rule
    inter = tm.intersect_all(iv for _, iv in inst.body)
    if inter is None:
        return None
    if sigma is None:
        sigma = {}
        for (m, _), pattern in zip(inst.body, rule.body):
            for p, g in zip(relational_atoms(pattern), relational_atoms(m)):
                sigma.update((a, c) for a, c in zip(p.args, g.args) if isinstance(a, Var))
    res = head_project(substitute(rule.head, sigma), inter)
    return None if res is None else Fact(*res)


@dataclass
class RoundStats:
    enumerated: int = 0
    applied: int = 0
    per_rule: Dict[str, int] = field(default_factory=dict)


class Round:
    """One round of rule application against a fixed snapshot of the dataset."""

    def __init__(self, rules: List[CompiledRule], d: Dataset, domain: Sequence[str],
                 delta: Optional[List[Fact]] = None, seen: Optional[set] = None,
                 previous: Optional[Dataset] = None):
        self.rules = rules
        self.d = d
        self.domain = domain
        self.delta = delta
        self.previous = previous
        self.seen = seen
        self.repeats = 0
        self.stats = RoundStats(per_rule={cr.name: 0 for cr in rules})

    def _instances(self, cr: CompiledRule, ev, old_ev, datoms, by_pred):
        if self.delta is None:
            for s0 in join(cr.positive, self.d, {}):
                for s in _complete(cr, s0, self.domain):
                    yield from _instances_for(cr, s, ev)
        else:
            for s in _delta_substitutions(cr, self.d, by_pred, self.domain):
                yield from _instances_for(cr, s, ev, old_ev, datoms)

    def run(self) -> List[Fact]:
        ev = Evaluator(self.d)
        old_ev = datoms = by_pred = None
        if self.delta is not None:
            old_ev = Evaluator(_Minus(self.d, self.delta) if self.previous is None else self.previous)
            datoms = {f.atom for f in self.delta}
            by_pred = {}
            for a in datoms:
                by_pred.setdefault(a.pred, []).append(a)
        out: List[Fact] = []
        st = self.stats
        for cr in self.rules:
            # set semantics: an instance reached twice counts once
            for inst, sigma in dict(self._instances(cr, ev, old_ev, datoms, by_pred)).items():
                st.enumerated += 1
                fact = apply_instance(cr, inst, sigma)
                if fact is None:
                    continue
                st.applied += 1
                st.per_rule[cr.name] += 1
                if self.seen is not None:
                    if inst in self.seen:
                        self.repeats += 1
                    else:
                        self.seen.add(inst)
                out.append(fact)
        return out


def derive_rule(rule, d: Dataset, domain=None) -> Set[Fact]:
    cr = rule if isinstance(rule, CompiledRule) else CompiledRule(0, rule)
    domain = active_domain([cr], d) if domain is None else domain
    return set(Round([cr], d, domain).run())


def apply_program(program, d: Dataset, domain=None) -> Set[Fact]:
    rules = compile_rules(program)
    domain = active_domain(rules, d) if domain is None else domain
    return set(Round(rules, d, domain).run())


def apply_program_relative(program, d: Dataset, delta: Iterable[Fact], domain=None) -> Set[Fact]:
    rules = compile_rules(program)
    domain = active_domain(rules, d) if domain is None else domain
    delta = list(delta)
    return set(Round(rules, d, domain, delta=None if _whole(d, delta) else delta).run())


def delta_update(c: Dataset, n: Iterable[Fact], d_prev: Dataset) -> Set[Fact]:
    """Stored facts of ``c`` containing some derived fact that ``d_prev`` does not entail."""
    out = set()
    for atom, iv in semantic_diff(n, d_prev):
        host = tm.covering(c.holding(atom), iv)
        if host is None:
            raise InvariantError(f"{Fact(atom, iv)} is not entailed by the coalesced dataset")
        out.add(Fact(atom, host))
    return out


# -- procedures -----------------------------------------------------------------

@dataclass
class IterationStats:
    iteration: int
    enumerated: int = 0
    applied: int = 0
    derived: int = 0
    fresh: int = 0
    extended: int = 0
    absorbed: int = 0
    delta: int = 0
    stored_facts: int = 0
    active_rules: int = 0
    repeats: int = 0
    wall_time: float = 0.0
    per_rule: Dict[str, int] = field(default_factory=dict)


CSV_COLUMNS = ("iteration", "enumerated", "applied", "derived", "fresh", "extended",
               "absorbed", "delta", "stored_facts", "active_rules", "repeats", "wall_time")


@dataclass
class DerivationStats:
    strategy: str
    iterations: List[IterationStats] = field(default_factory=list)

    @property
    def applied(self) -> int:
        return sum(it.applied for it in self.iterations)

    @property
    def enumerated(self) -> int:
        return sum(it.enumerated for it in self.iterations)

    @property
    def repeats(self) -> int:
        return sum(it.repeats for it in self.iterations)

    def applied_per_iteration(self) -> List[int]:
        return [it.applied for it in self.iterations]

    def rows(self):
        for it in self.iterations:
            row = {c: getattr(it, c) for c in CSV_COLUMNS}
            row["wall_time"] = f"{it.wall_time:.6f}"
            row["per_rule"] = ";".join(f"{k}={v}" for k, v in it.per_rule.items())
            yield row

    def write_csv(self, fh):
        import csv
        w = csv.DictWriter(fh, fieldnames=list(CSV_COLUMNS) + ["per_rule"], lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow(row)

    def summary(self) -> dict:
        return {
            "strategy": self.strategy,
            "iterations": len(self.iterations),
            "enumerated": self.enumerated,
            "applied": self.applied,
            "derived": sum(it.derived for it in self.iterations),
            "repeats": self.repeats,
            "peak_stored_facts": max((it.stored_facts for it in self.iterations), default=0),
            "wall_time": round(sum(it.wall_time for it in self.iterations), 6),
        }


@dataclass
class Materialisation:
    dataset: Dataset
    stats: DerivationStats
    reached_fixpoint: bool
    trace: List[Dataset] = field(default_factory=list)  # D' after 0, 1, ... iterations
    deltas: List[Set[Fact]] = field(default_factory=list)
    derived: List[List[Fact]] = field(default_factory=list)
    events: list = field(default_factory=list)
    flag_iteration: Optional[int] = None
    bounds: dict = field(default_factory=dict)  # iteration -> {rule name: t_r}

    def at(self, k: int) -> Dataset:
        """Partial materialisation after ``k`` iterations (needs ``trace=True``)."""
        if not self.trace:
            raise ValueError("run was not traced")
        return self.trace[min(k, len(self.trace) - 1)]


def _merge_counting(d_prev: Dataset, n: Sequence[Fact], st: IterationStats) -> Dataset:
    c = d_prev.copy()
    for atom, iv in n:
        kind = c.insert(atom, iv).kind
        setattr(st, kind, getattr(st, kind) + 1)
    return c


def naive(program, dataset: Dataset, max_iters: int, *, trace: bool = False,
          instrument: bool = False) -> Materialisation:
    """Naive materialisation, stopped at a fixpoint or after ``max_iters`` rounds."""
    rules = compile_rules(program)
    domain = active_domain(rules, dataset)
    d = dataset.copy()
    res = Materialisation(d, DerivationStats("naive"), False)
    if trace:
        res.trace.append(d)
    seen = set() if instrument else None
    for k in range(1, max_iters + 1):
        t0 = time.perf_counter()
        st = IterationStats(k, active_rules=len(rules))
        rnd = Round(rules, d, domain, seen=seen)
        n = rnd.run()
        st.enumerated, st.applied, st.per_rule = rnd.stats.enumerated, rnd.stats.applied, rnd.stats.per_rule
        st.derived, st.repeats = len(n), rnd.repeats
        c = _merge_counting(d, n, st)
        done = c == d
        if not done:
            d = c
        st.stored_facts = len(d)
        st.wall_time = time.perf_counter() - t0
        res.stats.iterations.append(st)
        if trace:
            res.trace.append(d)
            res.derived.append(n)
        if done:
            res.reached_fixpoint = True
            break
    res.dataset = d
    return res


Pruner = Callable[..., List[CompiledRule]]


RELATIVE_MODES = ("previous", "delta")


def seminaive_loop(program, dataset: Dataset, max_iters: int, *, strategy: str = "seminaive",
                   trace: bool = False, instrument: bool = False, check: bool = False,
                   pruner=None, relative: str = "previous") -> Materialisation:
    """Seminaive materialisation; ``pruner`` may shrink the active rules after each round.

    ``relative`` picks the test for new instances. "delta" keeps an instance when
    D' minus Delta fails to entail a conjunct. Delta holds whole coalesced facts,
    so an extended fact also hides its old part, and an instance whose intervals
    did not change (say through the left operand of Since) comes back. "previous"
    tests against the dataset of the round before, which applies every instance
    at most once and derives the same facts.
    """
    if relative not in RELATIVE_MODES:
        raise ValueError(f"unknown relative mode {relative!r}")
    rules = compile_rules(program)
    domain = active_domain(rules, dataset)
    d = dataset.copy()
    delta: Set[Fact] = set(d.facts())
    n: List[Fact] = []
    prev: Optional[Dataset] = None
    res = Materialisation(d, DerivationStats(strategy), False)
    if trace:
        res.trace.append(d)
    seen = set() if instrument else None
    for k in range(1, max_iters + 1):
        if check and coalesce_merge(d, n) != coalesce_merge(d, delta):
            raise InvariantError(f"iteration {k}: D' + N differs from D' + Delta")
        t0 = time.perf_counter()
        st = IterationStats(k, active_rules=len(rules))
        # the first round sees Delta = D' and applies every instance
        rnd = Round(rules, d, domain, delta=list(delta) if k > 1 else None, seen=seen,
                    previous=prev if relative == "previous" else None)
        n = rnd.run()
        st.enumerated, st.applied, st.per_rule = rnd.stats.enumerated, rnd.stats.applied, rnd.stats.per_rule
        st.derived, st.repeats = len(n), rnd.repeats
        c = _merge_counting(d, n, st)
        delta = delta_update(c, n, d)
        st.delta = len(delta)
        if not delta:
            st.stored_facts = len(d)
            st.wall_time = time.perf_counter() - t0
            res.stats.iterations.append(st)
            if trace:
                res.trace.append(d)
                res.deltas.append(delta)
                res.derived.append(n)
            res.reached_fixpoint = True
            break
        if pruner is not None:
            rules = pruner(k, d, c, rules, res)
        prev, d = d, c
        st.stored_facts = len(d)
        st.wall_time = time.perf_counter() - t0
        res.stats.iterations.append(st)
        if trace:
            res.trace.append(d)
            res.deltas.append(delta)
            res.derived.append(n)
    res.dataset = d
    return res


def seminaive(program, dataset: Dataset, max_iters: int, **kw) -> Materialisation:
    return seminaive_loop(program, dataset, max_iters, strategy="seminaive", **kw)
