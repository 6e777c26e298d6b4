"""Dependency analysis and the optimised seminaive procedure with rule pruning."""

from __future__ import annotations

import logging
from types import SimpleNamespace
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from . import temporal as tm
from .dataset import Dataset
from .evaluation import Evaluator
from .reasoner import (CompiledRule, Materialisation, _complete, active_domain, join,
                       seminaive_loop)
from .syntax import Metric, Program, Var, classify_program, relational_atoms, substitute, variables

log = logging.getLogger(__name__)


def dependency_graph(program: Program) -> nx.DiGraph:
    """Edge Q -> R whenever some rule mentions Q in its body and R in its head."""
    g = nx.DiGraph()
    rules = program.rules if isinstance(program, Program) else program
    for r in rules:
        g.add_nodes_from(sorted(r.predicates()))
        head = r.head_atom
        if head is None:
            continue
        for m in r.body:
            for a in relational_atoms(m):
                g.add_edge(a.pred, head.pred)
    return g


def recursive_predicates(program) -> FrozenSet[str]:
    """Predicates reachable by a path that contains a cycle."""
    g = dependency_graph(program)
    cyclic = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1:
            cyclic |= comp
        else:
            (p,) = comp
            if g.has_edge(p, p):
                cyclic.add(p)
    out = set(cyclic)
    for p in cyclic:
        out |= nx.descendants(g, p)
    return frozenset(out)


def is_recursive_metric(m: Metric, recursive: FrozenSet[str]) -> bool:
    return any(a.pred in recursive for a in relational_atoms(m))


@dataclass
class FragmentInfo:
    recursive_predicates: FrozenSet[str]
    non_recursive_predicates: FrozenSet[str]
    recursive_rules: FrozenSet[int]
    non_recursive_rules: FrozenSet[int]
    # S_r: body atoms whose predicates are all non-recursive, per rule index
    non_recursive_body: Dict[int, Tuple[Metric, ...]] = field(default_factory=dict)


def split_fragments(program: Program) -> FragmentInfo:
    rec = recursive_predicates(program)
    preds = frozenset(dependency_graph(program).nodes)
    rec_rules, nonrec_rules, s_r = set(), set(), {}
    for i, r in enumerate(program.rules):
        head = r.head_atom
        if head is not None:
            (rec_rules if head.pred in rec else nonrec_rules).add(i)
        s_r[i] = tuple(m for m in r.body if not is_recursive_metric(m, rec))
    return FragmentInfo(rec, preds - rec, frozenset(rec_rules), frozenset(nonrec_rules), s_r)


def same_on(d1: Dataset, d2: Dataset, preds: Iterable[str]) -> bool:
    """Do the two stores hold identical (normalised) facts for these predicates?"""
    for p in preds:
        atoms = set(d1.atoms(p)) | set(d2.atoms(p))
        if any(d1.holding(a) != d2.holding(a) for a in atoms):
            return False
    return True


def non_recursive_fixpoint_reached(d_prev: Dataset, c: Dataset, frags) -> bool:
    if isinstance(frags, Program):
        frags = split_fragments(frags)
    return same_on(d_prev, c, frags.non_recursive_predicates)


def coincide_until(d1: Dataset, d2: Dataset, t, direction: str = "forward") -> bool:
    """Do ``d1`` and ``d2`` agree on ``(-inf, t]`` (or ``[t, +inf)`` for backward)?"""
    cut = tm.truncate_right if direction == "forward" else tm.truncate_left
    for a in set(d1.atoms()) | set(d2.atoms()):
        h1, h2 = d1.holding(a), d2.holding(a)
        if h1 != h2 and cut(h1, t) != cut(h2, t):
            return False
    return True


def metric_substitutions(m: Metric, d: Dataset, domain: Sequence[str]) -> Iterator[Dict[Var, str]]:
    """Groundings of ``m`` whose positive relational atoms are all stored in ``d``."""
    positive = list(relational_atoms(m, skip_left=True))
    vs = sorted(variables(m), key=lambda v: v.name)

    shape = SimpleNamespace(vars=vs)  # _complete only needs the variable list
    for s0 in join(positive, d, {}):
        yield from _complete(shape, s0, domain)


def holding_sets(m: Metric, d: Dataset, domain: Sequence[str], ev: Optional[Evaluator] = None):
    ev = ev or Evaluator(d)
    for s in metric_substitutions(m, d, domain):
        hs = ev(substitute(m, s))
        if hs:
            yield hs


def satisfiable(m: Metric, d: Dataset, domain: Sequence[str], ev=None) -> bool:
    return next(holding_sets(m, d, domain, ev), None) is not None


def extreme_point(m: Metric, d: Dataset, domain: Sequence[str], direction: str = "forward", ev=None):
    """Latest right endpoint (earliest left endpoint for backward) over all groundings."""
    if direction == "forward":
        return max((hs[-1].hi for hs in holding_sets(m, d, domain, ev)), default=tm.NEG_INF)
    return min((hs[0].lo for hs in holding_sets(m, d, domain, ev)), default=tm.INF)


def rule_bound(s_r: Sequence[Metric], d: Dataset, domain, direction: str = "forward", ev=None):
    """t_r: the min (max for backward) of the extreme points of the atoms in S_r."""
    pts = [extreme_point(m, d, domain, direction, ev) for m in s_r]
    if direction == "forward":
        return min(pts, default=tm.INF)
    return max(pts, default=tm.NEG_INF)


class PruneEvent(NamedTuple):
    iteration: int
    rule: str
    reason: str  # non-recursive | unsatisfiable | forward-bounded | backward-bounded
    bound: Optional[object] = None


def prune_unsatisfiable(active: List[CompiledRule], d_prev: Dataset, frags: FragmentInfo,
                        domain=None, keep=frozenset()) -> Tuple[List[CompiledRule], List[CompiledRule]]:
    """Drop rules with a non-recursive body atom that no grounding satisfies in ``d_prev``."""
    domain = active_domain(active, d_prev) if domain is None else domain
    ev = Evaluator(d_prev)
    kept, removed = [], []
    for cr in active:
        dead = cr.index not in keep and any(
            not satisfiable(m, d_prev, domain, ev) for m in frags.non_recursive_body[cr.index])
        (removed if dead else kept).append(cr)
    return kept, removed


def prune_bounded(active: List[CompiledRule], d_prev: Dataset, c: Dataset, frags: FragmentInfo,
                  direction: str = "forward", domain=None, keep=frozenset()):
    """Drop rules whose body cannot hold beyond t_r once ``d_prev`` and ``c`` agree up to t_r.

    Returns (kept, [(rule, t_r)] removed, {rule name: t_r}).
    """
    domain = active_domain(active, d_prev) if domain is None else domain
    ev = Evaluator(d_prev)
    kept, removed, bounds = [], [], {}
    for cr in active:
        t_r = rule_bound(frags.non_recursive_body[cr.index], d_prev, domain, direction, ev)
        bounds[cr.name] = t_r
        unbounded = t_r == (tm.INF if direction == "forward" else tm.NEG_INF)
        if cr.index not in keep and not unbounded and coincide_until(d_prev, c, t_r, direction):
            removed.append((cr, t_r))
        else:
            kept.append(cr)
    return kept, removed, bounds


def optimised(program: Program, dataset: Dataset, max_iters: int, *, explain: bool = False,
              keep: Iterable[int] = (), **kw) -> Materialisation:
    """Seminaive materialisation that discards rules once they can derive nothing new.

    ``keep`` lists rule indices exempt from pruning (used to check pruning is harmless).
    """
    frags = split_fragments(program)
    domain = active_domain(program, dataset)
    keep = frozenset(keep)
    state = {"flag": False}

    def note(res, ev: PruneEvent):
        res.events.append(ev)
        if explain:
            bound = "" if ev.bound is None else f" t_r={tm.format_time(ev.bound)}"
            log.info("iteration %d: removed %s (%s)%s", ev.iteration, ev.rule, ev.reason, bound)

    def pruner(k, d_prev, c, active, res):
        if not state["flag"] and non_recursive_fixpoint_reached(d_prev, c, frags):
            state["flag"] = True
            res.flag_iteration = k
            nxt = []
            for cr in active:
                if cr.index in frags.recursive_rules or cr.index in keep:
                    nxt.append(cr)
                else:
                    note(res, PruneEvent(k, cr.name, "non-recursive"))
            active, removed = prune_unsatisfiable(nxt, d_prev, frags, domain, keep)
            for cr in removed:
                note(res, PruneEvent(k, cr.name, "unsatisfiable"))
        if state["flag"] and active:
            kind = classify_program(cr.rule for cr in active)
            if kind in ("forward", "both", "backward"):
                direction = "backward" if kind == "backward" else "forward"
                active, removed, bounds = prune_bounded(active, d_prev, c, frags, direction,
                                                        domain, keep)
                res.bounds.setdefault(k, {}).update(bounds)
                for cr, t_r in removed:
                    note(res, PruneEvent(k, cr.name, f"{direction}-bounded", t_r))
        return active

    return seminaive_loop(program, dataset, max_iters, strategy="optimised", pruner=pruner, **kw)
