"""Brute-force pointwise reasoner over a finite time grid, for differential testing.

The window [lo, hi] must have integer endpoints. Grid index ``j`` stands for
the time point ``lo + j/2``. Even indices are integers. Odd indices are
half-integers, each representing the whole open unit interval around it: an
interpretation built from integer-endpoint intervals is constant on every
such interval, so one sample decides it. Quantifiers "for some / all t' with
t - t' in rho" then range over the grid pieces that t - rho meets, which makes
the evaluation exact rather than sampled.

Vectors are numpy bool arrays indexed by grid position. Everything outside
the window counts as false, so results near the window edges are only
trustworthy inside :func:`safe_region`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .dataset import Dataset
from .syntax import Atom, Binary, Bottom, Metric, Program, Top, Unary, Var, relational_atoms, substitute
from .temporal import Interval


def _int_end(x, what):
    if x in (math.inf, -math.inf):
        return x
    f = Fraction(x)
    if f.denominator != 1:
        raise ValueError(f"{what} endpoint {x} is not an integer")
    return int(f)


@dataclass
class GridInterpretation:
    window: Interval
    truth: Dict[Atom, np.ndarray] = field(default_factory=dict)
    domain: Tuple[str, ...] = ()

    def __post_init__(self):
        lo, hi = self.window.lo, self.window.hi
        if not all(isinstance(x, (int, Fraction)) and Fraction(x).denominator == 1 for x in (lo, hi)):
            raise ValueError("grid window needs finite integer endpoints")
        self.lo, self.hi = int(lo), int(hi)
        self.size = 2 * (self.hi - self.lo) + 1

    def points(self) -> List[Fraction]:
        return [self.time(j) for j in range(self.size)]

    def time(self, j: int) -> Fraction:
        return self.lo + Fraction(j, 2)

    def index(self, t) -> int:
        j = (Fraction(t) - self.lo) * 2
        if j.denominator != 1 or not 0 <= j < self.size:
            raise ValueError(f"{t} is not a grid point of {self.window}")
        return int(j)

    def empty(self) -> np.ndarray:
        return np.zeros(self.size, dtype=bool)

    def vector(self, atom: Atom) -> np.ndarray:
        v = self.truth.get(atom)
        return self.empty() if v is None else v

    def copy(self) -> "GridInterpretation":
        return GridInterpretation(self.window, {a: v.copy() for a, v in self.truth.items()}, self.domain)

    def mark(self, atom: Atom, v: np.ndarray):
        if v.any():
            cur = self.truth.get(atom)
            self.truth[atom] = v.copy() if cur is None else cur | v

    def __eq__(self, other):
        if not isinstance(other, GridInterpretation):
            return NotImplemented
        keys = {a for a, v in self.truth.items() if v.any()} | {a for a, v in other.truth.items() if v.any()}
        return self.window == other.window and all(
            np.array_equal(self.vector(a), other.vector(a)) for a in keys)

    def to_dataset(self) -> Dataset:
        """Maximal runs of true grid pieces, read back as intervals (clipped to the window)."""
        out = Dataset()
        for atom, v in self.truth.items():
            j = 0
            while j < self.size:
                if not v[j]:
                    j += 1
                    continue
                start = j
                while j + 1 < self.size and v[j + 1]:
                    j += 1
                lo = self.time(start) if start % 2 == 0 else self.time(start - 1)
                hi = self.time(j) if j % 2 == 0 else self.time(j + 1)
                out.insert(atom, Interval(lo, hi, start % 2 == 0, j % 2 == 0))
                j += 1
        return out


def _piece_holds(iv: Interval, j: int, g: GridInterpretation) -> bool:
    t = g.time(j)
    lo_ok = iv.lo < t or (iv.lo == t and iv.lo_closed)
    hi_ok = t < iv.hi or (t == iv.hi and iv.hi_closed)
    return lo_ok and hi_ok


def grid_load(d: Dataset, window: Interval, domain: Iterable[str] = ()) -> GridInterpretation:
    g = GridInterpretation(window, {}, tuple(sorted(set(domain) | set(d.constants))))
    for atom, hs in d.items():
        v = g.empty()
        for iv in hs:
            _int_end(iv.lo, "fact")
            _int_end(iv.hi, "fact")
            for j in range(g.size):
                if _piece_holds(iv, j, g):
                    v[j] = True
        g.mark(atom, v)
    return g


# -- range arithmetic on grid indices ------------------------------------------

def _past_bounds(n: int, rng: Interval) -> Tuple[np.ndarray, np.ndarray]:
    """For each index i, the inclusive index range of pieces met by t_i - rng."""
    a, b = _int_end(rng.lo, "range"), _int_end(rng.hi, "range")
    i = np.arange(n)
    even = i % 2 == 0
    if b == math.inf:
        lo = np.full(n, -1)  # reaches past the window start
    else:
        lo = i - 2 * b + np.where(even & (not rng.hi_closed), 1, 0)
    hi = i - 2 * a - np.where(even & (not rng.lo_closed), 1, 0)
    return lo, hi


def _window_count(v: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Number of true entries and number of entries in v[lo..hi] clipped to the grid."""
    n = len(v)
    cs = np.concatenate([[0], np.cumsum(v)])
    l = np.clip(lo, 0, n)
    h = np.clip(hi, -1, n - 1)
    width = np.maximum(h - l + 1, 0)
    hits = np.where(width > 0, cs[np.maximum(h + 1, 0)] - cs[np.minimum(l, n)], 0)
    return hits, width


def diamond_past(v: np.ndarray, rng: Interval) -> np.ndarray:
    hits, _ = _window_count(v, *_past_bounds(len(v), rng))
    return hits > 0


def box_past(v: np.ndarray, rng: Interval) -> np.ndarray:
    lo, hi = _past_bounds(len(v), rng)
    hits, _ = _window_count(v, lo, hi)
    if rng.hi == math.inf:
        return np.zeros(len(v), dtype=bool)  # always reaches outside the window
    return hits == np.maximum(hi - lo + 1, 0)


def since(v1: np.ndarray, v2: np.ndarray, rng: Interval) -> np.ndarray:
    n = len(v2)
    lo, hi = _past_bounds(n, rng)
    cs1 = np.concatenate([[0], np.cumsum(v1)])

    def all1(a, b):  # v1 true on every index in [a, b]
        return b < a or cs1[b + 1] - cs1[a] == b - a + 1

    zero_closed = rng.lo == 0 and rng.lo_closed
    out = np.zeros(n, dtype=bool)
    for i in range(n):
        for j in range(max(lo[i], 0), min(hi[i], i) + 1):
            if not v2[j]:
                continue
            if j == i:
                # t' = t, or (odd i only) t' earlier inside the same open piece
                if zero_closed or (i % 2 == 1 and v1[i]):
                    out[i] = True
                    break
                continue
            first = j if j % 2 else j + 1
            last = i if i % 2 else i - 1
            if all1(first, last):
                out[i] = True
                break
    return out


def _rev(v: np.ndarray) -> np.ndarray:
    return v[::-1].copy()


class GridEvaluator:
    """Truth vectors of ground metric atoms over one grid interpretation."""

    def __init__(self, g: GridInterpretation):
        self.g = g
        self.cache: Dict[Metric, np.ndarray] = {}

    def __call__(self, m: Metric) -> np.ndarray:
        v = self.cache.get(m)
        if v is None:
            v = self._eval(m)
            self.cache[m] = v
        return v

    def _eval(self, m: Metric) -> np.ndarray:
        g = self.g
        if isinstance(m, Atom):
            return g.vector(m)
        if isinstance(m, Top):
            return np.ones(g.size, dtype=bool)
        if isinstance(m, Bottom):
            return g.empty()
        if isinstance(m, Unary):
            v = self(m.arg)
            if m.op == "Diamondminus":
                return diamond_past(v, m.rng)
            if m.op == "Boxminus":
                return box_past(v, m.rng)
            if m.op == "Diamondplus":
                return _rev(diamond_past(_rev(v), m.rng))
            if m.op == "Boxplus":
                return _rev(box_past(_rev(v), m.rng))
        if isinstance(m, Binary):
            v1, v2 = self(m.left), self(m.right)
            if m.op == "Since":
                return since(v1, v2, m.rng)
            if m.op == "Until":
                return _rev(since(_rev(v1), _rev(v2), m.rng))
        raise ValueError(f"cannot evaluate {m!r}")


def grid_holds(g: GridInterpretation, m: Metric, t) -> bool:
    return bool(GridEvaluator(g)(m)[g.index(t)])


def _head_marks(head: Metric, v: np.ndarray) -> Optional[Tuple[Atom, np.ndarray]]:
    # a boxed head true on a set of pieces forces its argument on the swept pieces
    while isinstance(head, Unary):
        if head.op == "Boxplus":
            v = diamond_past(v, head.rng)
        elif head.op == "Boxminus":
            v = _rev(diamond_past(_rev(v), head.rng))
        else:
            raise ValueError(f"{head.op} is not allowed in rule heads")
        head = head.arg
    if isinstance(head, Atom):
        return head, v
    return None


def _rule_vars(rule) -> List[Var]:
    seen = {}
    for m in (rule.head,) + tuple(rule.body):
        for a in relational_atoms(m):
            for x in a.args:
                if isinstance(x, Var):
                    seen[x] = None
    return sorted(seen, key=lambda v: v.name)


def _program_constants(program) -> set:
    out = set()
    for r in program.rules:
        for m in (r.head,) + tuple(r.body):
            for a in relational_atoms(m):
                out.update(x for x in a.args if not isinstance(x, Var))
    return out


def grid_step(program: Program, g: GridInterpretation) -> GridInterpretation:
    """One application of the immediate consequence operator, on the grid."""
    ev = GridEvaluator(g)
    out = g.copy()
    domain = sorted(set(g.domain) | _program_constants(program))
    for rule in program.rules:
        vs = _rule_vars(rule)
        positive = [a for m in rule.body for a in relational_atoms(m, skip_left=True)]
        for combo in itertools.product(domain, repeat=len(vs)):
            sigma = dict(zip(vs, combo))
            if any(not g.vector(substitute(a, sigma)).any() for a in positive):
                continue
            body = np.ones(g.size, dtype=bool)
            for m in rule.body:
                body &= ev(substitute(m, sigma))
                if not body.any():
                    break
            if not body.any():
                continue
            marked = _head_marks(substitute(rule.head, sigma), body)
            if marked is not None:
                out.mark(*marked)
    return out


def grid_materialise(program: Program, g: GridInterpretation, k: int) -> List[GridInterpretation]:
    """The grid interpretations after 0..k steps."""
    out = [g]
    for _ in range(k):
        out.append(grid_step(program, out[-1]))
    return out


def _reach(m: Metric) -> float:
    if isinstance(m, Unary):
        return _int_end(m.rng.hi, "range") + _reach(m.arg)
    if isinstance(m, Binary):
        return _int_end(m.rng.hi, "range") + max(_reach(m.left), _reach(m.right))
    return 0


def program_reach(program: Program) -> float:
    """Largest distance one rule application can carry information along the timeline."""
    return max((_reach(r.head) + max((_reach(m) for m in r.body), default=0)
                for r in program.rules), default=0)


def safe_region(program: Program, window: Interval, k: int) -> Optional[Interval]:
    """The part of ``window`` unaffected by truncation after ``k`` steps (None if nothing is)."""
    shrink = k * program_reach(program)
    if shrink == math.inf:
        return None
    lo, hi = window.lo + shrink, window.hi - shrink
    return Interval(lo, hi) if lo <= hi else None


@dataclass
class Disagreement:
    atom: Atom
    time: Fraction
    engine: bool
    oracle: bool

    def __str__(self):
        return f"{self.atom} at {self.time}: engine={self.engine} oracle={self.oracle}"


def compare(engine: Dataset, g: GridInterpretation, region: Interval) -> List[Disagreement]:
    """Every (atom, grid point) inside ``region`` where the two disagree."""
    idx = [j for j in range(g.size) if _piece_holds(region, j, g)]
    out = []
    atoms = sorted(set(engine.atoms()) | set(g.truth), key=lambda a: (a.pred, a.args))
    for atom in atoms:
        hs = engine.holding(atom)
        v = g.vector(atom)
        for j in idx:
            e = any(_piece_holds(iv, j, g) for iv in hs)
            if e != bool(v[j]):
                out.append(Disagreement(atom, g.time(j), e, bool(v[j])))
    return out
