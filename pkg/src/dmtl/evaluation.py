"""Holding sets of ground metric atoms over a dataset, and head projection."""

from __future__ import annotations

from typing import Dict, Optional, Tuple

from . import temporal as tm
from .syntax import Atom, Binary, Bottom, Metric, Top, Unary
from .temporal import HoldingSet, Interval, UNIVERSE, ZERO


def since_combine(left: Optional[Interval], right: Interval, rng: Interval) -> HoldingSet:
    """Points t with a witness t' in ``right``, t - t' in ``rng`` and (t', t) inside ``left``.

    ``left`` may be None (left operand nowhere true); then only the t' = t
    witnesses remain, which exist iff 0 is in ``rng``.
    """
    out = []
    if tm.contains_point(rng, 0):
        out.append(right)
    if left is not None:
        # t' < t with (t', t) inside left forces left.lo <= t' < left.hi and t <= left.hi
        lo_part = tm.make_interval(left.lo, left.hi, True, False)
        witnesses = tm.intersect(right, lo_part) if lo_part is not None else None
        if witnesses is not None:
            reach = tm.shift(witnesses, rng)
            if reach is not None:
                cap = tm.make_interval(tm.NEG_INF, left.hi, False, True)
                if cap is not None:
                    hit = tm.intersect(reach, cap)
                    if hit is not None:
                        out.append(hit)
    return tm.normalize(out)


def until_combine(left: Optional[Interval], right: Interval, rng: Interval) -> HoldingSet:
    """Time mirror of :func:`since_combine`."""
    res = since_combine(None if left is None else tm.reflect(left), tm.reflect(right), rng)
    return tm.reflect_set(res)


def _box_past(hs: HoldingSet, rng: Interval) -> HoldingSet:
    return tm.normalize(x for x in (tm.box_past(c, rng) for c in hs) if x is not None)


def _since(h1: HoldingSet, h2: HoldingSet, rng: Interval) -> HoldingSet:
    parts = []
    if tm.contains_point(rng, 0):
        parts.extend(h2)
    for i2 in h2:
        for i1 in h1:
            parts.extend(since_combine(i1, i2, rng))
    return tm.normalize(parts)


class Evaluator:
    """Memoising evaluator of ground metric atoms against one dataset snapshot.

    ``source`` needs only a ``holding(atom)`` method; create a fresh evaluator
    whenever the underlying dataset changes.
    """

    def __init__(self, source):
        self.source = source
        self.cache: Dict[Metric, HoldingSet] = {}

    def __call__(self, m: Metric) -> HoldingSet:
        if isinstance(m, Atom):
            return self.source.holding(m)
        hs = self.cache.get(m)
        if hs is None:
            hs = self._eval(m)
            self.cache[m] = hs
        return hs

    def _eval(self, m: Metric) -> HoldingSet:
        if isinstance(m, Top):
            return (UNIVERSE,)
        if isinstance(m, Bottom):
            return ()
        if isinstance(m, Unary):
            arg = self(m.arg)
            if not arg:
                return ()
            op = m.op
            if op == "Diamondminus":
                return tm.shift_set(arg, m.rng)
            if op == "Diamondplus":
                return tm.shift_set(arg, tm.reflect(m.rng))
            if op == "Boxminus":
                return _box_past(arg, m.rng)
            if op == "Boxplus":
                return tm.reflect_set(_box_past(tm.reflect_set(arg), m.rng))
            raise ValueError(f"unknown operator {op}")
        if isinstance(m, Binary):
            h2 = self(m.right)
            if not h2:
                return ()
            h1 = self(m.left)
            if m.op == "Since":
                return _since(h1, h2, m.rng)
            if m.op == "Until":
                return tm.reflect_set(_since(tm.reflect_set(h1), tm.reflect_set(h2), m.rng))
            raise ValueError(f"unknown operator {m.op}")
        raise TypeError(f"not a metric atom: {m!r}")


def eval_ground(m: Metric, d) -> HoldingSet:
    """Normalised set of time points at which ground ``m`` holds over ``d``."""
    return Evaluator(d)(m)


def entails_metric(d, m: Metric, iv: Interval) -> bool:
    return tm.covering(eval_ground(m, d), iv) is not None


def head_project(head: Metric, iv: Interval) -> Optional[Tuple[Atom, Interval]]:
    """The relational fact entailed by ``head@iv``; None for Top heads."""
    while isinstance(head, Unary):
        if head.op == "Boxminus":
            iv = tm.shift(iv, tm.reflect(head.rng))
        elif head.op == "Boxplus":
            iv = tm.shift(iv, head.rng)
        else:
            raise ValueError(f"{head.op} is not allowed in rule heads")
        head = head.arg
    if isinstance(head, Atom):
        return head, iv
    return None
