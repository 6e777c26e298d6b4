"""Exact time points, intervals and holding sets over the rational timeline.

Finite endpoints are always :class:`fractions.Fraction`; the two infinities are
the float values ``-inf``/``+inf``, which order correctly against fractions.
A *holding set* is a tuple of intervals that is sorted, pairwise disjoint and
non-adjacent, i.e. the unique normal form of a finite union of intervals.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

INF = math.inf
NEG_INF = -math.inf

Endpoint = Union[Fraction, float]
HoldingSet = Tuple["Interval", ...]


def as_time(value) -> Endpoint:
    """Coerce ints, strings and fractions to an exact endpoint."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if math.isinf(value):
            return value
        raise TypeError("finite float endpoints are not exact; use Fraction or str")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_time(value)
    raise TypeError(f"cannot use {value!r} as a time point")


def parse_time(text: str) -> Endpoint:
    """Parse ``5``, ``2.75``, ``11/4``, ``-inf`` or ``+inf``."""
    s = text.strip()
    if s in ("inf", "+inf"):
        return INF
    if s == "-inf":
        return NEG_INF
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"invalid time point {text!r}") from None


def format_time(t: Endpoint) -> str:
    if t == INF:
        return "+inf"
    if t == NEG_INF:
        return "-inf"
    if t.denominator == 1:
        return str(t.numerator)
    return f"{t.numerator}/{t.denominator}"


class EmptyIntervalError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Interval:
    lo: Endpoint
    hi: Endpoint
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        lo, hi = as_time(self.lo), as_time(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo == INF or hi == NEG_INF:
            raise EmptyIntervalError(f"empty interval {self}")
        # infinite endpoints are always open
        if lo == NEG_INF:
            object.__setattr__(self, "lo_closed", False)
        if hi == INF:
            object.__setattr__(self, "hi_closed", False)
        if lo > hi or (lo == hi and not (self.lo_closed and self.hi_closed)):
            raise EmptyIntervalError(f"empty interval {self}")

    @classmethod
    def point(cls, t) -> "Interval":
        return cls(t, t, True, True)

    @classmethod
    def closed(cls, lo, hi) -> "Interval":
        return cls(lo, hi, True, True)

    @property
    def is_punctual(self) -> bool:
        return self.lo == self.hi

    @property
    def is_bounded(self) -> bool:
        return self.lo != NEG_INF and self.hi != INF

    def sort_key(self):
        return (self.lo, not self.lo_closed, self.hi, self.hi_closed)

    def __contains__(self, t) -> bool:
        return contains_point(self, t)

    def __str__(self) -> str:
        return (("[" if self.lo_closed else "(") + format_time(self.lo) + ","
                + format_time(self.hi) + ("]" if self.hi_closed else ")"))

    def __repr__(self) -> str:
        return f"Interval({self})"


def make_interval(lo, hi, lo_closed=True, hi_closed=True) -> Optional[Interval]:
    """Like ``Interval(...)`` but returns None instead of raising on empty input."""
    lo, hi = as_time(lo), as_time(hi)
    if lo == INF or hi == NEG_INF:
        return None
    if lo == NEG_INF:
        lo_closed = False
    if hi == INF:
        hi_closed = False
    if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
        return None
    return Interval(lo, hi, lo_closed, hi_closed)


_INTERVAL_RE = re.compile(r"^\s*([\[(])\s*([^,\s]+)\s*,\s*([^,\s\])]+)\s*([\])])\s*$")


def parse_interval(text: str) -> Interval:
    """Parse ``[a,b]``, ``(a,b]``, ``[a,b)`` or ``(a,b)``; a bare time is punctual."""
    m = _INTERVAL_RE.match(text)
    if not m:
        t = parse_time(text)
        return Interval(t, t)
    return Interval(parse_time(m.group(2)), parse_time(m.group(3)),
                    m.group(1) == "[", m.group(4) == "]")


def contains_point(iv: Interval, t) -> bool:
    if t < iv.lo or t > iv.hi:
        return False
    if t == iv.lo and not iv.lo_closed:
        return False
    if t == iv.hi and not iv.hi_closed:
        return False
    return True


def contains(outer: Interval, inner: Interval) -> bool:
    """True iff ``inner`` is a subset of ``outer``."""
    if inner.lo < outer.lo or (inner.lo == outer.lo and inner.lo_closed and not outer.lo_closed):
        return False
    if inner.hi > outer.hi or (inner.hi == outer.hi and inner.hi_closed and not outer.hi_closed):
        return False
    return True


def intersect(a: Interval, b: Interval) -> Optional[Interval]:
    """Set intersection, or None when empty."""
    if a.lo > b.lo:
        lo, lo_c = a.lo, a.lo_closed
    elif b.lo > a.lo:
        lo, lo_c = b.lo, b.lo_closed
    else:
        lo, lo_c = a.lo, a.lo_closed and b.lo_closed
    if a.hi < b.hi:
        hi, hi_c = a.hi, a.hi_closed
    elif b.hi < a.hi:
        hi, hi_c = b.hi, b.hi_closed
    else:
        hi, hi_c = a.hi, a.hi_closed and b.hi_closed
    return make_interval(lo, hi, lo_c, hi_c)


def intersect_all(intervals: Iterable[Interval]) -> Optional[Interval]:
    it = iter(intervals)
    acc = next(it, None)
    for iv in it:
        if acc is None:
            return None
        acc = intersect(acc, iv)
    return acc


def _touch(a: Interval, b: Interval) -> bool:
    """a lies left of b (by lo); do they overlap or meet with a closed side?"""
    if a.hi > b.lo:
        return True
    if a.hi == b.lo:
        return a.hi_closed or b.lo_closed
    return False


def union_if_coalescable(a: Interval, b: Interval) -> Optional[Interval]:
    """Convex union of two overlapping or adjacent intervals, else None."""
    if b.sort_key() < a.sort_key():
        a, b = b, a
    if not _touch(a, b):
        return None
    if b.hi > a.hi:
        hi, hi_c = b.hi, b.hi_closed
    elif a.hi > b.hi:
        hi, hi_c = a.hi, a.hi_closed
    else:
        hi, hi_c = a.hi, a.hi_closed or b.hi_closed
    lo_c = a.lo_closed or (a.lo == b.lo and b.lo_closed)
    return Interval(a.lo, hi, lo_c, hi_c)


def normalize(raw: Iterable[Interval]) -> HoldingSet:
    """Sorted, disjoint, non-adjacent representation of the union of ``raw``."""
    ivs = sorted(raw, key=Interval.sort_key)
    if len(ivs) < 2:
        return tuple(ivs)
    out = [ivs[0]]
    for iv in ivs[1:]:
        merged = union_if_coalescable(out[-1], iv)
        if merged is None:
            out.append(iv)
        else:
            out[-1] = merged
    return tuple(out)


def holds_at(hs: Sequence[Interval], t) -> bool:
    return any(contains_point(iv, t) for iv in hs)


def covering(hs: Sequence[Interval], iv: Interval) -> Optional[Interval]:
    """The member of a holding set containing ``iv``, if any."""
    for member in hs:
        if member.lo > iv.hi:
            break
        if contains(member, iv):
            return member
    return None


# -- Minkowski arithmetic -----------------------------------------------------

def _add(x: Endpoint, y: Endpoint) -> Endpoint:
    # inf + (-inf) never arises: callers pair a left end with a left end
    return x + y


def shift(iv: Interval, rng: Interval) -> Optional[Interval]:
    """Minkowski sum ``{t + d : t in iv, d in rng}``."""
    return make_interval(_add(iv.lo, rng.lo), _add(iv.hi, rng.hi),
                         iv.lo_closed and rng.lo_closed, iv.hi_closed and rng.hi_closed)


def reflect(iv: Interval) -> Interval:
    """Image under ``t -> -t``."""
    return Interval(-iv.hi, -iv.lo, iv.hi_closed, iv.lo_closed)


def reflect_set(hs: Iterable[Interval]) -> HoldingSet:
    return normalize(reflect(iv) for iv in hs)


def shift_set(hs: Iterable[Interval], rng: Interval) -> HoldingSet:
    return normalize(s for s in (shift(iv, rng) for iv in hs) if s is not None)


def box_past(component: Interval, rng: Interval) -> Optional[Interval]:
    """Points t whose look-back window ``t - rng`` fits inside ``component``."""
    # left end: t - rng.hi >= component.lo
    if component.lo == NEG_INF:
        lo, lo_c = NEG_INF, False
    elif rng.hi == INF:
        return None
    else:
        lo, lo_c = component.lo + rng.hi, component.lo_closed or not rng.hi_closed
    # right end: t - rng.lo <= component.hi
    if component.hi == INF:
        hi, hi_c = INF, False
    else:
        hi, hi_c = component.hi + rng.lo, component.hi_closed or not rng.lo_closed
    return make_interval(lo, hi, lo_c, hi_c)


def truncate_right(hs: Iterable[Interval], t: Endpoint) -> HoldingSet:
    """Restrict a holding set to ``(-inf, t]``."""
    if t == INF:
        return tuple(hs)
    cut = Interval(NEG_INF, t, False, True)
    return tuple(x for x in (intersect(iv, cut) for iv in hs) if x is not None)


def truncate_left(hs: Iterable[Interval], t: Endpoint) -> HoldingSet:
    """Restrict a holding set to ``[t, +inf)``."""
    if t == NEG_INF:
        return tuple(hs)
    cut = Interval(t, INF, True, False)
    return tuple(x for x in (intersect(iv, cut) for iv in hs) if x is not None)


UNIVERSE = Interval(NEG_INF, INF, False, False)
ZERO = Interval(Fraction(0), Fraction(0))
