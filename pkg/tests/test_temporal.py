from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmtl import temporal as tm
from dmtl.temporal import INF, NEG_INF, EmptyIntervalError, Interval

from strategies import intervals, ranges


def iv(text):
    return tm.parse_interval(text)


def probe_points(*ivs):
    """Endpoints, midpoints and outside points of the given intervals."""
    pts = set()
    for i in ivs:
        for x in (i.lo, i.hi):
            if x not in (INF, NEG_INF):
                pts.update({x, x - Fraction(1, 4), x + Fraction(1, 4)})
        if i.lo != NEG_INF and i.hi != INF:
            pts.add((i.lo + i.hi) / 2)
    return sorted(pts) or [Fraction(0)]


def test_time_forms():
    assert tm.parse_time("5") == 5
    assert tm.parse_time("2.75") == Fraction(11, 4)
    assert tm.parse_time("11/4") == Fraction(11, 4)
    assert tm.parse_time("-inf") == NEG_INF
    assert tm.parse_time("+inf") == INF
    assert tm.format_time(Fraction(11, 4)) == "11/4"
    assert tm.format_time(Fraction(3)) == "3"


def test_interval_forms_and_validation():
    assert str(iv("(0,1]")) == "(0,1]"
    assert iv("[2,2]").is_punctual
    with pytest.raises(EmptyIntervalError):
        Interval(2, 1)
    with pytest.raises(EmptyIntervalError):
        Interval(1, 1, True, False)
    # infinite ends are forced open
    assert Interval(NEG_INF, 3).lo_closed is False
    assert tm.make_interval(1, 1, False, True) is None


def test_intersect_examples():
    assert tm.intersect(iv("[0,2]"), iv("[1,3]")) == iv("[1,2]")
    assert tm.intersect(iv("[1,2]"), iv("[1,1]")) == iv("[1,1]")
    assert tm.intersect(iv("[0,1)"), iv("[1,2]")) is None


def test_union_examples():
    assert tm.union_if_coalescable(iv("[0,1]"), iv("[1,2]")) == iv("[0,2]")
    assert tm.union_if_coalescable(iv("[0,1)"), iv("(1,2]")) is None
    assert tm.union_if_coalescable(iv("[0,3]"), iv("[1,2]")) == iv("[0,3]")
    assert tm.union_if_coalescable(iv("[0,1)"), iv("[1,2]")) == iv("[0,2]")


def test_normalize_examples():
    assert tm.normalize([iv("[0,1]"), iv("[1,2]"), iv("[5,6]")]) == (iv("[0,2]"), iv("[5,6]"))
    assert tm.normalize([]) == ()
    assert tm.normalize([iv("(0,1)"), iv("(1,2)")]) == (iv("(0,1)"), iv("(1,2)"))


def test_shift_and_box_flags():
    # closed + closed stays closed, any open side stays open
    assert tm.shift(iv("[0,1]"), iv("[1,1]")) == iv("[1,2]")
    assert tm.shift(iv("(0,1]"), iv("[0,1)")) == iv("(0,2)")
    # Boxminus[0,2] over [3,9] holds on [5,9]; over [0,1] nowhere
    assert tm.box_past(iv("[3,9]"), iv("[0,2]")) == iv("[5,9]")
    assert tm.box_past(iv("[0,1]"), iv("[0,2]")) is None
    assert tm.box_past(Interval(NEG_INF, 4, False, True), iv("[1,2]")) == Interval(NEG_INF, 5, False, True)


def test_truncation():
    hs = (iv("[0,2]"), iv("(3,5)"))
    assert tm.truncate_right(hs, 4) == (iv("[0,2]"), iv("(3,4]"))
    assert tm.truncate_right(hs, 3) == (iv("[0,2]"),)
    assert tm.truncate_left(hs, 1) == (iv("[1,2]"), iv("(3,5)"))


@given(st.lists(intervals(infinite=True), max_size=8))
def test_normalize_idempotent_and_canonical(raw):
    n = tm.normalize(raw)
    assert tm.normalize(n) == n
    for a, b in zip(n, n[1:]):
        assert a.sort_key() < b.sort_key()
        assert tm.union_if_coalescable(a, b) is None


@given(st.lists(intervals(infinite=True), max_size=6))
def test_normalize_preserves_points(raw):
    n = tm.normalize(raw)
    for t in probe_points(*raw):
        assert any(tm.contains_point(i, t) for i in raw) == tm.holds_at(n, t)


@given(intervals(), intervals(), intervals())
def test_intersect_commutative_associative(a, b, c):
    assert tm.intersect(a, b) == tm.intersect(b, a)

    def meet(x, y):
        return None if x is None or y is None else tm.intersect(x, y)

    assert meet(meet(a, b), c) == meet(a, meet(b, c))


@given(intervals(), intervals())
def test_intersect_pointwise(a, b):
    m = tm.intersect(a, b)
    for t in probe_points(a, b):
        inside = tm.contains_point(a, t) and tm.contains_point(b, t)
        assert inside == (m is not None and tm.contains_point(m, t))


@given(intervals(), intervals())
def test_union_iff_no_gap(a, b):
    u = tm.union_if_coalescable(a, b)
    pts = probe_points(a, b)
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    gap = any(lo < t < hi and not (tm.contains_point(a, t) or tm.contains_point(b, t)) for t in pts)
    assert (u is None) == gap
    if u is not None:
        for t in pts:
            assert tm.contains_point(u, t) == (tm.contains_point(a, t) or tm.contains_point(b, t))


@given(intervals(), ranges())
def test_shift_is_minkowski_sum(a, r):
    s = tm.shift(a, r)
    step = Fraction(1, 4)
    for k in range(-8, 60):
        t = k * step
        # brute force over witnesses on a quarter grid plus range endpoints
        cands = {t - x for x in (r.lo, r.hi) if x != INF} | {t - k2 * step for k2 in range(0, 20)}
        hit = any(tm.contains_point(a, c) and tm.contains_point(r, t - c) for c in cands)
        if hit:
            assert tm.contains_point(s, t)
