import pytest
from hypothesis import given

from dmtl import temporal as tm
from dmtl.dataset import Dataset, Fact, coalesce_merge, entails_fact, semantic_diff
from dmtl.oracle import grid_load
from dmtl.syntax import Atom, parse_fact
from dmtl.temporal import Interval

from strategies import datasets, int_intervals


def D(text):
    return Dataset.parse(text)


def F(text):
    return Fact(*parse_fact(text))


def test_insert_reports():
    d = D("R1(c1,c2)@[0,1]")
    r = d.insert(*F("R1(c1,c2)@[1,2]"))
    assert (r.kind, r.interval) == ("extended", Interval(0, 2))
    d = D("P(a)@[0,5]")
    assert d.insert(*F("P(a)@[0,1]")).kind == "absorbed"
    assert d.insert(*F("P(a)@[7,8]")).kind == "fresh"
    assert d.holding(Atom("P", ("a",))) == (Interval(0, 5), Interval(7, 8))


def test_coalesce_merge_examples(ex_data):
    derived = [F("R1(c1,c2)@[1,2]"), F("R4(c2)@[0,2]"), F("R5(c2)@[2,2]")]
    d1 = coalesce_merge(ex_data, derived)
    assert d1 == D("""R1(c1,c2)@[0,2]
        R2(c1,c2)@[1,2]
        R3(c2,c3)@[2,3]
        R4(c2)@[0,2]
        R5(c2)@[0,1]
        R5(c2)@[2,2]""")
    assert coalesce_merge(ex_data, Dataset()) == ex_data
    assert coalesce_merge(D("P@[0,1]"), D("P@[1,2]\nP@(3,4)")) == D("P@[0,2]\nP@(3,4)")


def test_semantic_diff_examples():
    assert len(semantic_diff(D("P@[0,2]"), D("P@[0,5]"))) == 0
    assert semantic_diff(D("P@[0,2]"), D("P@[0,1]")) == D("P@[0,2]")
    # second-round derivations of the example: re-derived R5 and R4 facts are not new
    d1 = D("R1(c1,c2)@[0,2]\nR2(c1,c2)@[1,2]\nR3(c2,c3)@[2,3]\nR4(c2)@[0,2]\nR5(c2)@[0,1]\nR5(c2)@[2,2]")
    n = [F("R1(c1,c2)@[1,3]"), F("R6(c2)@[2,2]"), F("R4(c2)@[2,3]"), F("R5(c2)@[2,2]"), F("R4(c2)@[0,2]")]
    assert semantic_diff(n, d1) == D("R1(c1,c2)@[1,3]\nR6(c2)@[2,2]\nR4(c2)@[2,3]")


def test_entailment_examples(ex_data):
    d1 = coalesce_merge(ex_data, [F("R1(c1,c2)@[1,2]")])
    assert entails_fact(d1, *parse_fact("R1(c1,c2)@[1,2]"))
    assert not entails_fact(ex_data, *parse_fact("R1(c1,c2)@[1,2]"))
    assert D("P@(0,3)").entails(Atom("P", ()), Interval(1, 1))
    # coverage cannot be split over two stored intervals
    assert not D("P@[0,1)\nP@(1,2]").entails(Atom("P", ()), Interval(0, 2))


def test_without_fails_fast():
    d = D("P@[0,2]")
    assert len(d.without([F("P@[0,2]")])) == 0
    with pytest.raises(ValueError):
        d.without([F("P@[0,1]")])


@given(datasets())
def test_coalesced_form(d):
    for _, hs in d.items():
        assert tm.normalize(hs) == hs
        for a, b in zip(hs, hs[1:]):
            assert tm.union_if_coalescable(a, b) is None


@given(datasets(), datasets(), datasets())
def test_merge_laws(a, b, c):
    assert coalesce_merge(a, b) == coalesce_merge(b, a)
    assert coalesce_merge(coalesce_merge(a, b), c) == coalesce_merge(a, coalesce_merge(b, c))
    assert coalesce_merge(a, a) == a
    assert len(semantic_diff(a, a)) == 0
    assert semantic_diff(a, Dataset()) == a


@given(datasets(), datasets(), int_intervals(-2, 12))
def test_entailment_matches_pointwise_coverage(a, b, iv):
    window = Interval(-5, 15)
    ga, gb = grid_load(a, window), grid_load(b, window)
    gm = grid_load(coalesce_merge(a, b), window)
    for atom in set(ga.truth) | set(gb.truth):
        union = ga.vector(atom) | gb.vector(atom)
        assert (gm.vector(atom) == union).all()
        pts = [j for j in range(gm.size) if tm.contains_point(iv, gm.time(j))]
        assert coalesce_merge(a, b).entails(atom, iv) == bool(union[pts].all())
