"""Coalesced temporal fact store.

Each ground relational atom maps to its holding set, so the store is always in
coalesced form: the stored facts are exactly the maximal intervals per atom.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Set, Tuple

from . import temporal as tm
from .syntax import Atom, parse_facts, render_fact
from .temporal import Interval


class Fact(NamedTuple):
    atom: Atom
    interval: Interval

    def __str__(self):
        return render_fact(self.atom, self.interval)


class InsertReport(NamedTuple):
    kind: str  # 'absorbed' | 'extended' | 'fresh'
    interval: Interval  # the stored maximal interval now covering the fact


def _fact_key(f: Fact):
    return (f.atom.pred, f.atom.args, f.interval.sort_key())


class Dataset:
    """Mutable map from ground atoms to holding sets, with join indices."""

    def __init__(self, facts: Iterable = ()):
        self._index: Dict[Atom, Tuple[Interval, ...]] = {}
        self._by_pred: Dict[str, Set[Atom]] = defaultdict(set)
        self._by_arg: Dict[tuple, Set[Atom]] = defaultdict(set)
        self._constants: Set[str] = set()
        for f in facts:
            self.insert(*f)

    # -- construction -------------------------------------------------------

    @classmethod
    def parse(cls, text: str) -> "Dataset":
        return cls(parse_facts(text))

    def copy(self) -> "Dataset":
        d = Dataset.__new__(Dataset)
        d._index = dict(self._index)
        d._by_pred = defaultdict(set, {k: set(v) for k, v in self._by_pred.items()})
        d._by_arg = defaultdict(set, {k: set(v) for k, v in self._by_arg.items()})
        d._constants = set(self._constants)
        return d

    def _register(self, atom: Atom):
        self._by_pred[atom.pred].add(atom)
        for i, c in enumerate(atom.args):
            self._by_arg[(atom.pred, i, c)].add(atom)
            self._constants.add(c)

    def _unregister(self, atom: Atom):
        self._by_pred[atom.pred].discard(atom)
        for i, c in enumerate(atom.args):
            self._by_arg[(atom.pred, i, c)].discard(atom)

    def insert(self, atom: Atom, iv: Interval) -> InsertReport:
        """Merge ``atom@iv`` into the store, keeping the holding set normalised."""
        if not atom.is_ground:
            raise ValueError(f"fact atom must be ground: {atom}")
        old = self._index.get(atom)
        if old is None:
            self._index[atom] = (iv,)
            self._register(atom)
            return InsertReport("fresh", iv)
        host = tm.covering(old, iv)
        if host is not None:
            return InsertReport("absorbed", host)
        new = tm.normalize(old + (iv,))
        self._index[atom] = new
        if len(new) == len(old) + 1:
            return InsertReport("fresh", iv)
        return InsertReport("extended", tm.covering(new, iv))

    def set_holding(self, atom: Atom, hs: Tuple[Interval, ...]):
        """Replace an atom's holding set (``hs`` must be normalised)."""
        if hs:
            if atom not in self._index:
                self._register(atom)
            self._index[atom] = tuple(hs)
        elif atom in self._index:
            del self._index[atom]
            self._unregister(atom)

    # -- queries ------------------------------------------------------------

    def holding(self, atom: Atom) -> Tuple[Interval, ...]:
        return self._index.get(atom, ())

    def entails(self, atom: Atom, iv: Interval) -> bool:
        return tm.covering(self._index.get(atom, ()), iv) is not None

    def atoms(self, pred: Optional[str] = None) -> Iterable[Atom]:
        if pred is None:
            return self._index.keys()
        return self._by_pred.get(pred, ())

    def matching(self, pred: str, bound: Dict[int, str]) -> Iterable[Atom]:
        """Atoms of ``pred`` whose argument at each bound position equals the constant."""
        if not bound:
            return self._by_pred.get(pred, ())
        best = None
        for pos, c in bound.items():
            s = self._by_arg.get((pred, pos, c))
            if not s:
                return ()
            if best is None or len(s) < len(best):
                best = s
        return [a for a in best if all(a.args[p] == c for p, c in bound.items())]

    def predicates(self) -> Set[str]:
        return {p for p, atoms in self._by_pred.items() if atoms}

    @property
    def constants(self) -> Set[str]:
        return self._constants

    def items(self):
        return self._index.items()

    def facts(self) -> List[Fact]:
        """Stored facts in canonical order: atom lexicographic, then left endpoint."""
        out = [Fact(a, iv) for a, hs in self._index.items() for iv in hs]
        out.sort(key=_fact_key)
        return out

    def __iter__(self) -> Iterator[Fact]:
        return iter(self.facts())

    def __len__(self) -> int:
        return sum(len(hs) for hs in self._index.values())

    def __contains__(self, fact) -> bool:
        atom, iv = fact
        return iv in self._index.get(atom, ())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._index == other._index

    def __repr__(self) -> str:
        return "Dataset({" + ", ".join(str(f) for f in self.facts()) + "})"

    def render(self) -> str:
        return "".join(str(f) + "\n" for f in self.facts())

    def restrict(self, preds) -> "Dataset":
        preds = set(preds)
        out = Dataset()
        for a, hs in self._index.items():
            if a.pred in preds:
                out.set_holding(a, hs)
        return out

    def without(self, facts: Iterable) -> "Dataset":
        """Syntactic set difference on stored facts."""
        out = self.copy()
        for atom, iv in facts:
            hs = out._index.get(atom, ())
            if iv not in hs:
                raise ValueError(f"{render_fact(atom, iv)} is not a stored fact")
            out.set_holding(atom, tuple(x for x in hs if x != iv))
        return out


def coalesce_merge(d1: Dataset, d2) -> Dataset:
    """``d1`` and ``d2`` coalesced into maximal intervals; ``d2`` may be any fact iterable."""
    out = d1.copy()
    for atom, iv in d2:
        out.insert(atom, iv)
    return out


def semantic_diff(d1, d2: Dataset) -> Dataset:
    """Facts of ``d1`` (stored facts, or any fact iterable) not entailed by ``d2``."""
    return Dataset(Fact(a, iv) for a, iv in d1 if not d2.entails(a, iv))


def entails_fact(d: Dataset, atom: Atom, iv: Interval) -> bool:
    return d.entails(atom, iv)
