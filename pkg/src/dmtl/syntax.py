"""Metric atoms, rules and programs, plus the text format for programs and datasets.

Surface syntax (one rule per ``.``-terminated statement, ``%`` comments)::

    R1(x,y) :- Diamondminus[1,1] R1(x,y).
    Boxplus[1,1] R5(y) :- R2(x,y), Boxplus[1,2] R3(y,z).
    P(x) :- Q(x) Since(0,2] R(x), Top.

Inside rules bare identifiers are variables and constants are quoted
(``'c1'``); in datasets every argument is a constant::

    R1(c1,c2)@[0,1]
    P(a)@5
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

from .temporal import Interval, EmptyIntervalError, INF, format_time, parse_time

UNARY_OPS = ("Diamondminus", "Diamondplus", "Boxminus", "Boxplus")
BINARY_OPS = ("Since", "Until")
PAST_OPS = frozenset({"Diamondminus", "Boxminus", "Since"})
FUTURE_OPS = frozenset({"Diamondplus", "Boxplus", "Until"})
MIRROR = {"Diamondminus": "Diamondplus", "Diamondplus": "Diamondminus",
          "Boxminus": "Boxplus", "Boxplus": "Boxminus",
          "Since": "Until", "Until": "Since"}
KEYWORDS = frozenset(UNARY_OPS + BINARY_OPS + ("Top", "Bottom"))


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg, self.line, self.col = msg, line, col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + msg)


class SafetyError(ParseError):
    pass


# -- terms and atoms ----------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self):
        return self.name


Term = Union[str, Var]  # constants are plain strings


@dataclass(frozen=True, slots=True)
class Top:
    def __str__(self):
        return "Top"


@dataclass(frozen=True, slots=True)
class Bottom:
    def __str__(self):
        return "Bottom"


@dataclass(frozen=True, slots=True)
class Atom:
    """Relational atom; ground iff every argument is a constant string."""
    pred: str
    args: Tuple[Term, ...] = ()

    @property
    def is_ground(self) -> bool:
        return not any(isinstance(a, Var) for a in self.args)

    def __str__(self):
        return render_atom(self, quote=True)


@dataclass(frozen=True, slots=True)
class Unary:
    op: str
    rng: Interval
    arg: "Metric"

    def __str__(self):
        return render_metric(self)


@dataclass(frozen=True, slots=True)
class Binary:
    op: str
    rng: Interval
    left: "Metric"
    right: "Metric"

    def __str__(self):
        return render_metric(self)


Metric = Union[Top, Bottom, Atom, Unary, Binary]

TOP = Top()
BOTTOM = Bottom()


def diamond_minus(rng, arg): return Unary("Diamondminus", rng, arg)
def diamond_plus(rng, arg): return Unary("Diamondplus", rng, arg)
def box_minus(rng, arg): return Unary("Boxminus", rng, arg)
def box_plus(rng, arg): return Unary("Boxplus", rng, arg)
def since(rng, left, right): return Binary("Since", rng, left, right)
def until(rng, left, right): return Binary("Until", rng, left, right)


def relational_atoms(m: Metric, *, skip_left: bool = False) -> Iterator[Atom]:
    """Relational atoms in ``m``; optionally skip Since/Until left operands."""
    if isinstance(m, Atom):
        yield m
    elif isinstance(m, Unary):
        yield from relational_atoms(m.arg, skip_left=skip_left)
    elif isinstance(m, Binary):
        if not skip_left:
            yield from relational_atoms(m.left, skip_left=skip_left)
        yield from relational_atoms(m.right, skip_left=skip_left)


def operators(m: Metric) -> Iterator[str]:
    if isinstance(m, Unary):
        yield m.op
        yield from operators(m.arg)
    elif isinstance(m, Binary):
        yield m.op
        yield from operators(m.left)
        yield from operators(m.right)


def ranges(m: Metric) -> Iterator[Interval]:
    if isinstance(m, Unary):
        yield m.rng
        yield from ranges(m.arg)
    elif isinstance(m, Binary):
        yield m.rng
        yield from ranges(m.left)
        yield from ranges(m.right)


def mentions_top_or_bottom(m: Metric) -> bool:
    if isinstance(m, (Top, Bottom)):
        return True
    if isinstance(m, Unary):
        return mentions_top_or_bottom(m.arg)
    if isinstance(m, Binary):
        return mentions_top_or_bottom(m.left) or mentions_top_or_bottom(m.right)
    return False


def variables(m: Metric, *, skip_left: bool = False) -> set:
    return {a for atom in relational_atoms(m, skip_left=skip_left)
            for a in atom.args if isinstance(a, Var)}


def constants(m: Metric) -> set:
    return {a for atom in relational_atoms(m) for a in atom.args if not isinstance(a, Var)}


def substitute(m: Metric, sigma: Dict[Var, str]) -> Metric:
    if isinstance(m, Atom):
        if not m.args:
            return m
        return Atom(m.pred, tuple(sigma.get(a, a) if isinstance(a, Var) else a for a in m.args))
    if isinstance(m, Unary):
        return Unary(m.op, m.rng, substitute(m.arg, sigma))
    if isinstance(m, Binary):
        return Binary(m.op, m.rng, substitute(m.left, sigma), substitute(m.right, sigma))
    return m


def mirror(m: Metric) -> Metric:
    """Swap every past operator for its future counterpart and vice versa."""
    if isinstance(m, Unary):
        return Unary(MIRROR[m.op], m.rng, mirror(m.arg))
    if isinstance(m, Binary):
        return Binary(MIRROR[m.op], m.rng, mirror(m.left), mirror(m.right))
    return m


def head_atom(head: Metric) -> Optional[Atom]:
    """The single relational atom of a head, or None for heads reducing to Top."""
    while isinstance(head, Unary):
        head = head.arg
    return head if isinstance(head, Atom) else None


# -- rules and programs -------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    head: Metric
    body: Tuple[Metric, ...]

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise ParseError("rule body must be non-empty")

    @property
    def head_atom(self) -> Optional[Atom]:
        return head_atom(self.head)

    @property
    def derives_nothing(self) -> bool:
        return self.head_atom is None

    def variables(self) -> set:
        out = variables(self.head)
        for m in self.body:
            out |= variables(m)
        return out

    def predicates(self) -> set:
        preds = {a.pred for m in self.body for a in relational_atoms(m)}
        if self.head_atom is not None:
            preds.add(self.head_atom.pred)
        return preds

    def mirrored(self) -> "Rule":
        return Rule(mirror(self.head), tuple(mirror(m) for m in self.body))

    def __str__(self):
        return render_rule(self)


@dataclass(frozen=True)
class Program:
    rules: Tuple[Rule, ...] = ()
    arities: Dict[str, int] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        ar = dict(self.arities)
        for r in self.rules:
            for atom in _rule_atoms(r):
                _check_arity(ar, atom)
        object.__setattr__(self, "arities", ar)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def predicates(self) -> set:
        return {p for r in self.rules for p in r.predicates()}

    def constants(self) -> set:
        out = set()
        for r in self.rules:
            out |= constants(r.head)
            for m in r.body:
                out |= constants(m)
        return out

    def effective_rules(self) -> List[Tuple[int, Rule]]:
        """(index, rule) pairs that can derive facts; Top-headed rules are dropped."""
        out = []
        for i, r in enumerate(self.rules):
            if r.derives_nothing:
                warnings.warn(f"rule r{i + 1} derives nothing (head reduces to Top); dropped",
                              stacklevel=2)
                continue
            out.append((i, r))
        return out

    def __str__(self):
        return render_program(self)


def _rule_atoms(r: Rule) -> Iterator[Atom]:
    yield from relational_atoms(r.head)
    for m in r.body:
        yield from relational_atoms(m)


def _check_arity(arities: Dict[str, int], atom: Atom, line=0, col=0):
    n = arities.setdefault(atom.pred, len(atom.args))
    if n != len(atom.args):
        raise ParseError(f"arity mismatch for {atom.pred}: expected {n}, got {len(atom.args)}",
                         line, col)


# -- safety and classification ------------------------------------------------

def check_safety(rule: Rule) -> Optional[str]:
    """None if the rule is safe, otherwise a violation report."""
    bound = set()
    for m in rule.body:
        bound |= variables(m, skip_left=True)
    missing = sorted(v.name for v in variables(rule.head) - bound)
    if missing:
        return ", ".join(missing) + " not bound in body"
    return None


def _is_directed(rule: Rule, body_ops, head_ops) -> bool:
    if mentions_top_or_bottom(rule.head) or any(mentions_top_or_bottom(m) for m in rule.body):
        return False
    if not set(operators(rule.head)) <= head_ops:
        return False
    return all(set(operators(m)) <= body_ops for m in rule.body)


def is_forward(rule: Rule) -> bool:
    return _is_directed(rule, PAST_OPS, {"Boxplus"})


def is_backward(rule: Rule) -> bool:
    return _is_directed(rule, FUTURE_OPS, {"Boxminus"})


def classify_rule(rule: Rule) -> str:
    """'forward', 'backward', 'both' (no temporal operators) or 'neither'."""
    f, b = is_forward(rule), is_backward(rule)
    if f and b:
        return "both"
    return "forward" if f else "backward" if b else "neither"


def classify_program(rules: Iterable[Rule]) -> str:
    rules = list(rules)
    f = all(is_forward(r) for r in rules)
    b = all(is_backward(r) for r in rules)
    if f and b:
        return "both"
    return "forward" if f else "backward" if b else "neither"


# -- rendering ----------------------------------------------------------------

_PLAIN_CONST = re.compile(r"^(?:[A-Za-z_][A-Za-z0-9_]*|\d+)$")


def render_term(t: Term, quote: bool) -> str:
    if isinstance(t, Var):
        return t.name
    if quote or not _PLAIN_CONST.match(t) or t in KEYWORDS or t == "inf":
        return "'" + t.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return t


def render_atom(a: Atom, quote: bool = False) -> str:
    if not a.args:
        return a.pred
    return f"{a.pred}({','.join(render_term(t, quote) for t in a.args)})"


def render_metric(m: Metric, nested: bool = False) -> str:
    if isinstance(m, Top):
        return "Top"
    if isinstance(m, Bottom):
        return "Bottom"
    if isinstance(m, Atom):
        return render_atom(m, quote=True)
    if isinstance(m, Unary):
        return f"{m.op}{m.rng} {render_metric(m.arg, nested=True)}"
    s = f"{render_metric(m.left, True)} {m.op}{m.rng} {render_metric(m.right, True)}"
    return f"({s})" if nested else s


def render_rule(r: Rule) -> str:
    return f"{render_metric(r.head)} :- {', '.join(render_metric(m) for m in r.body)}."


def render_program(p: Program) -> str:
    return "".join(render_rule(r) + "\n" for r in p.rules)


def render_fact(atom: Atom, iv: Interval) -> str:
    return f"{render_atom(atom)}@{iv}"


# -- tokenizer ----------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<implies>:-|<-)
  | (?P<num>[+-]?(?:\d+(?:\.\d+)?(?:/\d+)?|inf\b))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<quoted>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[()\[\],.@])
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, in_rule: bool):
        self.toks = tokenize(text)
        self.i = 0
        self.in_rule = in_rule

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "implies", "ident")

    def expect(self, text) -> Tok:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    # numbers and intervals
    def time(self):
        t = self.tok
        if t.kind == "num":
            self.next()
            return parse_time(t.text)
        raise self.error(f"expected a time point, found {t.text!r}")

    def interval(self, operator_range: bool = False) -> Interval:
        start = self.tok
        if self.at("[") or self.at("("):
            lo_c = self.next().text == "["
            lo = self.time()
            self.expect(",")
            hi = self.time()
            if not (self.at("]") or self.at(")")):
                raise self.error("expected ']' or ')'")
            hi_c = self.next().text == "]"
        else:
            lo = hi = self.time()
            lo_c = hi_c = True
        if operator_range and lo < 0:
            raise self.error("negative operator range", start)
        try:
            return Interval(lo, hi, lo_c, hi_c)
        except EmptyIntervalError:
            raise self.error("empty interval", start) from None

    # atoms
    def term(self) -> Term:
        t = self.tok
        if t.kind == "quoted":
            self.next()
            return re.sub(r"\\(.)", r"\1", t.text[1:-1])
        if t.kind in ("ident", "num"):
            self.next()
            if t.kind == "ident" and self.in_rule:
                return Var(t.text)
            return t.text
        raise self.error(f"expected a term, found {t.text!r}")

    def atom(self) -> Atom:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected a predicate, found {t.text!r}")
        self.next()
        args = []
        if self.at("("):
            self.next()
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.next()
                    args.append(self.term())
            self.expect(")")
        return Atom(t.text, tuple(args))

    # metric atoms
    def metric(self) -> Metric:
        left = self.unary()
        while self.tok.kind == "ident" and self.tok.text in BINARY_OPS:
            op = self.next().text
            rng = self.interval(operator_range=True)
            right = self.unary()
            left = Binary(op, rng, left, right)
        return left

    def unary(self) -> Metric:
        t = self.tok
        if t.kind == "ident" and t.text == "Top":
            self.next()
            return TOP
        if t.kind == "ident" and t.text == "Bottom":
            self.next()
            return BOTTOM
        if t.kind == "ident" and t.text in UNARY_OPS:
            self.next()
            rng = self.interval(operator_range=True)
            return Unary(t.text, rng, self.unary())
        if self.at("("):
            self.next()
            m = self.metric()
            self.expect(")")
            return m
        return self.atom()

    def head(self) -> Metric:
        t = self.tok
        if t.kind == "ident" and t.text == "Bottom":
            raise self.error("Bottom is not allowed in rule heads")
        if t.kind == "ident" and t.text == "Top":
            self.next()
            return TOP
        if t.kind == "ident" and t.text in ("Boxminus", "Boxplus"):
            self.next()
            rng = self.interval(operator_range=True)
            return Unary(t.text, rng, self.head())
        if t.kind == "ident" and t.text in KEYWORDS:
            raise self.error(f"operator {t.text} is not allowed in rule heads")
        return self.atom()

    def rule(self) -> Rule:
        start = self.tok
        head = self.head()
        self.expect(":-") if self.tok.text == ":-" else self.expect("<-")
        body = [self.metric()]
        while self.at(","):
            self.next()
            body.append(self.metric())
        self.expect(".")
        rule = Rule(head, tuple(body))
        problem = check_safety(rule)
        if problem:
            raise SafetyError(f"unsafe rule: {problem}", start.line, start.col)
        return rule


def parse_metric(text: str) -> Metric:
    p = _Parser(text, in_rule=True)
    m = p.metric()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return m


def parse_rule(text: str) -> Rule:
    p = _Parser(text, in_rule=True)
    r = p.rule()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return r


def parse_program(text: str) -> Program:
    p = _Parser(text, in_rule=True)
    rules, arities = [], {}
    while p.tok.kind != "eof":
        start = p.tok
        r = p.rule()
        for atom in _rule_atoms(r):
            _check_arity(arities, atom, start.line, start.col)
        rules.append(r)
    return Program(tuple(rules), arities)


def parse_fact(text: str) -> Tuple[Atom, Interval]:
    p = _Parser(text, in_rule=False)
    fact = _fact(p)
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return fact


def _fact(p: _Parser) -> Tuple[Atom, Interval]:
    atom = p.atom()
    p.expect("@")
    return atom, p.interval()


def parse_facts(text: str, arities: Optional[Dict[str, int]] = None) -> List[Tuple[Atom, Interval]]:
    """Parse a dataset file into a list of (ground atom, interval) pairs."""
    p = _Parser(text, in_rule=False)
    arities = {} if arities is None else arities
    out = []
    while p.tok.kind != "eof":
        start = p.tok
        atom, iv = _fact(p)
        _check_arity(arities, atom, start.line, start.col)
        if p.at("."):
            p.next()
        out.append((atom, iv))
    return out
