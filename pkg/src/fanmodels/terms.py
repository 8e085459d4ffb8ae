"""Truth values, terms and their interpretation at Kripke nodes.

Two truth-value families are supported.  Family ``"C"`` has ``Plus(b)``,
``Prime(b)`` and ``NegPrime(b)``; family ``"Pi"`` has ``Pair(n, a)``,
``NegPair(n, a)`` and ``AllN(a)``.  A :class:`Term` is a finite set of
entries ``(guard, subterm)`` where the guard is a finite set of truth
values; a :class:`QTerm` uses an IN/OUT condition as its guard instead.

Interpreting a term at a node keeps the entries whose guard holds there
and recurses, producing a hereditarily finite set (nested ``frozenset``).
Binary sequences are named by von Neumann numerals of their shortlex
index, so ``hat_seq(b)`` always interprets to ``numeral(shortlex_index(b))``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Union

from .bars import is_prefix, prefixes, read_seq, shortlex_index, show, strings_upto
from .conditions import IN, OUT, Condition, FullLabeling, in_q_filter

__all__ = [
    "Plus", "Prime", "NegPrime", "Pair", "NegPair", "AllN", "TruthValue",
    "FamilyError", "Term", "QTerm", "EMPTY", "EMPTY_GUARD",
    "Bottom", "WeakNode", "TerminalC", "TrivialTop", "PiNode", "BranchNode", "NodeContext",
    "tv_true", "guard_true", "interpret_term", "intern_set", "numeral", "seq_of_set", "make_hat", "hat_seq",
    "make_C", "make_Cprime", "make_sigma_B", "make_Tn", "make_capC",
    "neg_admits", "restrict_neg", "parse_term", "format_term", "hf_rank",
]


# ------------------------------------------------------------ truth values

@dataclass(frozen=True, order=True)
class Plus:
    b: str
    family = "C"

    def __str__(self):
        return f"+{show(self.b)}"


@dataclass(frozen=True, order=True)
class Prime:
    b: str
    family = "C"

    def __str__(self):
        return f"'{show(self.b)}"


@dataclass(frozen=True, order=True)
class NegPrime:
    b: str
    family = "C"

    def __str__(self):
        return f"!'{show(self.b)}"


@dataclass(frozen=True, order=True)
class Pair:
    n: int
    a: str
    family = "Pi"

    def __str__(self):
        return f"({self.n},{show(self.a)})"


@dataclass(frozen=True, order=True)
class NegPair:
    n: int
    a: str
    family = "Pi"

    def __str__(self):
        return f"!({self.n},{show(self.a)})"


@dataclass(frozen=True, order=True)
class AllN:
    a: str
    family = "Pi"

    def __str__(self):
        return f"(all,{show(self.a)})"


TruthValue = Union[Plus, Prime, NegPrime, Pair, NegPair, AllN]
_TV_ORDER = {Plus: 0, Prime: 1, NegPrime: 2, Pair: 3, NegPair: 4, AllN: 5}


def _tv_key(tv):
    if isinstance(tv, (Pair, NegPair)):
        return (_TV_ORDER[type(tv)], tv.n, shortlex_index(tv.a))
    s = tv.a if isinstance(tv, AllN) else tv.b
    return (_TV_ORDER[type(tv)], 0, shortlex_index(s))


class FamilyError(ValueError):
    pass


# ------------------------------------------------------------ terms

EMPTY_GUARD = Condition("A", ())


def _rank(entries) -> int:
    return 1 + max((sub.rank for _, sub in entries), default=-1)


@dataclass(frozen=True)
class Term:
    """Truth-value term: a frozenset of ``(frozenset[TruthValue], Term)`` entries."""

    entries: frozenset = frozenset()
    rank: int = field(default=0, init=False, compare=False)

    def __post_init__(self):
        entries = frozenset((frozenset(g), s) for g, s in self.entries)
        for g, s in entries:
            if not isinstance(s, Term):
                raise TypeError("subterms of a Term must be Terms")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "rank", _rank(entries))

    @property
    def families(self) -> frozenset:
        out = set()
        for g, s in self.entries:
            out.update(tv.family for tv in g)
            out.update(s.families)
        return frozenset(out)

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class QTerm:
    """Q-term: a frozenset of ``(Condition, QTerm)`` entries; guards use IN/OUT labels."""

    entries: frozenset = frozenset()
    rank: int = field(default=0, init=False, compare=False)

    def __post_init__(self):
        entries = frozenset(self.entries)
        for g, s in entries:
            if not isinstance(g, Condition) or not isinstance(s, QTerm):
                raise TypeError("QTerm entries are (Condition, QTerm) pairs")
            if any(l not in (IN, OUT) for _, l in g.entries):
                raise ValueError(f"Q-term guard {g} uses a label other than IN/OUT")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "rank", _rank(entries))

    def guard_depth(self) -> int:
        return max([g.length for g, _ in self.entries] + [s.guard_depth() for _, s in self.entries],
                   default=0)


EMPTY = Term()


# ------------------------------------------------------------ node contexts

@dataclass(frozen=True)
class Bottom:
    """The bottom node: IN labels of g are true, standard objects have length/size <= s."""
    g: FullLabeling
    s: int

    @property
    def label(self):
        return "bot"


@dataclass(frozen=True)
class WeakNode:
    """A node for a legal weakening h of the bottom labelling, seeing objects up to *cutoff*."""
    h: FullLabeling
    cutoff: int
    name: str = "weak"

    @property
    def label(self):
        return self.name


@dataclass(frozen=True)
class TerminalC:
    """Terminal node for a non-standard sequence c: c alone drops out of C'."""
    c: str
    prefix: str = ""

    @property
    def label(self):
        return f"{self.prefix}term:{show(self.c)}"


@dataclass(frozen=True)
class TrivialTop:
    """Node where every positive truth value holds."""
    prefix: str = ""

    @property
    def label(self):
        return f"{self.prefix}top"


@dataclass(frozen=True)
class PiNode:
    """Successor indexed by (n, a): the truth value (n, a) is the one that fails here."""
    n: int
    a: str

    @property
    def label(self):
        return f"pi:{self.n},{show(self.a)}"


@dataclass(frozen=True)
class BranchNode:
    """Successor indexed by an INF sequence a: b+ holds iff b is not a prefix of a."""
    a: str

    @property
    def label(self):
        return f"branch:{show(self.a)}"


NodeContext = Union[Bottom, WeakNode, TerminalC, TrivialTop, PiNode, BranchNode]


def _labeling_in(g: FullLabeling, b: str) -> bool:
    if len(b) > g.depth:
        b = b[:g.depth]
    return g(b) is IN


def tv_true(tv, node) -> bool:
    """Truth of a truth value at a node context."""
    if isinstance(node, Bottom):
        if isinstance(tv, Plus):
            return _labeling_in(node.g, tv.b)
        if isinstance(tv, Prime):
            return len(tv.b) <= node.s
        if isinstance(tv, Pair):
            return tv.n <= node.s
        if isinstance(tv, AllN):
            return _labeling_in(node.g, tv.a)
        return False
    if isinstance(node, WeakNode):
        if isinstance(tv, Plus):
            return _labeling_in(node.h, tv.b)
        if isinstance(tv, Prime):
            return len(tv.b) <= node.cutoff
        if isinstance(tv, NegPrime):
            return False
        raise FamilyError(f"{tv} is not a C-family truth value")
    if isinstance(node, TerminalC):
        if isinstance(tv, Plus):
            return not is_prefix(tv.b, node.c)
        if isinstance(tv, Prime):
            return tv.b != node.c
        if isinstance(tv, NegPrime):
            return tv.b == node.c
        raise FamilyError(f"{tv} is not a C-family truth value")
    if isinstance(node, TrivialTop):
        return not isinstance(tv, (NegPrime, NegPair))
    if isinstance(node, PiNode):
        if isinstance(tv, Pair):
            return (tv.n, tv.a) != (node.n, node.a)
        if isinstance(tv, NegPair):
            return (tv.n, tv.a) == (node.n, node.a)
        if isinstance(tv, AllN):
            return tv.a != node.a
        raise FamilyError(f"{tv} is not a Pi-family truth value")
    if isinstance(node, BranchNode):
        if isinstance(tv, Plus):
            return not is_prefix(tv.b, node.a)
        if isinstance(tv, Prime):
            return True
        if isinstance(tv, NegPrime):
            return False
        raise FamilyError(f"{tv} is not a C-family truth value")
    raise TypeError(f"unknown node context {node!r}")


def _node_labeling(node) -> Optional[FullLabeling]:
    if isinstance(node, Bottom):
        return node.g
    if isinstance(node, WeakNode):
        return node.h
    return None


def guard_true(guard, node) -> bool:
    if isinstance(guard, Condition):
        g = _node_labeling(node)
        if g is None:
            if isinstance(node, TrivialTop):
                return all(l is IN for _, l in guard.entries)
            raise TypeError(f"Q-term guards need a labelled node, not {node!r}")
        return in_q_filter(guard, g)
    return all(tv_true(tv, node) for tv in guard)


_INTERNED: dict = {}


def intern_set(x: frozenset) -> frozenset:
    """Canonical object for a hereditarily finite set.

    Every set built in this module goes through here, so equal sets share
    their elements and comparisons stop at identity instead of recursing
    (nested numerals would otherwise compare in exponential time).
    """
    return _INTERNED.setdefault(x, x)


@lru_cache(maxsize=1 << 16)
def interpret_term(t, node) -> frozenset:
    """Hereditarily finite set denoted by *t* at *node*."""
    return intern_set(frozenset(interpret_term(s, node) for g, s in t.entries if guard_true(g, node)))


# ------------------------------------------------------------ canonical terms

@lru_cache(maxsize=None)
def numeral(n: int) -> frozenset:
    """Von Neumann numeral."""
    if n == 0:
        return intern_set(frozenset())
    prev = numeral(n - 1)
    return intern_set(prev | {prev})


@lru_cache(maxsize=None)
def _numeral_table(limit: int) -> dict:
    return {numeral(i): i for i in range(limit)}


def seq_of_set(x: frozenset, depth: int) -> Optional[str]:
    """The sequence of length <= depth whose numeral is *x*, if any."""
    idx = _numeral_table((1 << (depth + 1)) - 1).get(x)
    if idx is None:
        return None
    return strings_upto(depth)[idx]


def hf_rank(x: frozenset) -> int:
    return 1 + max((hf_rank(y) for y in x), default=-1)


@lru_cache(maxsize=None)
def make_hat(x: frozenset, q: bool = False):
    """Canonical term for a hereditarily finite set; every guard is empty."""
    if q:
        return QTerm(frozenset((EMPTY_GUARD, make_hat(y, True)) for y in x))
    return Term(frozenset((frozenset(), make_hat(y)) for y in x))


def hat_seq(b: str, q: bool = False):
    return make_hat(numeral(shortlex_index(b)), q)


def make_C(dmax: int) -> Term:
    return Term(frozenset((frozenset({Plus(b)}), hat_seq(b)) for b in strings_upto(dmax)))


def make_Cprime(dmax: int) -> Term:
    return Term(frozenset((frozenset({Prime(b)}), hat_seq(b)) for b in strings_upto(dmax)))


def make_Tn(n: int, dmax: int) -> Term:
    return Term(frozenset((frozenset({Pair(n, a)}), hat_seq(a)) for a in strings_upto(dmax)))


def make_capC(dmax: int) -> Term:
    return Term(frozenset((frozenset({AllN(a)}), hat_seq(a)) for a in strings_upto(dmax)))


def make_sigma_B(dmax: int) -> QTerm:
    """Q-term for the bar: alpha-hat guarded by 'c is IN, its proper prefixes OUT' for each prefix c."""
    entries = set()
    for a in strings_upto(dmax):
        for c in prefixes(a):
            guard = Condition("A", [(u, OUT) for u in prefixes(c, proper=True)] + [(c, IN)])
            entries.add((guard, hat_seq(a, q=True)))
    return QTerm(frozenset(entries))


# ------------------------------------------------------------ negative restriction

def neg_admits(neg, guard: Iterable) -> bool:
    """Whether the negative truth value *neg* forces every member of *guard*."""
    if isinstance(neg, NegPrime):
        b = neg.b
        for tv in guard:
            if isinstance(tv, Plus):
                if is_prefix(tv.b, b):
                    return False
            elif isinstance(tv, Prime):
                if tv.b == b:
                    return False
            elif isinstance(tv, NegPrime):
                if tv.b != b:
                    return False
            else:
                raise FamilyError(f"{tv} mixed with {neg}")
        return True
    if isinstance(neg, NegPair):
        for tv in guard:
            if isinstance(tv, Pair):
                if (tv.n, tv.a) == (neg.n, neg.a):
                    return False
            elif isinstance(tv, AllN):
                if tv.a == neg.a:
                    return False
            elif isinstance(tv, NegPair):
                if tv != neg:
                    return False
            else:
                raise FamilyError(f"{tv} mixed with {neg}")
        return True
    raise TypeError(f"{neg!r} is not a negative truth value")


@lru_cache(maxsize=1 << 16)
def restrict_neg(t: Term, neg) -> frozenset:
    """Hereditary restriction of *t* to the entries whose guard *neg* forces."""
    return intern_set(frozenset(restrict_neg(s, neg) for g, s in t.entries if neg_admits(neg, g)))


# ------------------------------------------------------------ file format

_TV_RE = re.compile(r"""
    \+(?P<plus>[01]+|e)
  | !'(?P<negprime>[01]+|e)
  | '(?P<prime>[01]+|e)
  | !\((?P<negn>\d+),(?P<nega>[01]+|e)\)
  | \(all,(?P<alla>[01]+|e)\)
  | \((?P<pn>\d+),(?P<pa>[01]+|e)\)
""", re.VERBOSE)


def _format_tv(tv) -> str:
    return str(tv)


def format_term(t: Term) -> str:
    """``{<{tv,...},term>,...}``; entries sorted by their printed form."""
    if isinstance(t, QTerm):
        raise TypeError("only truth-value terms have a file format")
    parts = []
    for g, s in t.entries:
        tvs = ",".join(_format_tv(tv) for tv in sorted(g, key=_tv_key))
        parts.append(f"<{{{tvs}}},{format_term(s)}>")
    return "{" + ",".join(sorted(parts)) + "}"


def parse_term(text: str) -> Term:
    src = re.sub(r"#[^\n]*", "", text)
    src = "".join(src.split())
    pos = 0

    def fail(msg):
        raise ValueError(f"{msg} at offset {pos}")

    def expect(ch):
        nonlocal pos
        if not src.startswith(ch, pos):
            fail(f"expected {ch!r}")
        pos += len(ch)

    def term():
        nonlocal pos
        expect("{")
        entries = []
        if src.startswith("}", pos):
            pos += 1
            return Term(frozenset())
        while True:
            entries.append(entry())
            if src.startswith(",", pos):
                pos += 1
                continue
            expect("}")
            return Term(frozenset(entries))

    def entry():
        nonlocal pos
        expect("<")
        expect("{")
        tvs = []
        if not src.startswith("}", pos):
            while True:
                m = _TV_RE.match(src, pos)
                if m is None:
                    fail("bad truth value")
                tvs.append(_tv_from_match(m))
                pos = m.end()
                if src.startswith(",", pos):
                    pos += 1
                    continue
                break
        expect("}")
        expect(",")
        sub = term()
        expect(">")
        return frozenset(tvs), sub

    result = term()
    if pos != len(src):
        fail("trailing input")
    return result


def _tv_from_match(m):
    d = m.groupdict()
    if d["plus"] is not None:
        return Plus(read_seq(d["plus"]))
    if d["negprime"] is not None:
        return NegPrime(read_seq(d["negprime"]))
    if d["prime"] is not None:
        return Prime(read_seq(d["prime"]))
    if d["negn"] is not None:
        return NegPair(int(d["negn"]), read_seq(d["nega"]))
    if d["alla"] is not None:
        return AllN(read_seq(d["alla"]))
    return Pair(int(d["pn"]), read_seq(d["pa"]))
