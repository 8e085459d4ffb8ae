"""First-order formulas over the membership/equality language.

Formulas are immutable trees.  Negation is not a node of its own:
``~phi`` parses to ``Implies(phi, Falsum())``.

Concrete syntax::

    formula := impl
    impl    := disj ("->" impl)?
    disj    := conj ("\\/" conj)*
    conj    := neg ("/\\" neg)*
    neg     := "~" neg | atomf
    atomf   := "bot" | "(" formula ")" | "forall" ID "." formula
             | "exists" ID "." formula | ID ("in" | "=") ID

A quantifier body runs to the end of the enclosing scope, so
``forall x. A /\\ B`` is ``Forall(x, And(A, B))``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

__all__ = [
    "Var", "Ref", "TermExpr",
    "Falsum", "Member", "Equal", "And", "Or", "Implies", "Exists", "Forall",
    "Formula", "neg",
    "FormulaSyntaxError", "UnboundVariableError", "CaptureError",
    "parse_formula", "format_formula", "free_vars", "names_used",
    "substitute", "depth", "subformulas",
]

_IDENT = re.compile(r"[A-Za-z0-9_]+\Z")
_KEYWORDS = frozenset({"bot", "forall", "exists", "in"})


def _check_ident(name: str) -> str:
    if not isinstance(name, str) or not _IDENT.match(name):
        raise ValueError(f"bad identifier {name!r}")
    return name


@dataclass(frozen=True)
class Var:
    """A variable occurrence (bound by a quantifier or declared free)."""
    name: str

    def __post_init__(self):
        _check_ident(self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Ref:
    """A named reference into a supplied term universe."""
    name: str

    def __post_init__(self):
        _check_ident(self.name)

    def __str__(self):
        return self.name


TermExpr = Union[Var, Ref]


@dataclass(frozen=True)
class Falsum:
    pass


@dataclass(frozen=True)
class Member:
    lhs: TermExpr
    rhs: TermExpr


@dataclass(frozen=True)
class Equal:
    lhs: TermExpr
    rhs: TermExpr


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"

    def __post_init__(self):
        _check_ident(self.var)


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"

    def __post_init__(self):
        _check_ident(self.var)


Formula = Union[Falsum, Member, Equal, And, Or, Implies, Exists, Forall]
_ATOMS = (Member, Equal)
_BINARY = (And, Or, Implies)
_QUANT = (Exists, Forall)


def neg(f: Formula) -> Implies:
    return Implies(f, Falsum())


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnboundVariableError(ValueError):
    def __init__(self, name: str, offset: int | None = None):
        where = "" if offset is None else f" at offset {offset}"
        super().__init__(f"unbound variable {name!r}{where}")
        self.name = name
        self.offset = offset


class CaptureError(ValueError):
    def __init__(self, binder: str):
        super().__init__(f"substitution would be captured by binder {binder!r}")
        self.binder = binder


# ---------------------------------------------------------------- lexing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<op>->|\\/|/\\|~|\(|\)|\.|=)
  | (?P<ident>[A-Za-z0-9_]+)
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "op":
            tokens.append(("op", m.group(), pos))
        elif kind == "ident":
            word = m.group()
            tokens.append(("kw" if word in _KEYWORDS else "id", word, pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, free, names):
        self.toks = _tokenize(text)
        self.i = 0
        self.free = free
        self.names = names

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind == "eof":
            found = "end of input" if kind == "eof" else repr(text)
            raise FormulaSyntaxError(f"expected {value!r}, found {found}", pos)

    def at(self, value):
        kind, text, _ = self.peek()
        return kind in ("op", "kw") and text == value

    def formula(self, bound):
        return self.impl(bound)

    def impl(self, bound):
        left = self.disj(bound)
        if self.at("->"):
            self.take()
            return Implies(left, self.impl(bound))
        return left

    def disj(self, bound):
        left = self.conj(bound)
        while self.at("\\/"):
            self.take()
            left = Or(left, self.conj(bound))
        return left

    def conj(self, bound):
        left = self.neg(bound)
        while self.at("/\\"):
            self.take()
            left = And(left, self.neg(bound))
        return left

    def neg(self, bound):
        if self.at("~"):
            self.take()
            return Implies(self.neg(bound), Falsum())
        return self.atomf(bound)

    def atomf(self, bound):
        kind, text, pos = self.peek()
        if kind == "kw" and text == "bot":
            self.take()
            return Falsum()
        if kind == "op" and text == "(":
            self.take()
            inner = self.formula(bound)
            self.expect(")")
            return inner
        if kind == "kw" and text in ("forall", "exists"):
            self.take()
            vkind, var, vpos = self.take()
            if vkind != "id":
                raise FormulaSyntaxError("expected a variable name", vpos)
            self.expect(".")
            body = self.formula(bound | {var})
            return Forall(var, body) if text == "forall" else Exists(var, body)
        if kind == "id":
            lhs = self.termx(bound)
            rkind, rel, rpos = self.take()
            if rel not in ("in", "=") or rkind == "eof":
                found = "end of input" if rkind == "eof" else repr(rel)
                raise FormulaSyntaxError(f"expected 'in' or '=', found {found}", rpos)
            rhs = self.termx(bound)
            return Member(lhs, rhs) if rel == "in" else Equal(lhs, rhs)
        found = "end of input" if kind == "eof" else repr(text)
        raise FormulaSyntaxError(f"unexpected {found}", pos)

    def termx(self, bound):
        kind, name, pos = self.take()
        if kind != "id":
            found = "end of input" if kind == "eof" else repr(name)
            raise FormulaSyntaxError(f"expected a term, found {found}", pos)
        if name in bound or name in self.free:
            return Var(name)
        if name in self.names:
            return Ref(name)
        raise UnboundVariableError(name, pos)


def parse_formula(text: str, free: Iterable[str] = (), names: Iterable[str] = ()) -> Formula:
    """Parse *text*.

    Identifiers bound by a quantifier or listed in *free* become ``Var``;
    identifiers listed in *names* become ``Ref``.  Anything else is an
    :class:`UnboundVariableError`.  Variables shadow names.
    """
    p = _Parser(text, frozenset(free), frozenset(names))
    f = p.formula(frozenset())
    kind, tok, pos = p.peek()
    if kind != "eof":
        raise FormulaSyntaxError(f"unexpected {tok!r}", pos)
    return f


# ---------------------------------------------------------------- printing

def _fmt(f, ctx):
    # ctx: "top" (anything goes), "operand" (quantifiers must be wrapped)
    if isinstance(f, Falsum):
        return "bot"
    if isinstance(f, Member):
        return f"{f.lhs} in {f.rhs}"
    if isinstance(f, Equal):
        return f"{f.lhs} = {f.rhs}"
    if isinstance(f, _QUANT):
        kw = "forall" if isinstance(f, Forall) else "exists"
        s = f"{kw} {f.var}. {_fmt(f.body, 'top')}"
        return s if ctx == "top" else f"({s})"
    if isinstance(f, Implies) and isinstance(f.right, Falsum):
        return "~" + _wrap(f.left, 4)
    if isinstance(f, Implies):
        s = f"{_wrap(f.left, 2)} -> {_fmt(f.right, 'top')}"
        return s if ctx == "top" else f"({s})"
    op, prec = ("/\\", 3) if isinstance(f, And) else ("\\/", 2)
    s = f"{_wrap(f.left, prec)} {op} {_wrap(f.right, prec + 1)}"
    return s if ctx == "top" else f"({s})"


def _prec(f):
    if isinstance(f, (Falsum, Member, Equal)):
        return 5
    if isinstance(f, Implies) and isinstance(f.right, Falsum):
        return 4
    if isinstance(f, And):
        return 3
    if isinstance(f, Or):
        return 2
    return 1


def _wrap(f, need):
    if isinstance(f, _QUANT) or _prec(f) < need:
        return "(" + _fmt(f, "top") + ")"
    return _fmt(f, "top")


def format_formula(f: Formula) -> str:
    """Render *f* so that :func:`parse_formula` gives it back."""
    return _fmt(f, "top")


# ---------------------------------------------------------------- traversal

def _atom_vars(atom):
    return {t.name for t in (atom.lhs, atom.rhs) if isinstance(t, Var)}


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Falsum):
        return frozenset()
    if isinstance(f, _ATOMS):
        return frozenset(_atom_vars(f))
    if isinstance(f, _BINARY):
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body) - {f.var}


def names_used(f: Formula) -> frozenset[str]:
    """Names (``Ref``) mentioned anywhere in *f*."""
    if isinstance(f, Falsum):
        return frozenset()
    if isinstance(f, _ATOMS):
        return frozenset(t.name for t in (f.lhs, f.rhs) if isinstance(t, Ref))
    if isinstance(f, _BINARY):
        return names_used(f.left) | names_used(f.right)
    return names_used(f.body)


def substitute(f: Formula, var: str, t: TermExpr) -> Formula:
    """Replace free occurrences of ``Var(var)`` by *t*; refuses to capture."""
    if isinstance(f, Falsum):
        return f
    if isinstance(f, _ATOMS):
        lhs = t if f.lhs == Var(var) else f.lhs
        rhs = t if f.rhs == Var(var) else f.rhs
        return type(f)(lhs, rhs)
    if isinstance(f, _BINARY):
        return type(f)(substitute(f.left, var, t), substitute(f.right, var, t))
    if f.var == var or var not in free_vars(f.body):
        return f
    if isinstance(t, Var) and t.name == f.var:
        raise CaptureError(f.var)
    return type(f)(f.var, substitute(f.body, var, t))


def depth(f: Formula) -> int:
    """Atoms and ``bot`` have depth 1."""
    if isinstance(f, (Falsum, Member, Equal)):
        return 1
    if isinstance(f, _BINARY):
        return 1 + max(depth(f.left), depth(f.right))
    return 1 + depth(f.body)


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, _BINARY):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, _QUANT):
        yield from subformulas(f.body)
