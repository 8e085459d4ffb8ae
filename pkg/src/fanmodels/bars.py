"""Finite binary sequences and bar properties truncated at a depth bound.

Sequences are plain ``str`` objects over ``"01"``; the empty sequence is
``""`` and is written ``"e"`` in files and reports.  Every quantifier over
infinite paths or over all extensions is cut off at an explicit depth
``d`` with the convention "length <= d".
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Collection, Iterable, Iterator, Optional, Union

__all__ = [
    "show", "read_seq", "prefixes", "is_prefix", "strings_upto", "level",
    "shortlex_index", "sibling", "children",
    "FiniteBarSet", "is_bar", "uniform_witness", "close_under_extensions",
    "is_extension_closed", "c_set_from", "pi01_set_from", "is_weakly_uniform",
    "parse_bar_file", "format_bar_file",
]


def show(u: str) -> str:
    return u if u else "e"


def read_seq(text: str) -> str:
    text = text.strip()
    if text == "e":
        return ""
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"not a binary sequence: {text!r}")
    return text


def prefixes(u: str, proper: bool = False) -> Iterator[str]:
    """Initial segments of *u*, shortest first (``u`` itself unless *proper*)."""
    stop = len(u) if proper else len(u) + 1
    for i in range(stop):
        yield u[:i]


def is_prefix(u: str, v: str) -> bool:
    return v.startswith(u)


def level(n: int) -> list[str]:
    return ["".join(bits) for bits in product("01", repeat=n)]


def strings_upto(d: int) -> list[str]:
    """All sequences of length <= d in shortlex order."""
    out = []
    for n in range(d + 1):
        out.extend(level(n))
    return out


def shortlex_index(u: str) -> int:
    return (1 << len(u)) - 1 + (int(u, 2) if u else 0)


def sibling(u: str) -> str:
    if not u:
        raise ValueError("the empty sequence has no sibling")
    return u[:-1] + ("1" if u[-1] == "0" else "0")


def children(u: str) -> tuple[str, str]:
    return u + "0", u + "1"


@dataclass(frozen=True)
class FiniteBarSet:
    members: frozenset
    depth: int

    def __post_init__(self):
        members = frozenset(self.members)
        for u in members:
            if not isinstance(u, str) or set(u) - {"0", "1"}:
                raise ValueError(f"not a binary sequence: {u!r}")
            if len(u) > self.depth:
                raise ValueError(f"{show(u)} is longer than depth {self.depth}")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, members: Iterable[str], depth: Optional[int] = None) -> "FiniteBarSet":
        members = frozenset(members)
        if depth is None:
            depth = max((len(u) for u in members), default=0)
        return cls(members, depth)

    def __contains__(self, u) -> bool:
        return u in self.members

    def __iter__(self):
        return iter(sorted(self.members, key=shortlex_index))

    def __len__(self):
        return len(self.members)

    def sorted(self) -> list[str]:
        return sorted(self.members, key=shortlex_index)


BarLike = Union[FiniteBarSet, Collection[str]]


def _members(B: BarLike) -> frozenset:
    return B.members if isinstance(B, FiniteBarSet) else frozenset(B)


def _has_prefix_in(u: str, members) -> bool:
    return any(u[:i] in members for i in range(len(u) + 1))


def is_bar(B: BarLike, d: int) -> bool:
    """Every path of length *d* has an initial segment in *B*."""
    members = _members(B)
    return all(_has_prefix_in(a, members) for a in level(d))


def uniform_witness(B: BarLike, d: int) -> Optional[int]:
    """Least ``n <= d`` such that every path of length n meets *B*, else None."""
    members = _members(B)
    # covered[u]: some prefix of u lies in B; computed level by level
    covered = {"": "" in members}
    if covered[""]:
        return 0
    frontier = [""]
    for n in range(1, d + 1):
        nxt = []
        for u in frontier:
            for c in children(u):
                covered[c] = c in members
                if not covered[c]:
                    nxt.append(c)
        if not nxt:
            return n
        frontier = nxt
    return None


def close_under_extensions(B: BarLike, d: int) -> FiniteBarSet:
    members = _members(B)
    return FiniteBarSet(frozenset(u for u in strings_upto(d) if _has_prefix_in(u, members)), d)


def is_extension_closed(B: BarLike, d: int) -> bool:
    """Closed under one-step (hence all) extensions within depth *d*."""
    members = _members(B)
    return all(c in members for u in members if len(u) < d for c in children(u))


def c_set_from(Cprime: BarLike, d: int) -> FiniteBarSet:
    """``u`` is in the result iff every extension of u of length <= d is in Cprime."""
    members = _members(Cprime)
    good: dict[str, bool] = {}
    for n in range(d, -1, -1):
        for u in level(n):
            ok = u in members
            if ok and n < d:
                ok = good[u + "0"] and good[u + "1"]
            good[u] = ok
    return FiniteBarSet(frozenset(u for u, ok in good.items() if ok), d)


def pi01_set_from(S: Union[Collection[tuple[str, int]], Callable[[str, int], bool]],
                  nbound: int, d: int) -> FiniteBarSet:
    """``u`` is in the result iff ``(u, n) in S`` for every ``n <= nbound``.

    *S* may be a finite set of pairs or a decidable predicate.  No closure
    under extensions is applied.
    """
    test = S if callable(S) else (lambda u, n, _S=frozenset(S): (u, n) in _S)
    return FiniteBarSet(
        frozenset(u for u in strings_upto(d) if all(test(u, n) for n in range(nbound + 1))), d)


def is_weakly_uniform(B: BarLike, d: int) -> bool:
    """Some level ``n <= d`` has at least half of its nodes above a member of *B*.

    At ``n = 0`` the root itself must be covered.
    """
    members = _members(B)
    if "" in members:
        return True
    for n in range(1, d + 1):
        hits = sum(1 for a in level(n) if _has_prefix_in(a, members))
        if 2 * hits >= (1 << n):
            return True
    return False


def parse_bar_file(text: str) -> frozenset:
    """One sequence per line, ``e`` for the empty one, ``#`` comments."""
    members = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            members.add(read_seq(line))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return frozenset(members)


def format_bar_file(B: BarLike) -> str:
    return "".join(show(u) + "\n" for u in sorted(_members(B), key=shortlex_index))
