"""Finite Heyting algebras as downset lattices of finite posets.

Downsets are bitmasks over the poset's elements.  Implication ``b -> c``
is the union of all principal downsets ``down(x)`` with
``down(x) & b`` contained in ``c``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "PosetError", "FinitePoset", "FiniteHeyting", "from_poset", "is_connected",
    "decidables_trivial", "residuation_failures", "naturally_labeled_posets",
    "parse_poset_file", "format_poset_file",
]


class PosetError(ValueError):
    pass


@dataclass(frozen=True)
class FinitePoset:
    """Elements ``0..n-1``; ``leq`` holds the pairs (i, j) with i <= j."""

    n: int
    leq: frozenset

    def __post_init__(self):
        leq = frozenset(self.leq)
        object.__setattr__(self, "leq", leq)
        for i in range(self.n):
            if (i, i) not in leq:
                raise PosetError(f"order is not reflexive at {i}")
        for i, j in leq:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise PosetError(f"pair ({i}, {j}) out of range")
            if i != j and (j, i) in leq:
                raise PosetError(f"order is not antisymmetric at ({i}, {j})")
        for i, j in leq:
            for k in range(self.n):
                if (j, k) in leq and (i, k) not in leq:
                    raise PosetError(f"order is not transitive at ({i}, {j}, {k})")

    @classmethod
    def from_relations(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "FinitePoset":
        """Reflexive-transitive closure of the given ``i < j`` pairs."""
        below = [[i == j for j in range(n)] for i in range(n)]
        for i, j in pairs:
            below[i][j] = True
        for k in range(n):
            for i in range(n):
                if below[i][k]:
                    for j in range(n):
                        if below[k][j]:
                            below[i][j] = True
        return cls(n, frozenset((i, j) for i in range(n) for j in range(n) if below[i][j]))

    def down(self, x: int) -> int:
        return sum(1 << i for i in range(self.n) if (i, x) in self.leq)


class FiniteHeyting:
    """The Heyting algebra of downsets of a finite poset."""

    def __init__(self, poset: FinitePoset, verify: bool = True):
        self.poset = poset
        n = poset.n
        self._down = [poset.down(x) for x in range(n)]
        self.carrier = tuple(m for m in range(1 << n) if self._is_downset(m))
        self.index = {a: i for i, a in enumerate(self.carrier)}
        self.bottom = 0
        self.top = (1 << n) - 1
        if verify:
            bad = residuation_failures(self)
            if bad:
                raise AssertionError(f"residuation fails at {bad[0]}")

    def _is_downset(self, m: int) -> bool:
        return all(self._down[x] & ~m == 0 for x in range(self.poset.n) if m >> x & 1)

    def __len__(self):
        return len(self.carrier)

    def meet(self, a: int, b: int) -> int:
        return a & b

    def join(self, a: int, b: int) -> int:
        return a | b

    def leq(self, a: int, b: int) -> bool:
        return a & ~b == 0

    def implies(self, b: int, c: int) -> int:
        out = 0
        for x, dx in enumerate(self._down):
            if dx & b & ~c == 0:
                out |= 1 << x
        return out

    def neg(self, a: int) -> int:
        return self.implies(a, self.bottom)


def from_poset(poset: FinitePoset, verify: bool = True) -> FiniteHeyting:
    return FiniteHeyting(poset, verify)


def residuation_failures(H: FiniteHeyting) -> list[tuple[int, int, int]]:
    """Triples (a, b, c) of carrier elements violating ``a /\\ b <= c  iff  a <= (b -> c)``.

    Checked on all triples at once with numpy bit operations.
    """
    elems = np.array(H.carrier, dtype=np.int64)
    k = len(elems)
    imp = np.array([[H.implies(b, c) for c in H.carrier] for b in H.carrier], dtype=np.int64)
    a = elems[:, None, None]
    b = elems[None, :, None]
    c = elems[None, None, :]
    lhs = ((a & b) & ~c) == 0
    rhs = (a & ~imp[None, :, :]) == 0
    bad = np.argwhere(lhs != rhs)
    return [(int(elems[i]), int(elems[j]), int(elems[l])) for i, j, l in bad[:10]] if k else []


def is_connected(H: FiniteHeyting) -> bool:
    """``A \\/ B = top`` and ``A /\\ B = bottom`` imply ``A = top`` or ``A = bottom``."""
    for a in H.carrier:
        for b in H.carrier:
            if a | b == H.top and a & b == H.bottom and a not in (H.top, H.bottom):
                return False
    return True


def decidables_trivial(H: FiniteHeyting) -> bool:
    """Every a with ``a \\/ ~a = top`` is top or bottom."""
    return all(a in (H.top, H.bottom) for a in H.carrier if a | H.neg(a) == H.top)


def naturally_labeled_posets(n: int) -> Iterator[FinitePoset]:
    """Every poset on ``0..n-1`` whose order extends the usual order of labels,
    i.e. every finite poset up to isomorphism (usually several times)."""
    pairs = list(combinations(range(n), 2))
    seen = set()
    for mask in range(1 << len(pairs)):
        chosen = [p for i, p in enumerate(pairs) if mask >> i & 1]
        P = FinitePoset.from_relations(n, chosen)
        if P.leq not in seen:
            seen.add(P.leq)
            yield P


def parse_poset_file(text: str) -> FinitePoset:
    """First line ``n``; then lines ``i < j``; ``#`` comments."""
    lines = [l.split("#", 1)[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    if not lines:
        raise PosetError("empty poset file")
    try:
        n = int(lines[0])
    except ValueError:
        raise PosetError(f"first line must be the element count, got {lines[0]!r}") from None
    pairs = []
    for l in lines[1:]:
        parts = l.replace("<", " < ").split()
        if len(parts) != 3 or parts[1] != "<":
            raise PosetError(f"expected 'i < j', got {l!r}")
        i, j = int(parts[0]), int(parts[2])
        if not (0 <= i < n and 0 <= j < n):
            raise PosetError(f"element out of range in {l!r}")
        pairs.append((i, j))
    return FinitePoset.from_relations(n, pairs)


def format_poset_file(P: FinitePoset) -> str:
    covers = []
    for i, j in sorted(P.leq):
        if i == j:
            continue
        if not any((i, k) in P.leq and (k, j) in P.leq for k in range(P.n) if k not in (i, j)):
            covers.append(f"{i} < {j}")
    return "\n".join([str(P.n)] + covers) + "\n"
