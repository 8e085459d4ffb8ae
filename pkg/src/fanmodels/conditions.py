"""Labelled-tree forcing conditions.

Two posets share one representation.  Variant ``"A"`` labels nodes IN, OUT
or INF; variant ``"B"`` only IN or INF.  A condition is a finite labelling
whose domain is a prefix-closed set of sequences containing the root and
which obeys:

* IN-terminality: a node labelled IN has no labelled proper descendant;
* OUT-heredity (A): every labelled descendant of an OUT node is IN or OUT;
* INF-branching: an INF node with both children labelled has an INF child.

Extension (``extends``) is containment of labellings.  A ``FullLabeling``
is a total labelling of every sequence up to some depth and stands in for
a generic filter; its IN labels are closed upwards.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Sequence

from .bars import (
    FiniteBarSet, children, is_prefix, level, prefixes, read_seq, shortlex_index,
    show, sibling, strings_upto, uniform_witness,
)

__all__ = [
    "Label", "IN", "OUT", "INF", "Condition", "FullLabeling", "Violation",
    "VariantError", "IllegalWeakening", "UnmeetableError",
    "validate_condition", "validate_labeling", "is_valid", "extends", "proj_Q",
    "q_extends", "sim", "weaker_leq_W", "weakening_extends", "inpart",
    "all_conditions", "count_conditions", "restrict_labeling", "in_filter", "in_q_filter",
    "apply_condition", "legal_weaken_A", "legal_weaken_B", "summarize_weakening",
    "project_below", "dense_Dn_member", "DenseLevel", "density_check",
    "sample_pseudo_generic", "complete_labeling", "bar_from_labeling",
    "build_separating_extension", "separation_failures",
    "parse_condition_file", "format_condition_file",
    "labeling_from_condition",
]


class Label(enum.Enum):
    IN = "IN"
    OUT = "OUT"
    INF = "INF"

    def __str__(self):
        return self.value

    def __lt__(self, other):
        return _LABEL_RANK[self] < _LABEL_RANK[other]


IN, OUT, INF = Label.IN, Label.OUT, Label.INF
_LABEL_RANK = {IN: 0, OUT: 1, INF: 2}
_VARIANT_LABELS = {"A": (IN, OUT, INF), "B": (IN, INF)}


class VariantError(ValueError):
    pass


class IllegalWeakening(ValueError):
    pass


class UnmeetableError(RuntimeError):
    pass


def _check_variant(variant: str) -> str:
    if variant not in _VARIANT_LABELS:
        raise VariantError(f"unknown variant {variant!r}")
    return variant


def _as_label(x) -> Label:
    return x if isinstance(x, Label) else Label(x)


def _sort_key(item):
    return shortlex_index(item[0])


@dataclass(frozen=True)
class Condition:
    """A finite labelling of sequences.  Construction does not validate."""

    variant: str
    entries: tuple = ()
    _map: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __init__(self, variant: str, entries=()):
        _check_variant(variant)
        if isinstance(entries, Mapping):
            entries = entries.items()
        items = tuple(sorted(((u, _as_label(l)) for u, l in entries), key=_sort_key))
        labels = dict(items)
        if len(labels) != len(items):
            raise ValueError("duplicate node in condition")
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "entries", items)
        object.__setattr__(self, "_map", labels)

    def __contains__(self, u) -> bool:
        return u in self._map

    def __getitem__(self, u) -> Label:
        return self._map[u]

    def get(self, u, default=None):
        return self._map.get(u, default)

    def __len__(self):
        return len(self.entries)

    def items(self):
        return self.entries

    @property
    def labels(self) -> dict:
        return dict(self._map)

    @property
    def domain(self) -> frozenset:
        return frozenset(self._map)

    @property
    def length(self) -> int:
        """Length of the longest labelled sequence (0 for the root alone)."""
        return max((len(u) for u in self._map), default=0)

    def in_nodes(self) -> list[str]:
        return [u for u, l in self.entries if l is IN]

    def has_in_prefix(self, u: str, proper: bool = False) -> bool:
        return any(self._map.get(c) is IN for c in prefixes(u, proper))

    def restrict(self, dom: Iterable[str]) -> "Condition":
        dom = set(dom)
        return Condition(self.variant, [(u, l) for u, l in self.entries if u in dom])

    def __str__(self):
        return "{" + ", ".join(f"{show(u)}:{l}" for u, l in self.entries) + "}"


class Violation(NamedTuple):
    node: str
    rule: str

    def __str__(self):
        return f"{self.rule} violation at {show(self.node)}"


def validate_condition(c: Condition) -> list[Violation]:
    """All rule violations of *c*; empty when *c* is a condition."""
    out = []
    labels = c._map
    allowed = _VARIANT_LABELS[c.variant]
    if "" not in labels:
        out.append(Violation("", "root"))
    for u, l in c.entries:
        if l not in allowed:
            out.append(Violation(u, "label"))
        if u and u[:-1] not in labels:
            out.append(Violation(u, "prefix-closed"))
        anc = [labels.get(a) for a in prefixes(u, proper=True)]
        if IN in anc:
            out.append(Violation(u, "IN-terminal"))
        if OUT in anc and l is INF:
            out.append(Violation(u, "OUT-hereditary"))
        if l is INF:
            l0, l1 = labels.get(u + "0"), labels.get(u + "1")
            if l0 is not None and l1 is not None and INF not in (l0, l1):
                out.append(Violation(u, "INF-branching"))
    return out


def is_valid(c: Condition) -> bool:
    return not validate_condition(c)


def _require_valid(*conds: Condition):
    for c in conds:
        bad = validate_condition(c)
        if bad:
            raise ValueError(f"invalid condition {c}: " + "; ".join(map(str, bad)))


def _same_variant(q: Condition, p: Condition):
    if q.variant != p.variant:
        raise VariantError(f"variant mismatch: {q.variant} vs {p.variant}")


def extends(q: Condition, p: Condition) -> bool:
    """``q <=_P p``: q keeps every label of p and is itself valid."""
    _same_variant(q, p)
    qm = q._map
    return all(qm.get(u) is l for u, l in p.entries) and is_valid(q)


def proj_Q(p: Condition) -> Condition:
    """Rename INF to OUT."""
    if p.variant != "A":
        raise VariantError("proj_Q is defined on variant A conditions")
    return Condition("A", [(u, OUT if l is INF else l) for u, l in p.entries])


def q_extends(r: Condition, q: Condition) -> bool:
    """``r <=_Q q`` between IN/OUT labellings: containment."""
    rm = r._map
    return all(rm.get(u) is l for u, l in q.entries)


def sim(p: Condition, p2: Condition) -> bool:
    return proj_Q(p) == proj_Q(p2)


def weaker_leq_W(q: Condition, p: Condition) -> bool:
    """``q <=_W p``: each node of p is INF in p or has an IN initial segment in q."""
    return all(l is INF or q.has_in_prefix(u) for u, l in p.entries)


def weakening_extends(q: Condition, p: Condition) -> bool:
    """``q <=_W p`` that also keeps p's domain: every node of p is labelled
    by q or sits above an IN node of q."""
    qm = q._map
    return weaker_leq_W(q, p) and all(u in qm or q.has_in_prefix(u) for u, _ in p.entries)


def inpart(q: Condition, r: Condition) -> Condition:
    """Common weakening collecting the IN labels of *q* and *r*.

    Seed IN where q or r says IN, mark a node IN once both children are IN,
    drop everything above an IN node and label the rest INF.
    """
    if q.variant != "B" or r.variant != "B":
        raise VariantError("inpart is defined on variant B conditions")
    _require_valid(q, r)
    dom = set(q.domain) | set(r.domain)
    is_in = {u for u in dom if q.get(u) is IN or r.get(u) is IN}
    for u in sorted(dom, key=lambda s: -len(s)):
        if u not in is_in and u + "0" in is_in and u + "1" in is_in:
            is_in.add(u)
    out = []
    for u in dom:
        if any(c in is_in for c in prefixes(u, proper=True)):
            continue
        out.append((u, IN if u in is_in else INF))
    return Condition("B", out)


# ------------------------------------------------------------ enumeration

@lru_cache(maxsize=None)
def _subtrees(height: int, label: Label, variant: str) -> tuple:
    """Relative labellings strictly above a node with *label* and *height* levels
    of room, as tuples of (suffix, label)."""
    if label is IN or height == 0:
        return ((),)
    child_labels = (IN, OUT) if label is OUT else _VARIANT_LABELS[variant]
    options = {}
    for bit in "01":
        opts = [(None, ())]
        for cl in child_labels:
            for sub in _subtrees(height - 1, cl, variant):
                opts.append((cl, ((bit, cl),) + tuple((bit + s, l) for s, l in sub)))
        options[bit] = opts
    out = []
    for (l0, s0), (l1, s1) in product(options["0"], options["1"]):
        if label is INF and l0 is not None and l1 is not None and INF not in (l0, l1):
            continue
        out.append(s0 + s1)
    return tuple(out)


def all_conditions(variant: str, d: int, root_labels: Optional[Sequence[Label]] = None) -> list[Condition]:
    """Every valid condition whose domain lies within sequences of length <= d."""
    _check_variant(variant)
    roots = root_labels if root_labels is not None else _VARIANT_LABELS[variant]
    out = []
    for rl in roots:
        for sub in _subtrees(d, rl, variant):
            out.append(Condition(variant, (("", rl),) + sub))
    return out


def count_conditions(variant: str, d: int) -> int:
    return sum(len(_subtrees(d, rl, variant)) for rl in _VARIANT_LABELS[variant])


# ------------------------------------------------------------ full labellings

@dataclass(frozen=True)
class FullLabeling:
    """Total labelling of all sequences of length <= depth, stored in shortlex order."""

    variant: str
    depth: int
    labels: tuple

    def __post_init__(self):
        _check_variant(self.variant)
        if len(self.labels) != (1 << (self.depth + 1)) - 1:
            raise ValueError("labelling is not total on the tree")

    @classmethod
    def from_mapping(cls, variant: str, depth: int, mapping: Mapping[str, Label]) -> "FullLabeling":
        return cls(variant, depth, tuple(_as_label(mapping[u]) for u in strings_upto(depth)))

    def __call__(self, u: str) -> Label:
        if len(u) > self.depth:
            raise KeyError(f"{show(u)} is beyond depth {self.depth}")
        return self.labels[shortlex_index(u)]

    def as_dict(self) -> dict:
        return dict(zip(strings_upto(self.depth), self.labels))

    def nodes_labeled(self, label: Label) -> list[str]:
        return [u for u, l in zip(strings_upto(self.depth), self.labels) if l is label]

    def as_condition(self) -> Condition:
        """Restriction to the whole tree with labels above IN nodes dropped."""
        return restrict_labeling(self, self.depth)


def validate_labeling(g: FullLabeling) -> list[Violation]:
    out = []
    allowed = _VARIANT_LABELS[g.variant]
    for u, l in zip(strings_upto(g.depth), g.labels):
        if l not in allowed:
            out.append(Violation(u, "label"))
        if not u:
            continue
        parent = g(u[:-1])
        if parent is IN and l is not IN:
            out.append(Violation(u, "IN-upward"))
        if parent is OUT and l is INF:
            out.append(Violation(u, "OUT-hereditary"))
    for u in g.nodes_labeled(INF):
        if len(u) < g.depth and INF not in (g(u + "0"), g(u + "1")):
            out.append(Violation(u, "INF-branching"))
    return out


def restrict_labeling(g: FullLabeling, k: int) -> Condition:
    """The condition of g on sequences of length <= k (nothing above IN)."""
    k = min(k, g.depth)
    out = []
    for u in strings_upto(k):
        if u and g(u[:-1]) is IN:
            continue
        out.append((u, g(u)))
    return Condition(g.variant, out)


def labeling_from_condition(c: Condition, depth: int) -> FullLabeling:
    """Spread IN labels upwards; every other node must be labelled."""
    mapping = {}
    for u in strings_upto(depth):
        if c.has_in_prefix(u):
            mapping[u] = IN
        elif u in c:
            mapping[u] = c[u]
        else:
            raise ValueError(f"node {show(u)} is unlabelled")
    return FullLabeling.from_mapping(c.variant, depth, mapping)


def in_filter(q: Condition, g: FullLabeling) -> bool:
    """q belongs to the filter generated by g."""
    if q.variant != g.variant:
        return False
    for u, l in q.entries:
        if len(u) > g.depth or g(u) is not l:
            return False
        if u and g(u[:-1]) is IN:
            return False
    return True


def in_q_filter(q: Condition, g: FullLabeling) -> bool:
    """q (IN/OUT labels) belongs to the projection of g's filter to Q."""
    for u, l in q.entries:
        if len(u) > g.depth:
            return False
        gl = g(u)
        if (OUT if gl is INF else gl) is not l:
            return False
        if u and g(u[:-1]) is IN:
            return False
    return True


# ------------------------------------------------------------ weakenings

def apply_condition(g: FullLabeling, p: Condition) -> FullLabeling:
    """``G_p``: change g minimally to agree with p."""
    mapping = {}
    for u in strings_upto(g.depth):
        if p.has_in_prefix(u):
            mapping[u] = IN
        elif u in p:
            mapping[u] = p[u]
        else:
            mapping[u] = g(u)
    return FullLabeling.from_mapping(g.variant, g.depth, mapping)


def _check_result(h_map, g):
    h = FullLabeling.from_mapping(g.variant, g.depth, h_map)
    bad = validate_labeling(h)
    if bad:
        raise IllegalWeakening("weakening is not a filter: " + "; ".join(map(str, bad)))
    return h


def _flip_precondition(g: FullLabeling, u: str):
    if len(u) > g.depth:
        raise IllegalWeakening(f"{show(u)} is beyond depth {g.depth}")
    if g(u) is not INF:
        raise IllegalWeakening(f"{show(u)} is labelled {g(u)}, not INF")
    if u and g(sibling(u)) is not INF:
        raise IllegalWeakening(f"sibling of {show(u)} is not labelled INF")


def legal_weaken_A(g: FullLabeling, flips: Mapping[str, Label],
                   bar_level: Optional[int] = None) -> FullLabeling:
    """Change chosen INF nodes to IN or OUT.

    A node flipped to OUT gets a full IN level at ``max(len(u) + 1, bar_level)``;
    INF nodes strictly between become OUT.
    """
    if g.variant != "A":
        raise VariantError("legal_weaken_A needs a variant A labelling")
    h = g.as_dict()
    for u in sorted(flips, key=shortlex_index):
        target = _as_label(flips[u])
        _flip_precondition(g, u)
        if target is INF:
            raise IllegalWeakening("flips must be to IN or OUT")
        if target is IN:
            for v in h:
                if is_prefix(u, v):
                    h[v] = IN
            continue
        lvl = len(u) + 1 if bar_level is None else max(len(u) + 1, bar_level)
        if lvl > g.depth:
            raise IllegalWeakening(f"no room for a uniform bar above {show(u)} within depth {g.depth}")
        for v in h:
            if is_prefix(u, v) and h[v] is not IN:
                h[v] = OUT if len(v) < lvl else IN
            elif is_prefix(u, v) and len(v) >= lvl:
                h[v] = IN
    return _check_result(h, g)


def legal_weaken_B(g: FullLabeling, picks: Iterable[str]) -> FullLabeling:
    """Turn chosen INF nodes (with INF siblings) and everything above them to IN."""
    if g.variant != "B":
        raise VariantError("legal_weaken_B needs a variant B labelling")
    h = g.as_dict()
    for u in sorted(set(picks), key=shortlex_index):
        _flip_precondition(g, u)
        for v in h:
            if is_prefix(u, v):
                h[v] = IN
    return _check_result(h, g)


def summarize_weakening(g: FullLabeling, h: FullLabeling) -> Condition:
    """The condition p with ``apply_condition(g, p) == h``: changed nodes,
    their ancestors, labelled as in h, nothing above IN."""
    if (g.variant, g.depth) != (h.variant, h.depth):
        raise IllegalWeakening("labellings have different shapes")
    bad = validate_labeling(h)
    if bad:
        raise IllegalWeakening("target is not a filter: " + "; ".join(map(str, bad)))
    changed = [u for u in strings_upto(g.depth) if g(u) is not h(u)]
    for u in changed:
        before, after = g(u), h(u)
        if before is IN or after is INF or (before is OUT and after is OUT):
            raise IllegalWeakening(f"{show(u)} changes {before} -> {after}")
        if (not u or g(u[:-1]) is h(u[:-1])) and before is not INF:
            raise IllegalWeakening(f"{show(u)} was not INF before weakening")
        if after is OUT and uniform_witness(
                [v[len(u):] for v in strings_upto(g.depth) if is_prefix(u, v) and h(v) is IN],
                g.depth - len(u)) is None:
            raise IllegalWeakening(f"OUT node {show(u)} has no uniform IN bar above it")
    dom = {""}
    for u in changed:
        dom.update(prefixes(u))
    entries = [(u, h(u)) for u in dom if not any(h(c) is IN for c in prefixes(u, proper=True))]
    p = Condition(g.variant, entries)
    if apply_condition(g, p) != h:
        raise IllegalWeakening("h is not of the form G_p")
    return p


def project_below(q: Condition, p: Condition) -> Condition:
    """``proj_p(q)``: the least change to q that is compatible with p.

    p wins on its own domain, q's labels above p's IN nodes are erased, INF
    above p's OUT nodes becomes OUT, and a q-only child that would leave an
    INF parent of p without an INF child is dropped with its subtree.
    """
    _same_variant(q, p)
    labels = dict(p.labels)
    for u, l in q.entries:
        if u in labels or p.has_in_prefix(u, proper=True):
            continue
        if l is INF and any(p.get(c) is OUT for c in prefixes(u, proper=True)):
            l = OUT
        labels[u] = l
    dropped = set()
    for u in sorted(labels, key=len):
        if u in dropped or labels[u] is not INF:
            continue
        kids = [c for c in children(u) if c in labels and c not in dropped]
        if len(kids) == 2 and INF not in (labels[kids[0]], labels[kids[1]]):
            for c in kids:
                if c not in p:
                    dropped.update(v for v in labels if is_prefix(c, v))
                    break
    return Condition(p.variant, [(u, l) for u, l in labels.items() if u not in dropped])


# ------------------------------------------------------------ dense sets

def dense_Dn_member(q: Condition, n: int, dmax: int) -> bool:
    """Some level k with n < k <= dmax bounds q's domain and every sequence of
    length k is INF in q or lies above an IN node of q."""
    qlen = q.length
    for k in range(max(n + 1, qlen), dmax + 1):
        if all(q.get(a) is INF or q.has_in_prefix(a) for a in level(k)):
            return True
    return False


def _label_children(u, lab, node_level, k, rng, variant, labels):
    """Label both children of *u* (if unlabelled) so the tree stays valid."""
    kids = children(u)
    have = [labels.get(c) for c in kids]
    if lab is OUT:
        for c, l in zip(kids, have):
            if l is None:
                labels[c] = IN
        return
    at_top = node_level + 1 == k
    if have[0] is not None and have[1] is not None:
        return
    if have[0] is not None or have[1] is not None:
        known = have[0] if have[0] is not None else have[1]
        free = kids[1] if have[0] is not None else kids[0]
        if known is INF:
            choices = [INF, IN] if (at_top or variant == "B") else [INF, IN, OUT]
            labels[free] = rng.choice(choices)
        else:
            labels[free] = INF
        return
    r = rng.random()
    if r < 0.5:
        pair = (INF, INF)
    elif r < 0.9 or variant == "B" or at_top:
        pair = (INF, IN) if r < 0.7 or (r >= 0.9) else (IN, INF)
    else:
        pair = (INF, OUT) if r < 0.95 else (OUT, INF)
    labels[kids[0]], labels[kids[1]] = pair


def _complete_to(p: Condition, k: int, rng: random.Random) -> dict:
    labels = dict(p.labels)
    for lvl in range(k):
        for u in level(lvl):
            lab = labels.get(u)
            if lab is None or lab is IN:
                continue
            _label_children(u, lab, lvl, k, rng, p.variant, labels)
    return labels


class DenseLevel:
    """The dense set ``D_n`` with a constructive extender."""

    def __init__(self, n: int, dmax: int):
        self.n = n
        self.dmax = dmax

    def __call__(self, q: Condition) -> bool:
        return dense_Dn_member(q, self.n, self.dmax)

    def __repr__(self):
        return f"D_{self.n}"

    def extend(self, p: Condition, rng: random.Random, d: int) -> Condition:
        k = max(self.n + 1, p.length + 1)
        if k > min(d, self.dmax):
            raise UnmeetableError(f"{self!r} cannot be met below {p} within depth {d}")
        return Condition(p.variant, _complete_to(p, k, rng).items())


def density_check(pred: Callable[[Condition], bool], dmax: int, variant: str = "A",
                  base_depth: Optional[int] = None) -> Optional[Condition]:
    """Bounded density: every valid condition over sequences of length
    <= base_depth has an extension within depth dmax satisfying *pred*.

    *base_depth* defaults to ``dmax - 1`` so that every tested condition has
    one level of room; pass ``base_depth=dmax`` for the headroom-free check.
    Returns None when density holds, else the first failing condition.
    """
    if base_depth is None:
        base_depth = max(dmax - 1, 0)
    if base_depth > dmax:
        raise ValueError("base_depth exceeds dmax")
    universe = all_conditions(variant, dmax)
    good = set()
    for c in universe:
        if pred(c):
            good.add(c.entries)
    # push "has a good extension" down through leaf removals, largest first
    for c in sorted(universe, key=len, reverse=True):
        if c.entries not in good:
            continue
        dom = c._map
        for u, _ in c.entries:
            if u and u + "0" not in dom and u + "1" not in dom:
                good.add(tuple(e for e in c.entries if e[0] != u))
    failures = [c for c in universe if c.length <= base_depth and c.entries not in good]
    if not failures:
        return None
    return min(failures, key=lambda c: (len(c), [(shortlex_index(u), _LABEL_RANK[l]) for u, l in c.entries]))


def complete_labeling(p: Condition, d: int, rng: random.Random) -> FullLabeling:
    """Randomly extend p to a total labelling of depth d."""
    labels = _complete_to(p, d, rng)
    return labeling_from_condition(Condition(p.variant, labels.items()), d)


def sample_pseudo_generic(d: int, dense_preds: Sequence[Callable] = (), seed: int = 0,
                          variant: str = "A", attempts: int = 200) -> FullLabeling:
    """A total labelling through ``{e: INF}`` that meets each listed dense set.

    Each predicate is met in turn by extending the current condition, using
    the predicate's own ``extend`` when it has one and random completions
    otherwise.  Deterministic in *seed*.
    """
    rng = random.Random(seed)
    p = Condition(variant, {"": INF})
    for pred in dense_preds:
        if hasattr(pred, "extend"):
            q = pred.extend(p, rng, d)
        else:
            q = _search_extension(p, pred, d, rng, attempts)
        if not (pred(q) and extends(q, p)):
            raise UnmeetableError(f"could not meet {pred!r}")
        p = q
    g = complete_labeling(p, d, rng)
    bad = validate_labeling(g)
    if bad:  # pragma: no cover - completion is valid by construction
        raise AssertionError("; ".join(map(str, bad)))
    return g


def _search_extension(p, pred, d, rng, attempts):
    for _ in range(attempts):
        g = complete_labeling(p, d, rng)
        for k in range(p.length, d + 1):
            q = restrict_labeling(g, k)
            if pred(q):
                return q
    raise UnmeetableError(f"no extension meeting {pred!r} found within depth {d}")


def bar_from_labeling(g: FullLabeling, d: Optional[int] = None) -> FiniteBarSet:
    """Sequences (length <= d) lying above an IN node of g."""
    d = g.depth if d is None else min(d, g.depth)
    members = frozenset(u for u in strings_upto(d) if any(g(c) is IN for c in prefixes(u)))
    return FiniteBarSet(members, d)


# ------------------------------------------------------------ separation gadget

def build_separating_extension(p: Condition, n: int) -> Condition:
    """Extend p to level ``k = n + s`` (s = number of INF nodes of length n).

    The j-th INF node of length n (lexicographic) receives the single INF
    descendant obtained by appending ``0^(j-1) 1 0^(s-j)``; every other new
    node above a non-IN node of length n is labelled OUT.
    """
    if p.variant != "A":
        raise VariantError("the separating extension is built for variant A")
    _require_valid(p)
    infs = sorted(u for u, l in p.entries if len(u) == n and l is INF)
    s = len(infs)
    if s == 0:
        raise ValueError(f"no INF node of length {n}")
    if any(len(u) > n for u in p.domain):
        raise ValueError(f"condition already labels nodes beyond length {n}")
    k = n + s
    labels = dict(p.labels)
    keep = {}
    for j, a in enumerate(infs, 1):
        path = a + "0" * (j - 1) + "1" + "0" * (s - j)
        for i in range(len(a) + 1, k + 1):
            keep[path[:i]] = True
    for a, l in p.entries:
        if len(a) != n or l is IN:
            continue
        for m in range(1, s + 1):
            for tail in level(m):
                labels[a + tail] = INF if (a + tail) in keep else OUT
    return Condition("A", labels.items())


def separation_failures(q: Condition, k: int) -> list[tuple[str, str]]:
    """Ordered pairs of distinct INF nodes of length k with no index i where
    the first has 1 and the second 0."""
    infs = [u for u, l in q.entries if len(u) == k and l is INF]
    bad = []
    for a in infs:
        for b in infs:
            if a != b and not any(x == "1" and y == "0" for x, y in zip(a, b)):
                bad.append((a, b))
    return bad


# ------------------------------------------------------------ file format

def parse_condition_file(text: str) -> tuple[Condition, Optional[int]]:
    """``variant A|B`` header, optional ``depth N``, then ``<bits|e> <label>`` lines.

    Returns the condition and the declared depth (None if absent).
    """
    variant = None
    depth = None
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "variant" and len(parts) == 2:
            variant = parts[1]
            continue
        if parts[0] == "depth" and len(parts) == 2:
            depth = int(parts[1])
            continue
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<node> <label>'")
        try:
            entries.append((read_seq(parts[0]), Label(parts[1])))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if variant is None:
        raise ValueError("missing 'variant A|B' header")
    return Condition(variant, entries), depth


def format_condition_file(c: Condition, depth: Optional[int] = None) -> str:
    lines = [f"variant {c.variant}"]
    if depth is not None:
        lines.append(f"depth {depth}")
    lines.extend(f"{show(u)} {l}" for u, l in c.entries)
    return "\n".join(lines) + "\n"
