"""Finite Kripke frames, intuitionistic evaluation and the preset models.

A :class:`Frame` has finitely many nodes under a partial order with a
least node, a monotone domain of objects at each node, and membership /
equality relations supplied as functions of (node, a, b).  Term frames
use :mod:`fanmodels.terms` objects: membership at a node means some kept
entry of the right-hand term is equal to the left-hand term, and
equality is extensional equality at every later node.
"""
from __future__ import annotations

import random
from functools import lru_cache
from dataclasses import dataclass
from itertools import product
from typing import Callable, Hashable, Iterable, Mapping, Optional, Sequence

from .bars import is_prefix, level, show, sibling, strings_upto
from .conditions import (
    INF, IN, OUT, DenseLevel, FullLabeling, IllegalWeakening, legal_weaken_A,
    legal_weaken_B, sample_pseudo_generic,
)
from .formula import (
    And, Equal, Exists, Falsum, Forall, Formula, Implies, Member, Or, Var,
    UnboundVariableError, format_formula, free_vars,
)
from .terms import (
    Bottom, BranchNode, PiNode, QTerm, TerminalC, TrivialTop, WeakNode,
    guard_true, hat_seq, interpret_term, make_C, make_capC, make_Cprime,
    make_sigma_B, make_Tn,
)

__all__ = [
    "Frame", "FrameError", "DomainError", "evaluate", "check_persistence",
    "check_atom_persistence", "term_frame", "internal_decidable", "internal_uniform",
    "c_set_biconditional", "lem_countermodel", "small_frames",
    "preset_fand", "preset_fanc", "preset_fanpi", "preset_fanfull", "build_preset",
    "frame_dump", "capC_nonclosure_witness", "members_at",
]


class FrameError(ValueError):
    pass


class DomainError(ValueError):
    pass


class Frame:
    """Finite Kripke frame.

    *edges* lists pairs ``(u, v)`` with ``u <= v``; the reflexive-transitive
    closure is taken.  *domains* maps each node to an iterable of objects.
    """

    def __init__(self, nodes: Sequence[Hashable], edges: Iterable[tuple], domains: Mapping,
                 member: Callable, equal: Optional[Callable] = None,
                 names: Optional[Mapping[str, Hashable]] = None, meta: Optional[dict] = None,
                 labels: Optional[Mapping] = None):
        self.nodes = tuple(nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise FrameError("duplicate nodes")
        index = {n: i for i, n in enumerate(self.nodes)}
        up = {n: {n} for n in self.nodes}
        for u, v in edges:
            if u not in index or v not in index:
                raise FrameError(f"edge ({u!r}, {v!r}) mentions an unknown node")
            up[u].add(v)
        changed = True
        while changed:  # transitive closure; frames are small
            changed = False
            for u in self.nodes:
                extra = set().union(*(up[v] for v in up[u])) - up[u]
                if extra:
                    up[u] |= extra
                    changed = True
        for u in self.nodes:
            for v in up[u]:
                if v != u and u in up[v]:
                    raise FrameError(f"order is not antisymmetric at {u!r}, {v!r}")
        least = [u for u in self.nodes if len(up[u]) == len(self.nodes)]
        if not least:
            raise FrameError("frame has no least node")
        self.bottom = least[0]
        self.up = {u: tuple(v for v in self.nodes if v in up[u]) for u in self.nodes}
        self.domains = {u: tuple(domains[u]) for u in self.nodes}
        self._domain_sets = {u: frozenset(d) for u, d in self.domains.items()}
        for u in self.nodes:
            for v in self.up[u]:
                if not self._domain_sets[u] <= self._domain_sets[v]:
                    raise FrameError(f"domain shrinks from {u!r} to {v!r}")
        self.member = member
        self.equal = equal if equal is not None else (lambda node, a, b: a == b)
        self.names = dict(names or {})
        self.meta = dict(meta or {})
        self.labels = {u: (labels or {}).get(u, str(u)) for u in self.nodes}
        self._memo: dict = {}

    def leq(self, u, v) -> bool:
        return v in self.up[u]

    def in_domain(self, node, x) -> bool:
        return x in self._domain_sets[node]

    @classmethod
    def from_table(cls, nodes, edges, domains, table: Mapping, names=None, meta=None) -> "Frame":
        """Frame whose true atoms at each node are listed as ``(rel, a, b)`` triples
        (``rel`` is ``"in"`` or ``"="``); equality also includes identity."""
        facts = {n: frozenset(table.get(n, ())) for n in nodes}
        return cls(nodes, edges, domains,
                   member=lambda n, a, b: ("in", a, b) in facts[n],
                   equal=lambda n, a, b: a == b or ("=", a, b) in facts[n] or ("=", b, a) in facts[n],
                   names=names, meta=meta)


def _resolve(frame: Frame, t, env):
    if isinstance(t, Var):
        if t.name not in env:
            raise UnboundVariableError(t.name)
        return env[t.name]
    if t.name not in frame.names:
        raise UnboundVariableError(t.name)
    return frame.names[t.name]


def evaluate(frame: Frame, node, f: Formula, env: Optional[Mapping] = None) -> bool:
    """Kripke truth of *f* at *node* under *env* (variable -> object)."""
    env = dict(env or {})
    missing = free_vars(f) - set(env)
    if missing:
        raise UnboundVariableError(sorted(missing)[0])
    for name, x in env.items():
        if not frame.in_domain(node, x):
            raise DomainError(f"{name} is not in the domain at {frame.labels[node]}")
    return _ev(frame, node, f, env)


def _env_key(f, env):
    fv = free_vars(f)
    return tuple(sorted((k, v) for k, v in env.items() if k in fv))


def _ev(frame, node, f, env):
    key = (node, f, _env_key(f, env))
    memo = frame._memo
    if key in memo:
        return memo[key]
    if isinstance(f, Falsum):
        r = False
    elif isinstance(f, Member):
        r = frame.member(node, _resolve(frame, f.lhs, env), _resolve(frame, f.rhs, env))
    elif isinstance(f, Equal):
        r = frame.equal(node, _resolve(frame, f.lhs, env), _resolve(frame, f.rhs, env))
    elif isinstance(f, And):
        r = _ev(frame, node, f.left, env) and _ev(frame, node, f.right, env)
    elif isinstance(f, Or):
        r = _ev(frame, node, f.left, env) or _ev(frame, node, f.right, env)
    elif isinstance(f, Implies):
        r = all(not _ev(frame, v, f.left, env) or _ev(frame, v, f.right, env)
                for v in frame.up[node])
    elif isinstance(f, Exists):
        r = any(_ev(frame, node, f.body, {**env, f.var: x}) for x in frame.domains[node])
    elif isinstance(f, Forall):
        r = all(_ev(frame, v, f.body, {**env, f.var: x})
                for v in frame.up[node] for x in frame.domains[v])
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[key] = r
    return r


@dataclass(frozen=True)
class PersistenceFailure:
    lower: str
    upper: str
    formula: str
    env: tuple

    def __str__(self):
        where = ", ".join(f"{k}={v}" for k, v in self.env)
        return f"{self.formula} true at {self.lower} but not at {self.upper}" + (f" [{where}]" if where else "")


def check_persistence(frame: Frame, formulas: Iterable[Formula]) -> list[PersistenceFailure]:
    """(node, successor, formula, assignment) where truth is lost going up."""
    out = []
    for f in formulas:
        fv = sorted(free_vars(f))
        for u in frame.nodes:
            for vals in product(frame.domains[u], repeat=len(fv)):
                env = dict(zip(fv, vals))
                if not _ev(frame, u, f, env):
                    continue
                for v in frame.up[u]:
                    if not _ev(frame, v, f, env):
                        out.append(PersistenceFailure(
                            frame.labels[u], frame.labels[v], format_formula(f),
                            tuple((k, _obj_label(frame, x)) for k, x in env.items())))
    return out


def _obj_label(frame, x):
    for name, y in frame.names.items():
        if y == x:
            return name
    return str(x)


def check_atom_persistence(frame: Frame, objects: Optional[Sequence] = None) -> list[PersistenceFailure]:
    """Membership and equality atoms between objects of each node's domain
    (or the listed *objects*) that fail to persist."""
    out = []
    for u in frame.nodes:
        if len(frame.up[u]) == 1:
            continue  # maximal nodes have nothing to persist to
        objs = frame.domains[u] if objects is None else [x for x in objects if frame.in_domain(u, x)]
        for a in objs:
            for b in objs:
                for rel, fn in (("in", frame.member), ("=", frame.equal)):
                    if not fn(u, a, b):
                        continue
                    for v in frame.up[u]:
                        if v != u and not fn(v, a, b):
                            out.append(PersistenceFailure(
                                frame.labels[u], frame.labels[v],
                                f"{_obj_label(frame, a)} {rel} {_obj_label(frame, b)}", ()))
    return out


# ------------------------------------------------------------ term frames

def term_frame(nodes: Sequence, edges, domains: Mapping, names: Mapping[str, object],
               meta: Optional[dict] = None) -> Frame:
    """Frame over terms; nodes are node contexts from :mod:`fanmodels.terms`."""
    eq_memo: dict = {}
    kept_memo: dict = {}
    frame_ref = {}

    def kept(t, node):
        key = (t, node)
        if key not in kept_memo:
            kept_memo[key] = tuple(s for g, s in t.entries if guard_true(g, node))
        return kept_memo[key]

    def equal(node, a, b):
        if a == b:
            return True
        if _is_pure(a) and _is_pure(b):
            # distinct hats denote distinct sets
            return False
        key = (a, b, node)
        if key in eq_memo:
            return eq_memo[key]
        fr = frame_ref["f"]
        # equality at node implies equal local interpretations at every later node
        if any(interpret_term(a, v) != interpret_term(b, v) for v in fr.up[node]):
            eq_memo[key] = False
            return False
        r = True
        for v in fr.up[node]:
            ka, kb = kept(a, v), kept(b, v)
            if not (all(any(equal(v, x, y) for y in kb) for x in ka)
                    and all(any(equal(v, y, x) for x in ka) for y in kb)):
                r = False
                break
        eq_memo[key] = r
        return r

    split_memo: dict = {}

    def kept_split(t, node):
        key = (t, node)
        if key not in split_memo:
            ks = kept(t, node)
            split_memo[key] = (frozenset(y for y in ks if _is_pure(y)),
                               tuple(y for y in ks if not _is_pure(y)))
        return split_memo[key]

    def member(node, a, b):
        pure, impure = kept_split(b, node)
        if a in pure:
            return True
        if _is_pure(a):
            return any(equal(node, a, y) for y in impure)
        return any(equal(node, a, y) for y in pure) or any(equal(node, a, y) for y in impure)

    labels = {n: n.label for n in nodes}
    fr = Frame(nodes, edges, domains, member=member, equal=equal, names=names, meta=meta,
               labels=labels)
    frame_ref["f"] = fr
    return fr


@lru_cache(maxsize=None)
def _is_pure(t) -> bool:
    """All guards empty, hereditarily (the term is a hat)."""
    return all(len(g) == 0 and _is_pure(s) for g, s in t.entries)


def _hats(d, q=False):
    return [hat_seq(b, q) for b in strings_upto(d)]


def _family(frame: Frame, family):
    """Normalize a family: a name in the frame, a mapping or a callable node -> set of strings."""
    if isinstance(family, str):
        term = frame.names[family]
        d = frame.meta["d"]
        q = isinstance(term, QTerm)
        cache = frame._memo.setdefault(("family", family), {})

        def fam(node):
            if node not in cache:
                cache[node] = frozenset(b for b in strings_upto(d)
                                        if frame.in_domain(node, hat_seq(b, q))
                                        and frame.member(node, hat_seq(b, q), term))
            return cache[node]
        return fam
    if isinstance(family, Mapping):
        return lambda node: family[node]
    return family


def members_at(frame: Frame, node, name: str) -> frozenset:
    """Sequences whose hats are present at *node* and belong to the named term there."""
    return _family(frame, name)(node)


def _domain_strings(frame: Frame, node) -> frozenset:
    key = ("domain-strings", node)
    if key not in frame._memo:
        d = frame.meta.get("d")
        if d is None:
            out = frozenset(x for x in frame.domains[node] if isinstance(x, str))
        else:
            q = frame.meta.get("qterms", False)
            out = frozenset(b for b in strings_upto(d) if frame.in_domain(node, hat_seq(b, q)))
        frame._memo[key] = out
    return frame._memo[key]


def internal_decidable(frame: Frame, node, family, universe: Iterable[str]) -> bool:
    """``u in F \\/ ~(u in F)`` holds at *node* for every u in *universe*."""
    fam = _family(frame, family)
    for u in universe:
        if u in fam(node):
            continue
        if any(u in fam(v) for v in frame.up[node]):
            return False
    return True


def internal_uniform(frame: Frame, node, family, d: int) -> tuple[bool, Optional[int]]:
    """Kripke reading of 'some level n <= d is covered': at every later node,
    every sequence of length n present there has a prefix in the family."""
    fam = _family(frame, family)
    for n in range(d + 1):
        ok = True
        for v in frame.up[node]:
            present = _domain_strings(frame, v)
            members = fam(v)
            for a in level(n):
                if a in present and not any(a[:m] in members for m in range(n + 1)):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True, n
    return False, None


def c_set_biconditional(frame: Frame, node, C, Cprime, universe: Iterable[str]) -> list[str]:
    """Sequences u in *universe* where ``u in C <-> forall v (u*v in C')`` fails at *node*.

    Extensions range over the sequences present at each later node.
    """
    fC, fCp = _family(frame, C), _family(frame, Cprime)

    def all_ext(mu, u):
        return all(w in fCp(v) for v in frame.up[mu] for w in _domain_strings(frame, v)
                   if is_prefix(u, w))

    bad = []
    for u in universe:
        for mu in frame.up[node]:
            inC = u in fC(mu)
            if inC != all_ext(mu, u):
                bad.append(u)
                break
    return bad


def lem_countermodel() -> Frame:
    """Two-node chain where the atom ``a in b`` holds only at the top."""
    return Frame.from_table(
        ["bot", "top"], [("bot", "top")], {"bot": ["a", "b"], "top": ["a", "b"]},
        {"top": {("in", "a", "b")}}, names={"a": "a", "b": "b"})


def _rooted_posets(k: int):
    """Partial orders on 0..k-1 with least element 0 (up to labelling where convenient)."""
    if k == 1:
        yield []
    elif k == 2:
        yield [(0, 1)]
    elif k == 3:
        yield [(0, 1), (1, 2)]
        yield [(0, 1), (0, 2)]


def _upsets(k, edges):
    up = {i: {i} for i in range(k)}
    for a, b in edges:
        up[a].add(b)
    for _ in range(k):
        for i in range(k):
            for j in list(up[i]):
                up[i] |= up[j]
    out = []
    for mask in range(1 << k):
        s = {i for i in range(k) if mask >> i & 1}
        if all(up[i] <= s for i in s):
            out.append(frozenset(s))
    return out


def small_frames(max_nodes: int = 3):
    """All rooted frames with <= max_nodes nodes, objects a, b and monotone
    valuations of the atoms ``a in b`` and ``b in a``."""
    atoms = [("in", "a", "b"), ("in", "b", "a")]
    for k in range(1, max_nodes + 1):
        for edges in _rooted_posets(k):
            ups = _upsets(k, edges)
            for choice in product(ups, repeat=len(atoms)):
                table = {i: {atoms[j] for j, s in enumerate(choice) if i in s} for i in range(k)}
                yield Frame.from_table(list(range(k)), edges, {i: ["a", "b"] for i in range(k)},
                                       table, names={"a": "a", "b": "b"})


# ------------------------------------------------------------ presets

def _check_params(s, d):
    if not (1 <= s < d):
        raise FrameError(f"need 1 <= s < d, got s={s}, d={d}")


def _sample(d, s, seed, variant):
    preds = [DenseLevel(n, d) for n in range(min(s + 1, d))]
    return sample_pseudo_generic(d, preds, seed, variant)


def _rng(kind, seed):
    return random.Random(f"{kind}:{seed}")


def _inf_with_inf_sibling(g: FullLabeling, min_len: int = 1):
    return [u for u in g.nodes_labeled(INF) if len(u) >= max(1, min_len) and g(sibling(u)) is INF]


def preset_fand(s: int, d: int, seed: int = 0, weak_count: int = 2) -> Frame:
    """Q-term frame: bottom labelling g, legal weakenings that leave the bar
    unchanged on sequences of length <= s, and a terminal node with the
    root turned OUT under a full IN level at s + 1."""
    _check_params(s, d)
    g = _sample(d, s, seed, "A")
    rng = _rng("fand", seed)
    bottom = Bottom(g, s)
    nodes = [bottom]
    edges = []
    options = []
    for u in _inf_with_inf_sibling(g):
        if len(u) > s:
            options.append((u, IN))
        if max(len(u) + 1, s + 1) <= d:
            options.append((u, OUT))
    rng.shuffle(options)
    seen = set()
    for u, lab in options:
        if len(seen) >= weak_count:
            break
        try:
            h = legal_weaken_A(g, {u: lab}, bar_level=s + 1)
        except IllegalWeakening:
            continue
        if h in seen or h == g:
            continue
        seen.add(h)
        nodes.append(WeakNode(h, d, f"weak:{show(u)}:{lab}"))
    terminal = legal_weaken_A(g, {"": OUT}, bar_level=s + 1)
    nodes.append(WeakNode(terminal, d, "terminal:out"))
    edges = [(bottom, n) for n in nodes[1:]]
    sigma_B = make_sigma_B(d)
    names = {"B": sigma_B}
    domains = {n: _hats(s if n is bottom else d, q=True) + [sigma_B] for n in nodes}
    meta = dict(preset="fand", variant="A", s=s, d=d, seed=seed, layers=2, qterms=True)
    return term_frame(nodes, edges, domains, names, meta)


def preset_fanc(s: int, d: int, seed: int = 0, weak_count: int = 2) -> Frame:
    """Truth-value frame for C and C': weakenings (cutoff s + 1) with their own
    terminal nodes, terminal nodes for INF sequences longer than s, and a
    trivial top node."""
    _check_params(s, d)
    g = _sample(d, s, seed, "B")
    rng = _rng("fanc", seed)
    bottom = Bottom(g, s)
    s1 = s + 1
    layer1 = []
    edges = []
    layer2 = {}
    if s1 < d:
        picks = _inf_with_inf_sibling(g)
        rng.shuffle(picks)
        seen = set()
        for u in picks:
            if len(seen) >= weak_count:
                break
            h = legal_weaken_B(g, [u])
            if h in seen:
                continue
            seen.add(h)
            w = WeakNode(h, s1, f"weak{len(seen)}")
            layer1.append(w)
            above = [TerminalC(c, f"{w.name}/") for c in h.nodes_labeled(INF) if len(c) > s1]
            above.append(TrivialTop(f"{w.name}/"))
            layer2[w] = above
    terms_ = [TerminalC(c) for c in g.nodes_labeled(INF) if len(c) > s]
    top = TrivialTop()
    nodes = [bottom] + layer1 + terms_ + [top]
    for w in layer1:
        nodes.extend(layer2[w])
    for n in nodes[1:]:
        edges.append((bottom, n))
    for w, above in layer2.items():
        edges.extend((w, n) for n in above)
    C, Cp = make_C(d), make_Cprime(d)
    names = {"C": C, "Cp": Cp}

    def dom(n):
        if n is bottom:
            return _hats(s) + [C, Cp]
        if isinstance(n, WeakNode):
            return _hats(s1) + [C, Cp]
        return _hats(d) + [C, Cp]

    domains = {n: dom(n) for n in nodes}
    meta = dict(preset="fanc", variant="B", s=s, d=d, seed=seed, layers=3 if layer1 else 2)
    return term_frame(nodes, edges, domains, names, meta)


def preset_fanpi(s: int, d: int, m: int = 2, seed: int = 0) -> Frame:
    """Pi-family frame: successors PiNode(n, a) for s < n <= s + m and a with
    length > s or labelled INF."""
    _check_params(s, d)
    if m < 1:
        raise FrameError("m must be at least 1")
    g = _sample(d, s, seed, "B")
    bottom = Bottom(g, s)
    alphas = [a for a in strings_upto(d) if len(a) > s or g(a) is INF]
    pis = [PiNode(n, a) for n in range(s + 1, s + m + 1) for a in alphas]
    nodes = [bottom] + pis
    edges = [(bottom, n) for n in pis]
    capC = make_capC(d)
    names = {"capC": capC}
    for n in range(s + 1, s + m + 1):
        names[f"T{n}"] = make_Tn(n, d)
    named = [names[k] for k in sorted(names)]
    domains = {n: (_hats(s) if n is bottom else _hats(d)) + named for n in nodes}
    meta = dict(preset="fanpi", variant="B", s=s, d=d, m=m, seed=seed, layers=2)
    return term_frame(nodes, edges, domains, names, meta)


def preset_fanfull(s: int, d: int, seed: int = 0) -> Frame:
    """Full-model analogue: successors indexed by the INF sequences of g."""
    _check_params(s, d)
    g = _sample(d, s, seed, "B")
    bottom = Bottom(g, s)
    branches = [BranchNode(a) for a in g.nodes_labeled(INF)]
    nodes = [bottom] + branches
    edges = [(bottom, n) for n in branches]
    C = make_C(d)
    names = {"C": C}
    domains = {n: (_hats(s) if n is bottom else _hats(d)) + [C] for n in nodes}
    meta = dict(preset="fanfull", variant="B", s=s, d=d, seed=seed, layers=2)
    return term_frame(nodes, edges, domains, names, meta)


def build_preset(name: str, s: int, d: int, seed: int = 0, m: int = 2) -> Frame:
    if name == "fand":
        return preset_fand(s, d, seed)
    if name == "fanc":
        return preset_fanc(s, d, seed)
    if name == "fanpi":
        return preset_fanpi(s, d, m, seed)
    if name == "fanfull":
        return preset_fanfull(s, d, seed)
    raise FrameError(f"unknown preset {name!r}")


def capC_nonclosure_witness(frame: Frame) -> Optional[tuple[str, str, str]]:
    """(node, u, child) with u in the intersection term and its child not, at some
    PiNode whose index is an INF sibling of an IN node when possible."""
    fam = _family(frame, "capC")
    g = frame.bottom.g
    best = None
    for node in frame.nodes:
        if not isinstance(node, PiNode) or not node.a:
            continue
        members = fam(node)
        a = node.a
        parent = a[:-1]
        if parent in members and a not in members:
            w = (node.label, show(parent), show(a))
            if g(sibling(a)) is IN:
                return w
            if best is None:
                best = w
    return best


def frame_dump(frame: Frame) -> dict:
    """JSON-ready description: header, nodes, strict order and the
    membership table of sequence hats in each named term."""
    meta = frame.meta
    d = meta.get("d")
    q = meta.get("qterms", False)
    nodes = []
    for n in frame.nodes:
        entry = {"name": frame.labels[n], "kind": type(n).__name__}
        lab = getattr(n, "g", None) or getattr(n, "h", None)
        if lab is not None:
            entry["labeling"] = " ".join(f"{show(u)}:{l}" for u, l in lab.as_condition().entries)
        nodes.append(entry)
    order = [[frame.labels[u], frame.labels[v]] for u in frame.nodes for v in frame.up[u] if v != u]
    atoms = {}
    for n in frame.nodes:
        row = {}
        for name in sorted(frame.names):
            row[name] = [show(b) for b in strings_upto(d)
                         if frame.in_domain(n, hat_seq(b, q))
                         and frame.member(n, hat_seq(b, q), frame.names[name])]
        atoms[frame.labels[n]] = row
    header = {k: meta[k] for k in sorted(meta) if k != "qterms"}
    return {"header": header, "nodes": nodes, "order": order, "atoms": atoms}
