"""Bounded evaluators for the three star-forcing relations.

Every condition quantifier ranges over the valid conditions of depth at
most ``ctx.depth``; every term quantifier ranges over ``ctx.terms``.  The
value of a closed formula is the set of conditions forcing it, stored as
a boolean vector over the condition universe, together with (variants B
and C) a boolean vector over the negative truth values recording classical
truth of the formula after restricting its parameters.

Variants:

* ``"A"``: IN/OUT/INF conditions, Q-term parameters.  Universal clauses
  quantify over ``p'' <=_P p'`` for ``p' ~ p``; membership is gated by
  ``q >=_Q proj_Q(p)``.
* ``"B"``: IN/INF conditions, C-family terms.  Universal clauses quantify
  over weakenings ``q <=_W p`` and add the negative side condition over
  sequences b outside dom(p) with no IN prefix in p.
* ``"C"``: IN/INF conditions, Pi-family terms.  Universal clauses quantify
  over extensions; the negative side condition ranges over pairs (n, a)
  with ``|p| < n <= nbound``.

"There is an r below q" always means an extension of q within the universe.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Optional, Sequence

import numpy as np

from .bars import strings_upto
from .conditions import (
    IN, OUT, Condition, all_conditions, proj_Q, weaker_leq_W, weakening_extends,
)
from .formula import (
    And, Equal, Exists, Falsum, Forall, Formula, Implies, Member, Or, Var,
    UnboundVariableError, free_vars, parse_formula,
)
from .terms import (
    AllN, FamilyError, NegPair, NegPrime, Pair, Plus, Prime, QTerm, Term,
    neg_admits, restrict_neg,
)

__all__ = [
    "ForcingContext", "RankExhausted", "UniverseTooSmall", "Value",
    "star_force", "star_force_A", "star_force_B", "star_force_C", "forcing_set",
    "clause_ii_witness", "build_sep_term", "lemma_suite", "LemmaReport",
    "default_terms", "B_p_C", "literal_order_counterexample",
]


class RankExhausted(RuntimeError):
    pass


class UniverseTooSmall(RuntimeError):
    pass


@dataclass(frozen=True)
class Value:
    mask: np.ndarray       # bool over conditions
    cl: np.ndarray         # bool over negative truth values

    def key(self) -> bytes:
        return np.packbits(self.mask).tobytes() + b"|" + np.packbits(self.cl).tobytes()


def _f32(a):
    return a.astype(np.float32)


class ForcingContext:
    """Condition universe, term universe and the derived relations.

    *terms* maps names to terms (Q-terms for variant A, C-family terms for
    B, Pi-family terms for C).  *weakening* selects the order used by
    variant B: ``"domain"`` (weakenings keep the domain of p, up to IN
    nodes) or ``"literal"`` (only the IN clause).  *mutant* switches on a
    deliberately wrong clause and exists for negative-control tests.
    """

    def __init__(self, variant: str, depth: int, terms: Mapping[str, object],
                 rank_bound: Optional[int] = None, cutoff: Optional[int] = None,
                 nbound: Optional[int] = None, weakening: str = "domain",
                 mutant: Optional[str] = None):
        if variant not in ("A", "B", "C"):
            raise ValueError(f"unknown variant {variant!r}")
        if weakening not in ("domain", "literal"):
            raise ValueError(f"unknown weakening order {weakening!r}")
        self.variant = variant
        self.depth = depth
        self.cutoff = cutoff
        self.nbound = depth + 1 if nbound is None else nbound
        self.weakening = weakening
        self.mutant = mutant
        self.names = dict(terms)
        self.terms = [self.names[k] for k in sorted(self.names)]
        self.term_names = sorted(self.names)
        ranks = [t.rank for t in self.terms]
        self.rank_bound = max(ranks, default=0) if rank_bound is None else rank_bound
        for name, t in self.names.items():
            self._check_term(name, t)
        cv = "A" if variant == "A" else "B"
        self.conditions = all_conditions(cv, depth)
        self.index = {c.entries: i for i, c in enumerate(self.conditions)}
        N = self.N = len(self.conditions)
        items = [frozenset(c.entries) for c in self.conditions]
        ext = np.zeros((N, N), dtype=bool)
        for i in range(N):
            for j in range(N):
                ext[i, j] = items[i] <= items[j]
        self.EXT = ext                      # EXT[i, j]: condition j extends condition i
        if variant == "A":
            projs = [proj_Q(c).entries for c in self.conditions]
            self._proj_items = [frozenset(p) for p in projs]
            sim = np.array([[projs[i] == projs[j] for j in range(N)] for i in range(N)])
            self.SIM = sim
            self.REACH = (_f32(sim) @ _f32(ext)) > 0
        elif variant == "B":
            order = weaker_leq_W if weakening == "literal" else weakening_extends
            self.REACH = np.array([[order(q, p) for q in self.conditions] for p in self.conditions])
        else:
            self.REACH = ext
        self._EXT_f = _f32(ext)
        self._REACH_f = _f32(self.REACH)
        self.negs = self._negatives()
        self.K = len(self.negs)
        adm = np.zeros((self.K, N), dtype=bool)
        for k, neg in enumerate(self.negs):
            for i, c in enumerate(self.conditions):
                adm[k, i] = self._admissible(neg, c)
        self.ADM = adm
        self._ADM_f = _f32(adm)
        self._gate_cache: dict = {}
        self._atom_cache: dict = {}
        self._formula_cache: dict = {}
        self._cl_atom_cache: dict = {}

    # ---------------------------------------------------------- setup helpers

    def _check_term(self, name, t):
        if t.rank > self.rank_bound:
            raise RankExhausted(f"term {name} has rank {t.rank} > bound {self.rank_bound}")
        want = {"A": QTerm, "B": Term, "C": Term}[self.variant]
        if not isinstance(t, want):
            raise FamilyError(f"term {name} is not a {want.__name__}")
        if self.variant == "A":
            if t.guard_depth() > self.depth:
                raise UniverseTooSmall(f"term {name} has guards deeper than {self.depth}")
        else:
            fam = "C" if self.variant == "B" else "Pi"
            bad = t.families - {fam}
            if bad:
                raise FamilyError(f"term {name} uses {sorted(bad)} truth values in variant {self.variant}")

    def _negatives(self):
        if self.variant == "B":
            return [NegPrime(b) for b in strings_upto(self.depth)]
        if self.variant == "C":
            return [NegPair(n, a) for n in range(1, self.nbound + 1) for a in strings_upto(self.depth)]
        return []

    def _admissible(self, neg, p: Condition) -> bool:
        if isinstance(neg, NegPrime):
            return neg.b not in p and not p.has_in_prefix(neg.b)
        plen = p.length
        return neg.n > plen and (len(neg.a) > plen or not p.has_in_prefix(neg.a))

    def condition_index(self, p: Condition) -> int:
        want = "A" if self.variant == "A" else "B"
        if p.variant != want:
            raise ValueError(f"variant {self.variant} needs variant {want} conditions")
        try:
            return self.index[p.entries]
        except KeyError:
            raise UniverseTooSmall(f"{p} is not a valid condition of depth <= {self.depth}") from None

    # ---------------------------------------------------------- relations

    def db(self, X: np.ndarray) -> np.ndarray:
        """Conditions with some extension in X."""
        return (self._EXT_f @ _f32(X)) > 0

    def box(self, G: np.ndarray) -> np.ndarray:
        """Conditions all of whose reachable conditions lie in G."""
        return ~((self._REACH_f @ _f32(~G)) > 0)

    def ok(self, cl: np.ndarray) -> np.ndarray:
        """Conditions for which every admissible negative makes the formula true."""
        if self.K == 0:
            return np.ones(self.N, dtype=bool)
        return ~((_f32(~cl) @ self._ADM_f) > 0)

    def db_batch(self, Xs: np.ndarray) -> np.ndarray:
        return (_f32(Xs) @ self._EXT_f.T) > 0

    def box_batch(self, Gs: np.ndarray) -> np.ndarray:
        return ~((_f32(~Gs) @ self._REACH_f.T) > 0)

    def ok_batch(self, cls: np.ndarray) -> np.ndarray:
        if self.K == 0:
            return np.ones((cls.shape[0], self.N), dtype=bool)
        return ~((_f32(~cls) @ self._ADM_f) > 0)

    def gate(self, guard) -> np.ndarray:
        """Conditions p for which an entry with this guard counts towards membership."""
        if guard in self._gate_cache:
            return self._gate_cache[guard]
        conds = self.conditions
        if self.variant == "A":
            items = frozenset(guard.entries)
            if self.mutant == "raw-gate":
                m = np.array([items <= frozenset(c.entries) for c in conds])
            else:
                m = np.array([items <= pi for pi in self._proj_items])
        elif self.variant == "B":
            if any(isinstance(tv, NegPrime) for tv in guard):
                m = np.zeros(self.N, dtype=bool)
            else:
                plus = [tv.b for tv in guard if isinstance(tv, Plus)]
                if self.mutant == "exact-node":
                    m = np.array([all(c.get(b) is IN for b in plus) for c in conds])
                else:
                    m = np.array([all(c.has_in_prefix(b) for b in plus) for c in conds])
        else:
            m = np.array([all(_in_B_p_C(tv, c) for tv in guard) for c in conds])
        self._gate_cache[guard] = m
        return m

    # ---------------------------------------------------------- classical side

    def _restricted(self, t, k):
        return restrict_neg(t, self.negs[k])

    def cl_member(self, s, t) -> np.ndarray:
        key = ("in", s, t)
        if key not in self._cl_atom_cache:
            self._cl_atom_cache[key] = np.array(
                [self._restricted(s, k) in self._restricted(t, k) for k in range(self.K)], dtype=bool)
        return self._cl_atom_cache[key]

    def cl_equal(self, s, t) -> np.ndarray:
        key = ("=", s, t)
        if key not in self._cl_atom_cache:
            self._cl_atom_cache[key] = np.array(
                [self._restricted(s, k) == self._restricted(t, k) for k in range(self.K)], dtype=bool)
        return self._cl_atom_cache[key]

    # ---------------------------------------------------------- atoms

    def member(self, s, t) -> Value:
        key = ("in", s, t)
        if key in self._atom_cache:
            return self._atom_cache[key]
        mask = np.zeros(self.N, dtype=bool)
        for g, r in t.entries:
            gm = self.gate(g)
            if gm.any():
                mask |= gm & self.equal(s, r).mask
        v = Value(mask, self.cl_member(s, t) if self.K else np.zeros(0, dtype=bool))
        self._atom_cache[key] = v
        return v

    def equal(self, s, t) -> Value:
        key = ("=", s, t)
        if key in self._atom_cache:
            return self._atom_cache[key]
        good = np.ones(self.N, dtype=bool)
        for a, b in ((s, t), (t, s)):
            for g, r in a.entries:
                good &= ~self.gate(g) | self.db(self.member(r, b).mask)
        mask = self.box(good)
        cl = self.cl_equal(s, t) if self.K else np.zeros(0, dtype=bool)
        if self.variant != "A":
            mask &= self.ok(cl)
        v = Value(mask, cl)
        self._atom_cache[key] = v
        return v

    # ---------------------------------------------------------- connectives

    def falsum(self) -> Value:
        return Value(np.zeros(self.N, dtype=bool), np.zeros(self.K, dtype=bool))

    def conj(self, a: Value, b: Value) -> Value:
        return Value(a.mask & b.mask, a.cl & b.cl)

    def disj(self, a: Value, b: Value) -> Value:
        return Value(a.mask | b.mask, a.cl | b.cl)

    def implies(self, a: Value, b: Value) -> Value:
        cl = ~a.cl | b.cl
        mask = self.box(~a.mask | self.db(b.mask))
        if self.variant != "A":
            mask &= self.ok(cl)
        return Value(mask, cl)

    def exists(self, vals: Sequence[Value]) -> Value:
        if not vals:
            raise UniverseTooSmall("empty term universe")
        mask = np.zeros(self.N, dtype=bool)
        cl = np.zeros(self.K, dtype=bool)
        for v in vals:
            mask |= v.mask
            cl |= v.cl
        return Value(mask, cl)

    def forall(self, vals: Sequence[Value]) -> Value:
        if not vals:
            raise UniverseTooSmall("empty term universe")
        good = np.ones(self.N, dtype=bool)
        cl = np.ones(self.K, dtype=bool)
        for v in vals:
            good &= self.db(v.mask)
            cl &= v.cl
        mask = self.box(good)
        if self.variant != "A":
            mask &= self.ok(cl)
        return Value(mask, cl)

    # ---------------------------------------------------------- formulas

    def _term(self, t, env):
        if isinstance(t, Var):
            if t.name not in env:
                raise UnboundVariableError(t.name)
            return env[t.name]
        if t.name not in self.names:
            raise UnboundVariableError(t.name)
        return self.names[t.name]

    def value(self, f: Formula, env: Optional[Mapping] = None) -> Value:
        env = dict(env or {})
        fv = free_vars(f)
        key = (f, tuple(sorted((k, v) for k, v in env.items() if k in fv)))
        if key in self._formula_cache:
            return self._formula_cache[key]
        if isinstance(f, Falsum):
            v = self.falsum()
        elif isinstance(f, Member):
            v = self.member(self._term(f.lhs, env), self._term(f.rhs, env))
        elif isinstance(f, Equal):
            v = self.equal(self._term(f.lhs, env), self._term(f.rhs, env))
        elif isinstance(f, And):
            v = self.conj(self.value(f.left, env), self.value(f.right, env))
        elif isinstance(f, Or):
            v = self.disj(self.value(f.left, env), self.value(f.right, env))
        elif isinstance(f, Implies):
            v = self.implies(self.value(f.left, env), self.value(f.right, env))
        elif isinstance(f, Exists):
            v = self.exists([self.value(f.body, {**env, f.var: t}) for t in self.terms])
        elif isinstance(f, Forall):
            v = self.forall([self.value(f.body, {**env, f.var: t}) for t in self.terms])
        else:
            raise TypeError(f"not a formula: {f!r}")
        self._formula_cache[key] = v
        return v

    def parse(self, text: str, free: Sequence[str] = ()) -> Formula:
        return parse_formula(text, free=free, names=self.names)


def _in_B_p_C(tv, p: Condition) -> bool:
    plen = p.length
    if isinstance(tv, Pair):
        return tv.n <= plen and len(tv.a) <= plen
    if isinstance(tv, AllN):
        return len(tv.a) <= plen and p.has_in_prefix(tv.a)
    if isinstance(tv, NegPair):
        return False
    raise FamilyError(f"{tv} is not a Pi-family truth value")


def B_p_C(p: Condition) -> frozenset:
    """The (finite) set of Pi-family truth values counted as true by p."""
    plen = p.length
    out = {Pair(n, a) for n in range(plen + 1) for a in strings_upto(plen)}
    out |= {AllN(a) for a in strings_upto(plen) if p.has_in_prefix(a)}
    return frozenset(out)


# ------------------------------------------------------------ public API

def _formula(f, ctx, free=()):
    return ctx.parse(f, free) if isinstance(f, str) else f


def forcing_set(f, ctx: ForcingContext, env: Optional[Mapping] = None) -> list[Condition]:
    """All conditions of the universe that star-force f."""
    v = ctx.value(_formula(f, ctx, tuple(env or ())), env)
    return [c for c, m in zip(ctx.conditions, v.mask) if m]


def star_force(p: Condition, f, ctx: ForcingContext, env: Optional[Mapping] = None) -> bool:
    f = _formula(f, ctx, tuple(env or ()))
    i = ctx.condition_index(p)
    return bool(ctx.value(f, env).mask[i])


def _variant_call(variant):
    def run(p: Condition, f, ctx: ForcingContext, env: Optional[Mapping] = None) -> bool:
        if ctx.variant != variant:
            raise ValueError(f"context is for variant {ctx.variant}, not {variant}")
        return star_force(p, f, ctx, env)
    run.__name__ = f"star_force_{variant}"
    run.__doc__ = f"Bounded star-forcing for variant {variant}."
    return run


star_force_A = _variant_call("A")
star_force_B = _variant_call("B")
star_force_C = _variant_call("C")


def clause_ii_witness(p: Condition, f, ctx: ForcingContext, env: Optional[Mapping] = None):
    """First admissible negative truth value (for p) under which f is
    classically false, or None.  Only meaningful for variants B and C."""
    if ctx.variant == "A":
        return None
    f = _formula(f, ctx, tuple(env or ()))
    i = ctx.condition_index(p)
    cl = ctx.value(f, env).cl
    for k, neg in enumerate(ctx.negs):
        if ctx.ADM[k, i] and not cl[k]:
            return neg
    return None


def build_sep_term(variant: str, phi, sigma, ctx: ForcingContext, var: str = "x"):
    """Separating term for ``{x in sigma | phi(x)}``, evaluated in *ctx*.

    * A: ``<proj_Q(p), tau>`` for ``<q, tau>`` in sigma and p with
      ``q >=_Q proj_Q(p)`` forcing ``phi(tau)``.
    * B: ``<B' + {c+ : p(c) = IN}, tau>`` for p forcing ``phi(tau)``, and
      ``<B' + {~b'}, tau>`` when ``~b'`` forces B' and ``phi(tau)``.
    * C: ``<B_i + B_p, tau>`` for p forcing ``phi(tau)``, and
      ``<B_i + {~(n, a)}, tau>`` when ``~(n, a)`` forces B_i and ``phi(tau)``.
    """
    if variant != ctx.variant:
        raise ValueError(f"context is for variant {ctx.variant}, not {variant}")
    phi = _formula(phi, ctx, (var,))
    if free_vars(phi) - {var}:
        raise UnboundVariableError(sorted(free_vars(phi) - {var})[0])
    entries = set()
    for g, tau in sigma.entries:
        v = ctx.value(phi, {var: tau})
        if variant == "A":
            gm = ctx.gate(g)
            for i, c in enumerate(ctx.conditions):
                if gm[i] and v.mask[i]:
                    entries.add((proj_Q(c), tau))
            continue
        for i, c in enumerate(ctx.conditions):
            if not v.mask[i]:
                continue
            if variant == "B":
                extra = {Plus(u) for u in c.in_nodes()}
            else:
                extra = set(B_p_C(c))
            entries.add((frozenset(g) | extra, tau))
        for k, neg in enumerate(ctx.negs):
            if v.cl[k] and neg_admits(neg, g):
                entries.add((frozenset(g) | {neg}, tau))
    if variant == "A":
        return QTerm(frozenset(entries))
    return Term(frozenset(entries))


# ------------------------------------------------------------ lemma suite

def default_terms(variant: str, depth: int = 2) -> dict:
    """A six-term universe exercising every guard shape of the variant."""
    from .terms import make_C, make_capC, make_Cprime, make_hat, make_sigma_B, make_Tn, numeral
    if variant == "A":
        e = make_hat(numeral(0), True)
        one = make_hat(numeral(1), True)
        cond = lambda m: Condition("A", m)
        return {
            "o": e, "i": one, "sB": make_sigma_B(1),
            "s1": QTerm(frozenset({(cond({"": OUT}), e)})),
            "s2": QTerm(frozenset({(cond({"": OUT, "0": IN}), e), (cond({"": OUT, "1": OUT}), one)})),
            "s3": QTerm(frozenset({(cond({"": IN}), e)})),
        }
    e = make_hat(numeral(0))
    one = make_hat(numeral(1))
    if variant == "B":
        return {
            "o": e, "i": one, "C": make_C(1), "Cp": make_Cprime(1),
            "s1": Term(frozenset({(frozenset({Prime("0")}), e)})),
            "s2": Term(frozenset({(frozenset({Plus("0")}), e), (frozenset({NegPrime("1")}), one)})),
        }
    return {
        "o": e, "i": one, "T1": make_Tn(1, 1), "capC": make_capC(1),
        "s1": Term(frozenset({(frozenset({AllN("0")}), e)})),
        "s2": Term(frozenset({(frozenset({NegPair(3, "")}), e), (frozenset({Pair(2, "1")}), one)})),
    }


@dataclass
class LemmaReport:
    variant: str
    budget: dict
    conditions: int
    terms: int
    formulas: int
    distinct_values: int
    counterexamples: list = field(default_factory=list)
    # (representative formula, forcing mask) per distinct value; not serialized
    representatives: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def as_dict(self) -> dict:
        return {
            "variant": self.variant, "budget": self.budget, "conditions": self.conditions,
            "terms": self.terms, "formulas": self.formulas, "distinct_values": self.distinct_values,
            "counterexamples": self.counterexamples,
        }


def _lemma_relations(ctx: ForcingContext):
    """(name, relation) pairs: relation[p, q] means p forcing must pass to q."""
    if ctx.variant == "A":
        return [("sim-invariance", ctx.SIM), ("extension-monotonicity", ctx.EXT)]
    if ctx.variant == "B":
        return [("weakening-monotonicity", ctx.REACH)]
    return [("extension-monotonicity", ctx.EXT)]


class _Pool:
    """Distinct values with a representative formula and a syntactic count."""

    def __init__(self):
        self.items: dict = {}

    def add(self, key, val, rep, count):
        if key in self.items:
            v, r, c = self.items[key]
            self.items[key] = (v, r, c + count)
        else:
            self.items[key] = (val, rep, count)

    def merged(self, other):
        out = _Pool()
        for src in (self, other):
            for k, (v, r, c) in src.items.items():
                out.add(k, v, r, c)
        return out

    def __len__(self):
        return len(self.items)

    def values(self):
        return list(self.items.values())


def _vec_key(vals):
    return b"#".join(v.key() for v in vals)


def lemma_suite(variant: str, ctx: Optional[ForcingContext] = None, depth: int = 2,
                max_formula_depth: int = 3, max_counterexamples: int = 5,
                workers: int = 1) -> LemmaReport:
    """Check the invariance/monotonicity lemmas on every formula of depth
    <= max_formula_depth (atoms and bot have depth 1) built from the
    context's term names, with up to two variables.

    Formulas are grouped by their value (forcing set plus classical
    profile), which determines the value of every compound built from
    them; each group is checked once and the syntactic count is reported.
    """
    if max_formula_depth > 3:
        raise ValueError("budget exceeded: formula depth is limited to 3")
    if ctx is None and depth > 2:
        raise ValueError("budget exceeded: need depth <= 2 and at most 6 terms")
    if ctx is None:
        ctx = ForcingContext(variant, depth, default_terms(variant, depth))
    if ctx.depth > 2 or len(ctx.terms) > 6:
        raise ValueError("budget exceeded: need depth <= 2 and at most 6 terms")
    names = ctx.term_names
    T = ctx.terms
    nT = len(T)
    relations = _lemma_relations(ctx)
    report = LemmaReport(variant, {"depth": ctx.depth, "terms": nT, "formula_depth": max_formula_depth,
                                   "nbound": ctx.nbound if variant == "C" else None,
                                   "weakening": ctx.weakening if variant == "B" else None},
                         ctx.N, nT, 0, 0)
    seen_closed: dict = {}

    def check(val: Value, rep: str):
        seen_closed.setdefault(val.key(), (val.mask, rep))

    # depth 1 ------------------------------------------------------------
    closed = {1: _Pool()}
    closed[1].add(ctx.falsum().key(), ctx.falsum(), "bot", 1)
    for a, b in product(range(nT), repeat=2):
        for rel, fn in (("in", ctx.member), ("=", ctx.equal)):
            v = fn(T[a], T[b])
            closed[1].add(v.key(), v, f"{names[a]} {rel} {names[b]}", 1)

    def open1_atoms(var):
        out = _Pool()
        for rel, fn in (("in", ctx.member), ("=", ctx.equal)):
            for b in range(nT):
                vec = [fn(T[x], T[b]) for x in range(nT)]
                out.add(_vec_key(vec), vec, f"{var} {rel} {names[b]}", 1)
                vec = [fn(T[b], T[x]) for x in range(nT)]
                out.add(_vec_key(vec), vec, f"{names[b]} {rel} {var}", 1)
            vec = [fn(T[x], T[x]) for x in range(nT)]
            out.add(_vec_key(vec), vec, f"{var} {rel} {var}", 1)
        return out

    open1 = {1: open1_atoms("x")}
    # two-variable atoms, as nT x nT grids of values indexed [x][y]
    open2 = []
    for rel, fn in (("in", ctx.member), ("=", ctx.equal)):
        open2.append(([[fn(T[x], T[y]) for y in range(nT)] for x in range(nT)], f"x {rel} y", 1))
        open2.append(([[fn(T[y], T[x]) for y in range(nT)] for x in range(nT)], f"y {rel} x", 1))
    # atoms in y alone or closed atoms also appear under a y-binder, but their
    # quantified forms coincide with x-formulas up to renaming or are closed.

    for _, (v, rep, _) in closed[1].items.items():
        check(v, rep)

    def combine_closed(left: _Pool, right: _Pool, out: _Pool, batch=True):
        Ls = left.values()
        Rs = right.values()
        if not Ls or not Rs:
            return
        Rmask = np.array([r[0].mask for r in Rs])
        Rcl = np.array([r[0].cl for r in Rs]) if ctx.K else np.zeros((len(Rs), 0), dtype=bool)
        Rdb = ctx.db_batch(Rmask)
        for lv, lrep, lc in Ls:
            # and / or
            for rv, rrep, rc in Rs:
                v = ctx.conj(lv, rv)
                out.add(v.key(), v, f"({lrep}) /\\ ({rrep})", lc * rc)
                v = ctx.disj(lv, rv)
                out.add(v.key(), v, f"({lrep}) \\/ ({rrep})", lc * rc)
            G = ~lv.mask[None, :] | Rdb
            masks = ctx.box_batch(G)
            cls = ~lv.cl[None, :] | Rcl
            if variant != "A":
                masks &= ctx.ok_batch(cls)
            for j, (rv, rrep, rc) in enumerate(Rs):
                v = Value(masks[j], cls[j])
                out.add(v.key(), v, f"({lrep}) -> ({rrep})", lc * rc)

    def quantify(pool_vecs, var, out: _Pool):
        for vec, rep, c in pool_vecs:
            v = ctx.exists(vec)
            out.add(v.key(), v, f"exists {var}. {rep}", c)
            v = ctx.forall(vec)
            out.add(v.key(), v, f"forall {var}. {rep}", c)

    if max_formula_depth == 1:
        return _finish(report, ctx, relations, closed, seen_closed, workers, max_counterexamples)

    # depth 2 closed
    closed[2] = _Pool()
    combine_closed(closed[1], closed[1], closed[2])
    quantify(open1[1].values(), "x", closed[2])
    for _, (v, rep, _) in closed[2].items.items():
        check(v, rep)

    if max_formula_depth >= 3:
        # depth 2 formulas with free x
        open1[2] = _Pool()
        lefts = [(vec, rep, c, True) for vec, rep, c in open1[1].values()] + \
                [([v] * nT, rep, c, False) for v, rep, c in closed[1].values()]
        for (lvec, lrep, lc, lo), (rvec, rrep, rc, ro) in product(lefts, repeat=2):
            if not lo and not ro:
                continue  # closed combinations are counted in closed[2]
            for op in ("/\\", "\\/", "->"):
                if op == "/\\":
                    vec = [ctx.conj(a, b) for a, b in zip(lvec, rvec)]
                elif op == "\\/":
                    vec = [ctx.disj(a, b) for a, b in zip(lvec, rvec)]
                else:
                    vec = [ctx.implies(a, b) for a, b in zip(lvec, rvec)]
                open1[2].add(_vec_key(vec), vec, f"({lrep}) {op} ({rrep})", lc * rc)
        for grid, rep, c in open2:
            vec = [ctx.exists(grid[x]) for x in range(nT)]
            open1[2].add(_vec_key(vec), vec, f"exists y. {rep}", c)
            vec = [ctx.forall(grid[x]) for x in range(nT)]
            open1[2].add(_vec_key(vec), vec, f"forall y. {rep}", c)
        # depth 3 closed
        closed[3] = _Pool()
        upto2 = closed[1].merged(closed[2])
        combine_closed(closed[2], upto2, closed[3])
        combine_closed(closed[1], closed[2], closed[3])
        quantify(open1[2].values(), "x", closed[3])
        for _, (v, rep, _) in closed[3].items.items():
            check(v, rep)

    return _finish(report, ctx, relations, closed, seen_closed, workers, max_counterexamples)


def _check_chunk(args):
    """Counterexamples (value index, relation name, p, q) in one shard of values."""
    start, masks, relations, limit = args
    out = []
    for off, F in enumerate(masks):
        for rname, R in relations:
            bad = F & ((_f32(R) @ _f32(~F)) > 0)
            for p in np.flatnonzero(bad):
                if len(out) >= limit:
                    return out
                q = int(np.flatnonzero(R[p] & ~F)[0])
                out.append((start + off, rname, int(p), q))
    return out


def _finish(report, ctx, relations, closed, seen, workers, limit):
    entries = list(seen.values())
    masks = [m for m, _ in entries]
    nshards = max(1, min(workers, len(masks)))
    size = -(-len(masks) // nshards) if masks else 0
    jobs = [(i, masks[i:i + size], relations, limit) for i in range(0, len(masks), size or 1)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = [x for part in pool.map(_check_chunk, jobs) for x in part]
    else:
        found = [x for job in jobs for x in _check_chunk(job)]
    found.sort()
    for idx, rname, p, q in found[:limit]:
        rep = entries[idx][1]
        report.counterexamples.append({
            "lemma": rname, "formula": rep,
            "p": str(ctx.conditions[p]), "q": str(ctx.conditions[q]),
            "trace": _trace(ctx, rep, p, q),
        })
    report.formulas = sum(sum(c for _, _, c in pool.values()) for pool in closed.values())
    report.distinct_values = len(entries)
    report.representatives = [(rep, m) for m, rep in entries]
    return report


def _trace(ctx, rep, p, q):
    """Truth of every subformula of *rep* at p and at q."""
    try:
        f = ctx.parse(rep)
    except Exception:  # pragma: no cover - representatives always parse
        return []
    from .formula import subformulas, format_formula
    lines = []
    seen = set()
    for sub in subformulas(f):
        if sub in seen or free_vars(sub):
            continue
        seen.add(sub)
        v = ctx.value(sub)
        lines.append(f"{format_formula(sub)}: p={'T' if v.mask[p] else 'F'} q={'T' if v.mask[q] else 'F'}")
    return lines


def literal_order_counterexample(weakening: str = "literal") -> dict:
    """The pair that breaks monotonicity under the IN-clause-only order.

    sigma = {<{0'}, x>}, tau = {<{}, x>} with x the empty-set term,
    p = {e:INF, 0:INF}, q = {e:INF}; q <=_W p holds in the literal order.
    """
    from .conditions import INF
    from .terms import make_hat, numeral
    x = make_hat(numeral(0))
    sigma = Term(frozenset({(frozenset({Prime("0")}), x)}))
    tau = Term(frozenset({(frozenset(), x)}))
    ctx = ForcingContext("B", 2, {"sigma": sigma, "tau": tau, "x": x}, weakening=weakening)
    p = Condition("B", {"": INF, "0": INF})
    q = Condition("B", {"": INF})
    order = weaker_leq_W if weakening == "literal" else weakening_extends
    return {
        "p": str(p), "q": str(q), "q_below_p": order(q, p),
        "p_forces": star_force(p, "sigma = tau", ctx),
        "q_forces": star_force(q, "sigma = tau", ctx),
    }
