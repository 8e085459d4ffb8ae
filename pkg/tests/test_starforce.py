from functools import lru_cache
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fanmodels.bars import strings_upto
from fanmodels.conditions import (
    IN, INF, Condition, all_conditions, proj_Q, weakening_extends,
)
from fanmodels.formula import (
    And, Equal, Exists, Falsum, Forall, Implies, Member, Or, Ref, Var, format_formula, parse_formula,
)
from fanmodels.starforce import (
    B_p_C, ForcingContext, RankExhausted, UniverseTooSmall, build_sep_term, clause_ii_witness,
    default_terms, forcing_set, lemma_suite, literal_order_counterexample, star_force,
    star_force_A, star_force_B, star_force_C,
)
from fanmodels.terms import (
    FamilyError, NegPair, NegPrime, Plus, Prime, QTerm, hat_seq, make_C, make_Cprime, make_hat,
    make_sigma_B, make_Tn, numeral, restrict_neg,
)


# naive oracle: one clause at a time, per condition --------------------------------------

class Naive:
    def __init__(self, variant, depth, terms):
        self.v = variant
        self.terms = dict(terms)
        self.U = all_conditions("A" if variant == "A" else "B", depth)
        items = {c: set(c.entries) for c in self.U}
        self.up = {p: [r for r in self.U if items[p] <= items[r]] for p in self.U}
        if variant == "A":
            self.reach = {p: [r for p2 in self.U if proj_Q(p2) == proj_Q(p) for r in self.up[p2]]
                          for p in self.U}
        elif variant == "B":
            self.reach = {p: [q for q in self.U if weakening_extends(q, p)] for p in self.U}
        else:
            self.reach = self.up
        if variant == "B":
            self.negs = [NegPrime(b) for b in strings_upto(depth)]
        elif variant == "C":
            self.negs = [NegPair(n, a) for n in range(1, depth + 2) for a in strings_upto(depth)]
        else:
            self.negs = []
        self.memo = {}

    def gate(self, g, p):
        if self.v == "A":
            return set(g.entries) <= set(proj_Q(p).entries)
        if self.v == "B":
            return all(isinstance(tv, Plus) and p.has_in_prefix(tv.b) or isinstance(tv, Prime)
                       for tv in g)
        return g <= B_p_C(p)

    def admissible(self, neg, p):
        if isinstance(neg, NegPrime):
            return neg.b not in p and not p.has_in_prefix(neg.b)
        return neg.n > p.length and (len(neg.a) > p.length or not p.has_in_prefix(neg.a))

    def classical(self, neg, f, env):
        t = lambda x: restrict_neg(env[x.name] if isinstance(x, Var) else self.terms[x.name], neg)
        if isinstance(f, Falsum):
            return False
        if isinstance(f, Member):
            return t(f.lhs) in t(f.rhs)
        if isinstance(f, Equal):
            return t(f.lhs) == t(f.rhs)
        if isinstance(f, And):
            return self.classical(neg, f.left, env) and self.classical(neg, f.right, env)
        if isinstance(f, Or):
            return self.classical(neg, f.left, env) or self.classical(neg, f.right, env)
        if isinstance(f, Implies):
            return not self.classical(neg, f.left, env) or self.classical(neg, f.right, env)
        vals = [self.classical(neg, f.body, {**env, f.var: s}) for s in self.terms.values()]
        return any(vals) if isinstance(f, Exists) else all(vals)

    def side(self, p, f, env):
        return all(self.classical(n, f, env) for n in self.negs if self.admissible(n, p))

    def force(self, p, f, env=None):
        env = env or {}
        key = (p, f, tuple(sorted(env.items(), key=lambda kv: kv[0])))
        if key not in self.memo:
            self.memo[key] = self._force(p, f, env)
        return self.memo[key]

    def eventually(self, r, f, env):
        return any(self.force(r3, f, env) for r3 in self.up[r])

    def _force(self, p, f, env):
        t = lambda x: env[x.name] if isinstance(x, Var) else self.terms[x.name]
        if isinstance(f, Falsum):
            return False
        if isinstance(f, Member):
            s, tau = t(f.lhs), t(f.rhs)
            return any(self.gate(g, p) and self.force(p, Equal(Var("_a"), Var("_b")), {"_a": s, "_b": rho})
                       for g, rho in tau.entries)
        if isinstance(f, Equal):
            s, tau = t(f.lhs), t(f.rhs)
            for r in self.reach[p]:
                for a, b in ((s, tau), (tau, s)):
                    for g, rho in a.entries:
                        if self.gate(g, r) and not self.eventually(
                                r, Member(Var("_a"), Var("_b")), {"_a": rho, "_b": b}):
                            return False
            return self.side(p, f, env)
        if isinstance(f, And):
            return self.force(p, f.left, env) and self.force(p, f.right, env)
        if isinstance(f, Or):
            return self.force(p, f.left, env) or self.force(p, f.right, env)
        if isinstance(f, Implies):
            ok = all(not self.force(r, f.left, env) or self.eventually(r, f.right, env)
                     for r in self.reach[p])
            return ok and self.side(p, f, env)
        if isinstance(f, Exists):
            return any(self.force(p, f.body, {**env, f.var: s}) for s in self.terms.values())
        ok = all(self.eventually(r, f.body, {**env, f.var: s})
                 for r in self.reach[p] for s in self.terms.values())
        return ok and self.side(p, f, env)


def _closed(names):
    refs = st.sampled_from([Ref(n) for n in names])
    atoms = st.one_of(st.just(Falsum()), st.builds(Member, refs, refs), st.builds(Equal, refs, refs))
    xs = st.sampled_from([Var("x")] + [Ref(n) for n in names])
    open_atoms = st.one_of(st.builds(Member, xs, xs), st.builds(Equal, xs, xs))
    body = st.one_of(open_atoms, st.builds(Implies, open_atoms, open_atoms),
                     st.builds(Or, open_atoms, open_atoms))
    leaves = st.one_of(atoms, body.map(lambda b: Exists("x", b)), body.map(lambda b: Forall("x", b)))
    return st.recursive(leaves, lambda kids: st.one_of(
        st.builds(And, kids, kids), st.builds(Or, kids, kids), st.builds(Implies, kids, kids)),
        max_leaves=3)


NAIVE = {}


@lru_cache(maxsize=None)
def default_ctx(variant, depth=2):
    return ForcingContext(variant, depth, default_terms(variant))


def naive_for(variant):
    if variant not in NAIVE:
        terms = default_terms(variant)
        NAIVE[variant] = (ForcingContext(variant, 1, terms), Naive(variant, 1, terms))
    return NAIVE[variant]


@pytest.mark.parametrize("variant", "ABC")
@settings(max_examples=60)
@given(data=st.data())
def test_matrix_evaluator_matches_naive(variant, data):
    ctx, nv = naive_for(variant)
    f = data.draw(_closed(ctx.term_names))
    got = ctx.value(f).mask
    want = np.array([nv.force(p, f) for p in ctx.conditions])
    assert (got == want).all(), format_formula(f)


@pytest.mark.parametrize("variant", "ABC")
def test_matrix_evaluator_matches_naive_on_atoms_depth_two(variant):
    terms = default_terms(variant)
    ctx = ForcingContext(variant, 2, terms)
    nv = Naive(variant, 2, terms)
    for s, t in product(sorted(terms), repeat=2):
        for f in (Member(Ref(s), Ref(t)), Equal(Ref(s), Ref(t))):
            want = np.array([nv.force(p, f) for p in ctx.conditions])
            assert (ctx.value(f).mask == want).all(), format_formula(f)


# worked examples ----------------------------------------------------------------------------

A = lambda m: Condition("A", m)
Bc = lambda m: Condition("B", m)


def test_variant_A_examples():
    terms = {"h0": hat_seq("0", q=True), "sB": make_sigma_B(1)}
    ctx = ForcingContext("A", 2, terms)
    for p in ctx.conditions:
        assert star_force_A(p, "h0 = h0", ctx)
        assert not star_force_A(p, "bot", ctx)
    assert star_force_A(A({"": INF, "0": IN}), "h0 in sB", ctx)
    assert star_force_A(A({"": IN}), "h0 in sB", ctx)
    assert not star_force_A(A({"": INF}), "h0 in sB", ctx)


def test_variant_B_examples():
    terms = {"h0": hat_seq("0"), "o": hat_seq(""), "C": make_C(2), "Cp": make_Cprime(2)}
    ctx = ForcingContext("B", 2, terms)
    assert star_force_B(Bc({"": INF, "0": IN}), "h0 in C", ctx)
    assert not star_force_B(Bc({"": INF}), "h0 in C", ctx)
    assert all(star_force_B(p, "h0 = h0", ctx) for p in ctx.conditions)
    # membership carries no negative side condition: primed guards always pass
    assert all(star_force_B(p, "o in Cp", ctx) for p in ctx.conditions)
    # equality does: under the negative value for e, e drops out of Cp
    assert clause_ii_witness(Bc({"": INF}), "Cp = Cp", ctx) is None
    assert not star_force_B(Bc({"": INF}), "C = Cp", ctx)


def test_variant_C_examples():
    terms = {"h0": hat_seq("0"), "T1": make_Tn(1, 2), "T2": make_Tn(2, 2), "capC": default_terms("C")["capC"]}
    ctx = ForcingContext("C", 2, terms)
    p = Bc({"": INF, "0": INF, "1": INF})
    assert star_force_C(p, "h0 in T1", ctx)
    assert not star_force_C(Bc({"": INF}), "h0 in T1", ctx)
    assert not any(star_force_C(q, "bot", ctx) for q in ctx.conditions)
    q = Bc({"": INF})
    w = clause_ii_witness(q, "T1 = T2", ctx)
    assert isinstance(w, NegPair) and w.n > q.length
    assert restrict_neg(terms["T1"], w) != restrict_neg(terms["T2"], w)
    assert not star_force_C(q, "T1 = T2", ctx)


def test_variant_guard():
    ctx = ForcingContext("B", 1, default_terms("B"))
    with pytest.raises(ValueError):
        star_force_A(Bc({"": INF}), "o = o", ctx)
    with pytest.raises(ValueError):
        star_force(A({"": INF}), "o = o", ctx)


def test_errors():
    terms = default_terms("B")
    with pytest.raises(RankExhausted):
        ForcingContext("B", 2, terms, rank_bound=1)
    with pytest.raises(FamilyError):
        ForcingContext("B", 2, {"t": make_Tn(1, 1)})
    with pytest.raises(FamilyError):
        ForcingContext("A", 2, {"t": make_C(1)})
    with pytest.raises(UniverseTooSmall):
        ForcingContext("A", 0, {"s": make_sigma_B(1)})
    ctx = ForcingContext("B", 1, terms)
    with pytest.raises(UniverseTooSmall):
        star_force(Bc({"": INF, "0": INF, "00": IN}), "o = o", ctx)
    with pytest.raises(UniverseTooSmall):
        ForcingContext("B", 1, {}).value(parse_formula("exists x. x = x"))


def test_forcing_set_and_determinism():
    ctx = ForcingContext("C", 2, default_terms("C"))
    fs = forcing_set("o in T1", ctx)
    assert fs == [p for p in ctx.conditions if star_force(p, "o in T1", ctx)]
    ctx2 = ForcingContext("C", 2, default_terms("C"))
    assert fs == forcing_set("o in T1", ctx2)


# monotonicity of the forcing sets -----------------------------------------------------------------

@pytest.mark.parametrize("variant", "ABC")
@settings(max_examples=40)
@given(data=st.data())
def test_forcing_sets_are_closed_downward(variant, data):
    ctx = default_ctx(variant)
    f = data.draw(_closed(ctx.term_names))
    m = ctx.value(f).mask
    rel = ctx.REACH if variant != "A" else ctx.EXT
    # m[p] and rel[p, q] imply m[q]
    assert not (rel[m] & ~m[None, :]).any()
    if variant == "A":
        assert not (ctx.SIM[m] & ~m[None, :]).any()


# lemma suites --------------------------------------------------------------------------------------

@pytest.mark.parametrize("variant", "ABC")
def test_lemma_suite_small(variant):
    ctx = default_ctx(variant)
    r = lemma_suite(variant, ctx, max_formula_depth=2)
    assert r.ok and r.formulas == 16112 and r.terms == 6
    assert r.conditions == {"A": 551, "B": 100, "C": 100}[variant]
    for rep, mask in r.representatives[:40]:
        assert (ctx.value(ctx.parse(rep)).mask == mask).all(), rep
    d = r.as_dict()
    assert d["counterexamples"] == [] and "representatives" not in d


@pytest.mark.parametrize("variant,mutant,lemma", [
    ("A", "raw-gate", "sim-invariance"), ("B", "exact-node", "weakening-monotonicity")])
def test_mutants_are_caught(variant, mutant, lemma):
    ctx = ForcingContext(variant, 2, default_terms(variant), mutant=mutant)
    r = lemma_suite(variant, ctx, max_formula_depth=2)
    assert not r.ok
    cx = r.counterexamples[0]
    assert cx["lemma"] == lemma and cx["trace"]
    assert f"{cx['formula']}: p=T q=F" in cx["trace"]


def test_literal_order_breaks_monotonicity():
    cx = literal_order_counterexample()
    assert cx == {"p": "{e:INF, 0:INF}", "q": "{e:INF}", "q_below_p": True,
                  "p_forces": True, "q_forces": False}
    assert not literal_order_counterexample("domain")["q_below_p"]
    ctx = ForcingContext("B", 2, default_terms("B"), weakening="literal")
    assert not lemma_suite("B", ctx, max_formula_depth=2).ok


def test_budget():
    with pytest.raises(ValueError, match="budget"):
        lemma_suite("A", max_formula_depth=4)
    with pytest.raises(ValueError, match="budget"):
        lemma_suite("B", depth=3)


# separating terms ---------------------------------------------------------------------------------

@pytest.mark.parametrize("variant", "ABC")
def test_sep_term_falsum_is_empty(variant):
    terms = default_terms(variant)
    ctx = ForcingContext(variant, 2, terms)
    for name in ("s2", "o"):
        assert build_sep_term(variant, "bot", terms[name], ctx).entries == frozenset()


@pytest.mark.parametrize("variant", "BC")
def test_sep_term_reflexive_formula(variant):
    terms = default_terms(variant)
    ctx = ForcingContext(variant, 2, terms)
    sigma = terms["s2"]
    sep = build_sep_term(variant, "x = x", sigma, ctx)
    assert sep.rank <= sigma.rank + 1
    big = dict(terms, sep=sep)
    ctx2 = ForcingContext(variant, 2, big)
    for p in ctx2.conditions:
        assert star_force(p, "sep = s2", ctx2)


def test_sep_term_variant_A():
    terms = default_terms("A")
    ctx = ForcingContext("A", 2, terms)
    sep = build_sep_term("A", "x = x", terms["s2"], ctx)
    assert isinstance(sep, QTerm)
    ctx2 = ForcingContext("A", 2, dict(terms, sep=sep))
    assert all(star_force(p, "sep = s2", ctx2) for p in ctx2.conditions)


def test_sep_term_selects_members():
    e = make_hat(numeral(0))
    one = make_hat(numeral(1))
    sigma = make_hat(frozenset({numeral(0), numeral(1)}))
    terms = {"o": e, "i": one, "sigma": sigma, "h": make_hat(frozenset({numeral(0)}))}
    ctx = ForcingContext("B", 1, terms)
    sep = build_sep_term("B", "x in h", sigma, ctx)
    ctx2 = ForcingContext("B", 1, dict(terms, sep=sep))
    for p in ctx2.conditions:
        assert star_force(p, "sep = h", ctx2)
        assert star_force(p, "o in sep", ctx2) and not star_force(p, "i in sep", ctx2)
