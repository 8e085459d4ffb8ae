import random

import pytest
from hypothesis import given, strategies as st

from fanmodels.bars import strings_upto
from fanmodels.conditions import IN, INF, OUT, Condition, FullLabeling, complete_labeling
from fanmodels.terms import (
    EMPTY, AllN, Bottom, BranchNode, FamilyError, NegPair, NegPrime, Pair, PiNode, Plus, Prime,
    QTerm, Term, TerminalC, TrivialTop, WeakNode, format_term, guard_true, hat_seq, hf_rank,
    interpret_term, make_C, make_capC, make_Cprime, make_hat, make_sigma_B, make_Tn, neg_admits,
    numeral, parse_term, restrict_neg, seq_of_set, tv_true,
)

D = 3


def labeling(seed, d=D, variant="B"):
    return complete_labeling(Condition(variant, {"": INF}), d, random.Random(seed))


def hat_set(b):
    return numeral(strings_upto(D).index(b))


def decoded(x, d=D):
    return {seq_of_set(y, d) for y in x}


hf = st.recursive(st.just(frozenset()), lambda kids: st.frozensets(kids, max_size=3), max_leaves=8)
seqs = st.sampled_from(strings_upto(D))


# truth values ------------------------------------------------------------------------

def test_truth_table_examples():
    g = labeling(0)
    assert tv_true(Prime("0"), Bottom(g, D))
    assert tv_true(NegPrime("01"), TerminalC("01"))
    assert not tv_true(NegPrime("0"), TerminalC("01"))
    assert not tv_true(Plus("0"), TerminalC("01"))
    assert tv_true(Plus("1"), TerminalC("01"))
    assert not tv_true(Prime("01"), TerminalC("01"))
    assert not tv_true(NegPrime("0"), Bottom(g, D))
    assert not tv_true(Pair(2, "0"), PiNode(2, "0"))
    assert tv_true(Pair(3, "0"), PiNode(2, "0"))
    assert tv_true(NegPair(2, "0"), PiNode(2, "0"))
    assert not tv_true(AllN("0"), PiNode(2, "0"))
    assert tv_true(Plus("0"), TrivialTop()) and not tv_true(NegPrime("0"), TrivialTop())
    with pytest.raises(FamilyError):
        tv_true(Pair(1, ""), TerminalC("0"))
    with pytest.raises(FamilyError):
        tv_true(Plus(""), PiNode(1, ""))


@given(st.integers(0, 10 ** 6), seqs)
def test_plus_and_alln_read_the_labeling(seed, b):
    g = labeling(seed)
    assert tv_true(Plus(b), Bottom(g, 1)) == (g(b) is IN)
    assert tv_true(AllN(b), Bottom(g, 1)) == (g(b) is IN)
    assert tv_true(Prime(b), Bottom(g, 1)) == (len(b) <= 1)


@given(st.integers(0, 10 ** 6), st.integers(1, D - 1))
def test_truth_persists_to_successors(seed, s):
    # positive truth values true at bottom stay true at every successor kind
    g = labeling(seed)
    bot = Bottom(g, s)
    succ = [TerminalC(c) for c in g.nodes_labeled(INF) if len(c) > s]
    succ += [BranchNode(c) for c in g.nodes_labeled(INF) if len(c) > s]
    succ += [TrivialTop(), WeakNode(g, s + 1)]
    for b in strings_upto(D):
        for tv in (Plus(b), Prime(b)):
            if tv_true(tv, bot):
                assert all(tv_true(tv, n) for n in succ), (tv, succ)
    # Pi nodes: only standard objects exist at bottom, so only those must persist
    pis = [PiNode(n, a) for n in range(s + 1, s + 3) for a in strings_upto(D)
           if len(a) > s or g(a) is INF]
    for n in range(s + 3):
        for b in strings_upto(s):
            for tv in (Pair(n, b), AllN(b)):
                if tv_true(tv, bot):
                    assert all(tv_true(tv, p) for p in pis)


# interpretation ---------------------------------------------------------------------

def test_empty_term():
    for node in (Bottom(labeling(1), 1), TerminalC("0"), TrivialTop(), PiNode(2, "")):
        assert interpret_term(EMPTY, node) == frozenset()
    assert EMPTY.rank == 0


@given(hf)
def test_hat_is_node_independent(x):
    nodes = [Bottom(labeling(2), 1), TerminalC("01"), PiNode(2, "1"), TrivialTop()]
    for node in nodes:
        assert interpret_term(make_hat(x), node) == x
    assert interpret_term(make_hat(x, True), Bottom(labeling(2), 1)) == x
    assert make_hat(x).rank == hf_rank(x)


def test_hat_small_cases():
    assert make_hat(frozenset()) == EMPTY
    one = make_hat(frozenset({frozenset()}))
    assert [g for g, _ in one.entries] == [frozenset()]


def test_canonical_term_shapes():
    C = make_C(1)
    assert sorted(tuple(g) for g, _ in C.entries) == sorted(((Plus(b),) for b in ("", "0", "1")))
    for mk in (make_C, make_Cprime, make_capC, lambda d: make_Tn(2, d)):
        assert len(mk(D).entries) == len(strings_upto(D))


def test_cprime_at_terminal_node():
    for c in strings_upto(D):
        assert decoded(interpret_term(make_Cprime(D), TerminalC(c))) == set(strings_upto(D)) - {c}


@given(st.integers(0, 10 ** 6))
def test_capc_and_c_at_bottom(seed):
    g = labeling(seed, variant="B")
    ins = {a for a in strings_upto(D) if g(a) is IN}
    assert decoded(interpret_term(make_capC(D), Bottom(g, 1))) == ins
    assert decoded(interpret_term(make_C(D), Bottom(g, 1))) == ins
    assert decoded(interpret_term(make_Tn(1, D), Bottom(g, 1))) == set(strings_upto(D))
    assert decoded(interpret_term(make_Tn(5, D), Bottom(g, 1))) == set()


def test_tn_at_pi_node():
    for a in strings_upto(D):
        got = decoded(interpret_term(make_Tn(2, D), PiNode(2, a)))
        assert got == set(strings_upto(D)) - {a}
        assert decoded(interpret_term(make_Tn(3, D), PiNode(2, a))) == set(strings_upto(D))


@given(st.integers(0, 10 ** 6))
def test_sigma_B_picks_sequences_through_an_IN_node(seed):
    g = labeling(seed, variant="A")
    got = decoded(interpret_term(make_sigma_B(D), Bottom(g, 1)))
    through = {a for a in strings_upto(D) if any(g(a[:i]) is IN for i in range(len(a) + 1))}
    assert got == through


def test_qterm_guards_reject_inf():
    with pytest.raises(ValueError):
        QTerm(frozenset({(Condition("A", {"": INF}), QTerm())}))
    with pytest.raises(TypeError):
        Term(frozenset({(frozenset(), QTerm())}))


def test_qterm_guard_is_a_filter_test():
    g = FullLabeling.from_mapping("A", 1, {"": INF, "0": IN, "1": OUT})
    assert guard_true(Condition("A", {"": OUT, "0": IN}), Bottom(g, 1))
    assert not guard_true(Condition("A", {"": IN}), Bottom(g, 1))


# negative restriction -----------------------------------------------------------------

def test_neg_admits_clauses():
    b = "01"
    assert neg_admits(NegPrime(b), [Prime("1")])
    assert not neg_admits(NegPrime(b), [Prime(b)])
    assert not neg_admits(NegPrime(b), [Plus("0")])
    assert neg_admits(NegPrime(b), [Plus("1")])
    assert neg_admits(NegPrime(b), [NegPrime(b)])
    assert not neg_admits(NegPrime("00"), [NegPrime(b)])
    assert not neg_admits(NegPair(2, "0"), [Pair(2, "0")])
    assert neg_admits(NegPair(2, "0"), [Pair(3, "0")])
    assert not neg_admits(NegPair(2, "0"), [AllN("0")])
    with pytest.raises(FamilyError):
        neg_admits(NegPrime(""), [Pair(1, "")])


@given(seqs)
def test_restrict_neg_agrees_with_terminal_truth(c):
    # at the terminal node for c, a C-family guard holds iff the negative value for c admits it
    guards = [frozenset({tv}) for b in strings_upto(D) for tv in (Plus(b), Prime(b), NegPrime(b))]
    for g in guards:
        assert neg_admits(NegPrime(c), g) == guard_true(g, TerminalC(c))


@given(st.lists(st.tuples(st.sets(st.sampled_from([Plus(""), Prime("0"), NegPrime("0"), Prime("1")]),
                                  max_size=2), st.integers(0, 2)), max_size=4),
       st.lists(st.tuples(st.sets(st.sampled_from([Plus("1"), NegPrime("1")]), max_size=2),
                          st.integers(0, 2)), max_size=4))
def test_restrict_neg_commutes_with_union(e1, e2):
    mk = lambda es: Term(frozenset((frozenset(g), make_hat(numeral(k))) for g, k in es))
    t1, t2 = mk(e1), mk(e2)
    both = Term(t1.entries | t2.entries)
    for neg in (NegPrime("0"), NegPrime("1")):
        assert restrict_neg(both, neg) == restrict_neg(t1, neg) | restrict_neg(t2, neg)


# file format ----------------------------------------------------------------------------

def test_term_round_trip():
    for t in (EMPTY, make_C(1), make_Cprime(2), make_Tn(2, 1), make_capC(1), hat_seq("01"),
              Term(frozenset({(frozenset({NegPrime("0"), Prime("1")}), make_C(1))}))):
        assert parse_term(format_term(t)) == t
    assert format_term(make_C(0)) == "{<{+e},{}>}"
    with pytest.raises(ValueError):
        parse_term("{<{+2},{}>}")
