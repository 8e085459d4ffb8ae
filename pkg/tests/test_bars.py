from itertools import product

import pytest
from hypothesis import given, strategies as st

from fanmodels.bars import (
    FiniteBarSet, c_set_from, close_under_extensions, format_bar_file, is_bar, is_extension_closed,
    is_weakly_uniform, parse_bar_file, pi01_set_from, prefixes, shortlex_index, strings_upto,
    uniform_witness,
)


def words(n):
    return ["".join(p) for p in product("01", repeat=n)]


def all_words(d):
    return [w for n in range(d + 1) for w in words(n)]


# independent oracles ---------------------------------------------------------

def bar_oracle(B, d):
    return all(any(a[:n] in B for n in range(d + 1)) for a in words(d))


def witness_oracle(B, d):
    for n in range(d + 1):
        if all(any(a[:m] in B for m in range(n + 1)) for a in words(n)):
            return n
    return None


def closure_oracle(B, d):
    return {u for u in all_words(d) if any(u[:k] in B for k in range(len(u) + 1))}


def c_set_oracle(Cp, d):
    return {u for u in all_words(d)
            if all(u + v in Cp for v in all_words(d - len(u)))}


def weak_oracle(B, d):
    for n in range(d + 1):
        hits = sum(1 for a in words(n) if any(a[:m] in B for m in range(n + 1)))
        if (n == 0 and hits == 1) or (n > 0 and hits >= 2 ** (n - 1)):
            return True
    return False


subsets = st.integers(min_value=0, max_value=6).flatmap(
    lambda d: st.tuples(st.just(d), st.sets(st.sampled_from(all_words(d)))))


# worked examples --------------------------------------------------------------

def test_is_bar_examples():
    assert is_bar({"0", "1"}, 3)
    assert not is_bar(set(), 1)
    assert not is_bar({"00", "01", "10"}, 2)


def test_uniform_witness_examples():
    assert uniform_witness({"0", "1"}, 3) == 1
    assert uniform_witness({""}, 3) == 0
    assert uniform_witness({"0", "10"}, 1) is None


def test_closure_examples():
    assert close_under_extensions({"0"}, 2).members == {"0", "00", "01"}
    closed = close_under_extensions({"1"}, 3)
    assert close_under_extensions(closed, 3) == closed


def test_c_set_examples():
    d = 2
    assert c_set_from(set(all_words(d)), d).members == set(all_words(d))
    assert c_set_from(set(all_words(2)) - {"11"}, 2).members == {"0", "00", "01", "10"}
    assert c_set_from(set(), 2).members == set()


def test_pi01_examples():
    d, nb = 4, 2
    full = {(u, n) for u in all_words(d) for n in range(nb + 1)}
    assert pi01_set_from(full, nb, d).members == set(all_words(d))
    assert pi01_set_from(set(), nb, d).members == set()
    lenient = pi01_set_from(lambda u, n: n < len(u), nb, d)
    assert lenient.members == {u for u in all_words(d) if len(u) >= 3}


def test_weakly_uniform_examples():
    assert is_weakly_uniform({"0"}, 1)
    assert not is_weakly_uniform(set(), 3)
    assert is_weakly_uniform({""}, 1)


def test_sequence_helpers():
    assert list(prefixes("01")) == ["", "0", "01"]
    assert [shortlex_index(u) for u in strings_upto(2)] == list(range(7))
    assert strings_upto(2) == ["", "0", "1", "00", "01", "10", "11"]


def test_bar_file_round_trip():
    text = "# a bar\ne\n01\n\n1\n"
    members = parse_bar_file(text)
    assert members == {"", "01", "1"}
    assert parse_bar_file(format_bar_file(members)) == members
    with pytest.raises(ValueError, match="line 1"):
        parse_bar_file("012\n")


def test_depth_is_enforced():
    with pytest.raises(ValueError):
        FiniteBarSet({"000"}, 2)


# oracle agreement on random sets ---------------------------------------------

@given(subsets)
def test_bar_and_witness_match_oracles(arg):
    d, B = arg
    assert is_bar(B, d) == bar_oracle(B, d)
    assert uniform_witness(B, d) == witness_oracle(B, d)


@given(subsets)
def test_closure_matches_oracle(arg):
    d, B = arg
    C = close_under_extensions(B, d)
    assert C.members == closure_oracle(B, d)
    assert is_extension_closed(C, d)
    assert close_under_extensions(C, d) == C


@given(subsets, st.data())
def test_closure_is_monotone(arg, data):
    d, B = arg
    A = data.draw(st.sets(st.sampled_from(sorted(B)))) if B else set()
    assert close_under_extensions(A, d).members <= close_under_extensions(B, d).members


@given(subsets)
def test_c_set_matches_oracle(arg):
    d, Cp = arg
    C = c_set_from(Cp, d)
    assert C.members == c_set_oracle(Cp, d)
    assert is_extension_closed(C, d)


@given(subsets)
def test_weakly_uniform_matches_oracle(arg):
    d, B = arg
    assert is_weakly_uniform(B, d) == weak_oracle(B, d)
    if uniform_witness(B, d) is not None:
        assert is_weakly_uniform(B, d)
