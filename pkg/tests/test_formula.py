import pytest
from hypothesis import given, strategies as st

from fanmodels.formula import (
    And, CaptureError, Equal, Exists, Falsum, Forall, FormulaSyntaxError, Implies, Member, Or, Ref,
    UnboundVariableError, Var, depth, format_formula, free_vars, neg, parse_formula, substitute,
)

x, y, B = Var("x"), Var("y"), Ref("B")


def test_excluded_middle_shape():
    f = parse_formula(r"x in B \/ ~(x in B)", free=["x"], names=["B"])
    assert f == Or(Member(x, B), Implies(Member(x, B), Falsum()))


def test_forall_identity():
    assert parse_formula("forall x. x = x") == Forall("x", Equal(x, x))


def test_syntax_error_offset():
    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula("(x in", free=["x"])
    assert err.value.offset == 5


def test_unbound_variable():
    with pytest.raises(UnboundVariableError) as err:
        parse_formula("x in B", names=["B"])
    assert err.value.name == "x"


@pytest.mark.parametrize("text,expected", [
    (r"~a in b /\ a = b", And(neg(Member(Ref("a"), Ref("b"))), Equal(Ref("a"), Ref("b")))),
    (r"a in b -> b in a -> bot",
     Implies(Member(Ref("a"), Ref("b")), Implies(Member(Ref("b"), Ref("a")), Falsum()))),
    (r"a in b \/ b in a /\ bot",
     Or(Member(Ref("a"), Ref("b")), And(Member(Ref("b"), Ref("a")), Falsum()))),
    ("exists x. x in a -> bot", Exists("x", Implies(Member(Var("x"), Ref("a")), Falsum()))),
    ("~~bot  # comment", neg(neg(Falsum()))),
])
def test_precedence(text, expected):
    assert parse_formula(text, names=["a", "b"]) == expected


def test_variables_shadow_names():
    f = parse_formula("forall B. B in B", names=["B"])
    assert f == Forall("B", Member(Var("B"), Var("B")))


def test_free_vars_examples():
    assert free_vars(Forall("x", Equal(x, x))) == frozenset()
    assert free_vars(Member(x, B)) == {"x"}
    assert free_vars(And(Member(x, y), Exists("y", Member(x, y)))) == {"x", "y"}


def test_substitute_examples():
    c = Ref("c")
    assert substitute(Member(x, B), "x", c) == Member(c, B)
    f = Forall("x", Member(x, B))
    assert substitute(f, "x", c) == f
    with pytest.raises(CaptureError) as err:
        substitute(Exists("y", Member(x, y)), "x", y)
    assert err.value.binder == "y"


def test_depth_counts_atoms_as_one():
    assert depth(Falsum()) == 1
    assert depth(parse_formula(r"forall x. x in a /\ bot", names=["a"])) == 3


# ---------------------------------------------------------------- round trip

def _asts(max_depth):
    """Every AST of depth <= max_depth over three atoms."""
    layers = [[Falsum(), Member(x, B), Equal(y, x)]]
    for _ in range(max_depth - 1):
        below = [f for layer in layers for f in layer]
        top = layers[-1]
        new = [k(f, g) for k in (And, Or, Implies) for f in below for g in below
               if f in top or g in top]
        new += [q(v, f) for q in (Exists, Forall) for v in ("x", "y") for f in top]
        layers.append(new)
    return [f for layer in layers for f in layer]


def test_round_trip_enumerated_depth_3():
    asts = _asts(3)
    assert len(asts) == 3 + 39 + 3 * (42 ** 2 - 3 ** 2) + 4 * 39
    for f in asts:
        assert parse_formula(format_formula(f), free=["x", "y"], names=["B"]) == f


_atoms = st.sampled_from([Falsum(), Member(x, B), Equal(y, x), Member(B, y), Equal(B, B)])


def _extend(children):
    return st.one_of(
        st.builds(And, children, children), st.builds(Or, children, children),
        st.builds(Implies, children, children),
        st.builds(Exists, st.sampled_from(["x", "y"]), children),
        st.builds(Forall, st.sampled_from(["x", "y"]), children),
    )


formulas = st.recursive(_atoms, _extend, max_leaves=16)


@given(formulas)
def test_round_trip_random(f):
    assert parse_formula(format_formula(f), free=["x", "y"], names=["B"]) == f


@given(formulas)
def test_substitute_identity(f):
    assert substitute(f, "x", x) == f


@given(formulas, st.sampled_from([Ref("B"), Ref("c")]))
def test_free_vars_after_substitution(f, t):
    if "x" in free_vars(f):
        assert free_vars(substitute(f, "x", t)) == free_vars(f) - {"x"}
