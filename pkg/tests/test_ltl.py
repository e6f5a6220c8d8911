import random

import pytest
from hypothesis import given, strategies as st

from domsynth import ltl
from domsynth.ltl import (LTLSyntaxError, PrioritizedSpec, UnknownAtomError, achieved_on,
                          evaluate_on_lasso, is_nnf, negate_nnf, parse_ltl, partial_conjunction,
                          to_nnf, to_string)
from domsynth.words import Lasso

from oracles import holds, random_formula, random_lasso

LETTERS = [frozenset(), frozenset("a"), frozenset("b"), frozenset("ab")]


@st.composite
def formulas(draw, depth=3):
    seed = draw(st.integers(0, 10 ** 9))
    return random_formula(random.Random(seed), ["a", "b"], depth)


@st.composite
def lassos(draw):
    seed = draw(st.integers(0, 10 ** 9))
    return random_lasso(random.Random(seed), LETTERS, 3, 3)


@pytest.mark.parametrize("text,expected", [
    ("a & b | c", "(a & b) | c"),
    ("a | b & c", "a | (b & c)"),
    ("a -> b -> c", "a -> (b -> c)"),
    ("a <-> b -> c", "a <-> (b -> c)"),
    ("a U b U c", "a U (b U c)"),
    ("!a U b", "(!a) U b"),
    ("X a & b", "(X a) & b"),
    ("G F a", "G (F a)"),
    ("a U b & c", "(a U b) & c"),
    ("a R b | c", "(a R b) | c"),
])
def test_precedence(text, expected):
    assert parse_ltl(text) == parse_ltl(expected)


def test_constants_and_keywords():
    assert parse_ltl("true") == ltl.TRUE
    assert parse_ltl("false") == ltl.FALSE
    assert parse_ltl("X true").op == "next"
    assert parse_ltl("Xa") == ltl.Atom("Xa")


@pytest.mark.parametrize("text,col", [("a &", 4), ("(a | b", 7), ("a b", 3), ("", 1), ("a $ b", 3)])
def test_syntax_errors_carry_column(text, col):
    with pytest.raises(LTLSyntaxError) as e:
        parse_ltl(text)
    assert e.value.column == col


def test_unknown_atom_named():
    with pytest.raises(UnknownAtomError) as e:
        parse_ltl("a & zz", universe={"a"})
    assert e.value.atom == "zz" and e.value.column == 5


@given(formulas())
def test_print_parse_round_trip(f):
    assert parse_ltl(to_string(f)) == f


@given(formulas(), lassos())
def test_evaluation_matches_semantics(f, w):
    assert evaluate_on_lasso(f, w) == holds(f, w)


@given(formulas(), lassos())
def test_nnf_preserves_meaning(f, w):
    n = to_nnf(f)
    assert is_nnf(n)
    assert holds(n, w) == holds(f, w)
    assert holds(negate_nnf(f), w) == (not holds(f, w))


def test_known_values():
    w = Lasso.parse("{a};{b}{}")
    assert evaluate_on_lasso(parse_ltl("a & X b"), w)
    assert evaluate_on_lasso(parse_ltl("G F b"), w)
    assert not evaluate_on_lasso(parse_ltl("F G b"), w)
    assert evaluate_on_lasso(parse_ltl("a U b"), w)
    assert not evaluate_on_lasso(parse_ltl("G a"), w)
    assert evaluate_on_lasso(parse_ltl("false R !a | X X !b"), Lasso.parse(";{b}"))


def test_partial_conjunctions():
    spec = PrioritizedSpec.parse(["a", "F b", "G a"])
    assert partial_conjunction(spec, 0) == ltl.TRUE
    assert partial_conjunction(spec, 1) == parse_ltl("a")
    assert partial_conjunction(spec, 2) == parse_ltl("a & F b")
    with pytest.raises(ValueError):
        partial_conjunction(spec, 4)
    with pytest.raises(ValueError):
        partial_conjunction(spec, -1)


def test_achieved_priority_is_longest_prefix():
    spec = PrioritizedSpec.parse(["F a", "G b", "a"])
    assert achieved_on(spec, Lasso.parse(";{b}")) == 0
    assert achieved_on(spec, Lasso.parse("{b};{a,b}")) == 2
    assert achieved_on(spec, Lasso.parse(";{a,b}")) == 3
    # a later objective alone does not count
    assert achieved_on(spec, Lasso.parse("{a};{}")) == 1


def test_depth_and_atoms():
    f = parse_ltl("G (a -> X F b)")
    assert f.atoms() == {"a", "b"}
    assert f.depth() == 4
