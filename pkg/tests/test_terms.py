from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from planegeo.terms import (CdlSyntaxError, Entity, Number, Predicate, Variable,
                            parse_pattern_term, parse_term, render_term)


def test_entity_tokens_split_into_points():
    t = parse_term("LengthOfLine(AD)")
    assert t == Predicate("LengthOfLine", (Entity(("A", "D")),))


def test_nested_calls_and_numbers():
    t = parse_term("Equal(LengthOfLine(AD),8)")
    assert t == Predicate("Equal", (
        Predicate("LengthOfLine", (Entity(("A", "D")),)),
        Number(Fraction(8)),
    ))


def test_rational_literals_are_exact():
    assert parse_term("3/2") == Number(Fraction(3, 2))
    assert parse_term("0.5") == parse_term("1/2")


def test_lowercase_single_letter_is_variable():
    t = parse_term("Midpoint(m,AB)")
    assert t.args[0] == Variable("m")


def test_pattern_mode_lowercase_runs_are_point_entities():
    t = parse_pattern_term("Polygon(abc)")
    assert t == Predicate("Polygon", (Entity(("a", "b", "c")),))


@pytest.mark.parametrize("bad", [
    "Equal(LengthOfLine(AD),8",  # unbalanced
    "Equal(,8)",  # empty argument
    "Equal(A,8) trailing",  # trailing input
    "equal(A,8)(",  # junk after call
    "",
])
def test_syntax_errors(bad):
    with pytest.raises(CdlSyntaxError):
        parse_term(bad)


def test_render_round_trip_examples():
    for text in ["Equal(LengthOfLine(AD),8)", "Value(MeasureOfAngle(CAB))",
                 "Equal(Add(MeasureOfAngle(ABC),MeasureOfAngle(BCA)),180)",
                 "Equal(LengthOfLine(AB),3/2)"]:
        assert render_term(parse_term(text)) == text


# -- property: render/parse round trip over random ASTs -------------------------

heads = st.sampled_from(["Equal", "Add", "Mul", "LengthOfLine", "Value", "Goal"])
points = st.text(alphabet="ABCDEFG", min_size=1, max_size=4)


def _terms(depth):
    leaf = st.one_of(
        points.map(lambda s: Entity(tuple(s))),
        st.fractions(min_value=0, max_value=100).map(Number),
        st.sampled_from("xyz").map(Variable),
    )
    if depth == 0:
        return leaf
    return st.one_of(
        leaf,
        st.tuples(heads, st.lists(_terms(depth - 1), min_size=1, max_size=3))
        .map(lambda t: Predicate(t[0], tuple(t[1]))),
    )


@given(_terms(3))
def test_round_trip_random_ast(term):
    assert parse_term(render_term(term)) == term
