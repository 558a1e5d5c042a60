from __future__ import annotations

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from sfdarboux.algebra import ONE, Poly, RatFn, X, Y, Z
from sfdarboux.frontend import DegenerateOde, ParseError, format_expression, parse_expression, parse_ode2

from conftest import polys, to_sympy


@pytest.mark.parametrize(
    "text, expected",
    [
        ("x + 1", X + ONE),
        ("-x^2", -(X * X)),
        ("2*x*y - 3/4*z", X * Y.scale(2) - Z.scale(Fraction(3, 4))),
        ("(x+y)^2", X * X + (X * Y).scale(2) + Y * Y),
        ("x/y*z", RatFn(X * Z, Y)),
        ("  ( x )  ", X),
    ],
)
def test_parse_examples(text, expected):
    assert parse_expression(text) == expected


@pytest.mark.parametrize("bad", ["x^(-1)", "2x", "x y", "x^y", "x^1.5", "(x", "x +", "w", "", "x)"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_expression(bad)


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_expression("x + * y")
    assert info.value.position == 4


def test_parse_ode_and_degenerate():
    ode = parse_ode2("-y")
    assert ode.M0 == -Y and ode.N0 == ONE
    with pytest.raises(DegenerateOde):
        parse_ode2("x/(y-y)")


def test_format_is_canonical():
    assert format_expression(X * X - Y.scale(2) + ONE) == "x^2 - 2*y + 1"
    assert format_expression(RatFn(ONE, X**5)) == "1/x^5"
    assert format_expression(RatFn(Y, X + Y)) == "y/(x + y)"


@settings(max_examples=300, deadline=None)
@given(polys(max_terms=6))
def test_poly_roundtrip(p):
    text = format_expression(p)
    assert parse_expression(text) == p
    assert format_expression(parse_expression(text)) == text


@settings(max_examples=200, deadline=None)
@given(polys(max_terms=4), polys(max_terms=3, nonzero=True))
def test_ratfn_roundtrip_and_sympy_value(a, b):
    r = RatFn(a, b)
    text = format_expression(r)
    back = parse_expression(text)
    assert RatFn.coerce(back) == r
    assert sp.cancel(to_sympy(RatFn.coerce(back)) - to_sympy(a) / to_sympy(b)) == 0


_tokens = st.sampled_from(["x", "y", "z", "1", "23", "+", "-", "*", "/", "^", "(", ")", " ", "2", "0"])


@settings(max_examples=400, deadline=None)
@given(st.lists(_tokens, max_size=14))
def test_fuzzed_token_streams_parse_or_raise(tokens):
    text = "".join(tokens)
    try:
        v = parse_expression(text)
    except (ParseError, ArithmeticError):
        return
    assert isinstance(v, (Poly, RatFn))
