from __future__ import annotations

from fractions import Fraction

import sympy as sp
from hypothesis import strategies as st

from sfdarboux.algebra import Poly, RatFn

SX, SY, SZ = sp.symbols("x y z")


def to_sympy(v):
    """Independent conversion used as the oracle side of comparisons."""
    if isinstance(v, RatFn):
        return to_sympy(v.num) / to_sympy(v.den)
    expr = sp.Integer(0)
    for (a, b, c), coef in v.terms.items():
        q = Fraction(coef)
        expr += sp.Rational(q.numerator, q.denominator) * SX**a * SY**b * SZ**c
    return expr


def from_sympy(expr) -> Poly:
    p = sp.Poly(sp.expand(expr), SX, SY, SZ)
    return Poly({m: Fraction(int(c.p), int(c.q)) for m, c in p.terms()})


monomials = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=6)


@st.composite
def polys(draw, max_terms=5, nonzero=False):
    terms = draw(st.dictionaries(monomials, coeffs, max_size=max_terms))
    p = Poly(terms)
    if nonzero and p.is_zero():
        p = Poly.const(draw(st.integers(1, 9)))
    return p


@st.composite
def int_polys(draw, max_terms=4, max_deg=2, nonconstant=False):
    mono = st.tuples(st.integers(0, max_deg), st.integers(0, max_deg), st.integers(0, max_deg))
    terms = draw(st.dictionaries(mono, st.integers(-9, 9), max_size=max_terms))
    p = Poly(terms)
    if nonconstant and (p.is_zero() or p.is_constant()):
        p = p + Poly.monomial((1, 0, 0))
    return p


# one summary line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
