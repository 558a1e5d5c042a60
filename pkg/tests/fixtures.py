"""Shared equations for the tests."""

from __future__ import annotations

import sympy as sp

from sfdarboux.frontend import parse_ode2

from conftest import SX, SY, SZ

EX1 = "-((z^3*x^6-2*y*z^3*x^4-2*y*z*x^4+x^2*y^2+2*y^3)*(z*x-2*y))/(x^5*(3*z^5*x^4+2*z^3*x^4-3*z^2*y*x^2-3*y^2*z^2+y^2))"
EX2 = (
    "((z^12*x^14+z^9*x^14+z^3*x^14-3*y*z^6*x^7-y*z^3*x^7-x^7*y+2*y^2)*(z*x-7*y))"
    "/(3*z^2*x^8*(4*z^15*x^14+z^12*x^14+2*z^9*x^14+z^6*x^14-10*y*z^9*x^7-4*y*z^3*x^7+x^7*y+6*y^2*z^3-y^2))"
)
# published first integrals of the two examples, as sympy expressions
I1 = -sp.exp((SX**2 * SZ - SY) * SX**2 / (SX**4 * SZ**3 - SY**2)) * SX**4 / (SX**4 * SZ**3 - SY**2)
I2 = (
    sp.exp((SZ**3 * SX**7 - SY) / (SX**7 * SZ**6 - SY)) * SX**14
    / ((SX**7 * SZ**6 - SY) * (SX**7 * SZ**6 + SX**7 - SY))
)

ode1 = parse_ode2(EX1)
ode2 = parse_ode2(EX2)


def sympy_form(J):
    """sympy expression of a FirstIntegralForm (log form)."""
    from conftest import to_sympy

    expr = to_sympy(J.rational_part)
    for c, p in J.log_terms:
        expr += sp.Rational(c.numerator, c.denominator) * sp.log(to_sympy(p))
    if J.exp_term is not None:
        W, C = J.exp_term
        expr += to_sympy(C) * sp.exp(to_sympy(W))
    return expr


def annihilates(ode, I) -> bool:
    """Independent check: d/dx I along solutions of z' = phi vanishes."""
    from conftest import to_sympy

    phi = to_sympy(ode.phi)
    D = sp.diff(I, SX) + SZ * sp.diff(I, SY) + phi * sp.diff(I, SZ)
    return sp.simplify(D / I) == 0 if I.has(sp.exp) else sp.simplify(D) == 0
