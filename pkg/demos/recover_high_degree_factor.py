"""Recover a degree-40 Darboux polynomial from its cofactor alone.

For this equation the integrating factor is 1/p0, where p0 is a product of
x and two polynomials of degree 13 and 14.  An undetermined-coefficient
search at that degree would be hopeless, but once the S-function is known
the cofactor of p0 follows from the divergence of a plane field, and p0 is
then the kernel of a linear system.

Run with ``python3 demos/recover_high_degree_factor.py``.
"""

from __future__ import annotations

import time

from sfdarboux import (
    assemble_R,
    build_triple,
    format_expression,
    integrate_closed_form,
    parse_expression,
    parse_ode2,
    recover_dp,
    verify_first_integral,
)
from sfdarboux.darboux import balance_at, trivial_exp_part

ODE = (
    "((z^12*x^14+z^9*x^14+z^3*x^14-3*y*z^6*x^7-y*z^3*x^7-x^7*y+2*y^2)*(z*x-7*y))"
    "/(3*z^2*x^8*(4*z^15*x^14+z^12*x^14+2*z^9*x^14+z^6*x^14-10*y*z^9*x^7-4*y*z^3*x^7+x^7*y+6*y^2*z^3-y^2))"
)


def main() -> None:
    ode = parse_ode2(ODE)
    T = build_triple(ode, parse_expression("-7*y/x"), 3)

    # no known factors and no exponential part: n0*q0 is minus the divergence
    bal = balance_at(T, [], trivial_exp_part(T), {})
    for label, fields in (("X2 only", (2,)), ("X1, X2, X3 stacked", (1, 2, 3))):
        t0 = time.perf_counter()
        p0, n0 = recover_dp(T, bal, fields=fields)
        dt = time.perf_counter() - t0
        print(f"{label}: degree {p0.degree()}, n0 = {n0}, {dt:.2f} s")
    print("p0 =", format_expression(p0))

    exp = trivial_exp_part(T)
    R = assemble_R(exp, [(p0, n0)], T)
    J = integrate_closed_form(R, T)
    print("\nR =", R)
    print("J =", J.additive())
    print("residual:", verify_first_integral(ode, J))


if __name__ == "__main__":
    main()
