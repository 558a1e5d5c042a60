"""Step through the method on a rational 2ODE with an exponential first integral.

Each stage is called directly so the intermediate objects can be printed:
the S-function, the triple (Q, P, N), the known Darboux polynomial, the
cofactor balance, the recovered high-degree factor, the integrating factor
and the certified first integral.

Run with ``python3 demos/walkthrough_example_one.py``.
"""

from __future__ import annotations

from sfdarboux import (
    build_triple,
    find_dps,
    find_sfunction,
    format_expression,
    parse_ode2,
    run_pipeline,
    triple_fields,
)

ODE = (
    "-((z^3*x^6-2*y*z^3*x^4-2*y*z*x^4+x^2*y^2+2*y^3)*(z*x-2*y))"
    "/(x^5*(3*z^5*x^4+2*z^3*x^4-3*z^2*y*x^2-3*y^2*z^2+y^2))"
)


def main() -> None:
    ode = parse_ode2(ODE)
    print("z' =", format_expression(ode.phi))

    candidates = find_sfunction(ode, 3, (1, 1))
    S3 = candidates[0]
    print("\nS3 =", format_expression(S3))

    T = build_triple(ode, S3, 3)
    print("Q =", format_expression(T.Q))
    print("P =", format_expression(T.P))
    print("N =", format_expression(T.N))

    fields = triple_fields(T)
    print("\nlow-degree Darboux polynomials of X3 (degree <= 1):")
    for pair in find_dps(fields[3], 1, field_index=3):
        print("  ", format_expression(pair.p), " cofactor", format_expression(pair.cofactors[3]))

    # the full pipeline does the balancing and recovery; print what it found
    rep = run_pipeline(ode)
    print("\nstatus:", rep.status)
    for d in rep.darboux:
        print("  DP", d["p"], "exponent", d["exponent"])
    print("p0 =", rep.p0, " n0 =", rep.n0)
    print("R  =", rep.integrating_factor)
    print("J  =", rep.first_integral["additive"])
    print("I  =", rep.first_integral["exponential"])
    print("residual of X(I):", rep.residual)


if __name__ == "__main__":
    main()
