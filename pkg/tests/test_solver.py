from __future__ import annotations

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from sfdarboux.solver import (
    BudgetExceeded,
    Inconsistent,
    LinearSystem,
    PolySystem,
    nullspace,
    qpoly_from_linear_products,
    rank_mod_p,
    rational_roots,
    solve_linear,
    solve_quadratic_bounded,
)

small = st.integers(-5, 5)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.data())
def test_solve_linear_matches_sympy(n_eq, n_unk, data):
    A = [[data.draw(small) for _ in range(n_unk)] for _ in range(n_eq)]
    b = [data.draw(small) for _ in range(n_eq)]
    names = [f"u{k}" for k in range(n_unk)]
    sysm = LinearSystem(names, [({names[j]: A[i][j] for j in range(n_unk) if A[i][j]}, b[i]) for i in range(n_eq)])
    M = sp.Matrix(A)
    aug = M.row_join(sp.Matrix(b))
    consistent = M.rank() == aug.rank()
    if not consistent:
        with pytest.raises(Inconsistent):
            solve_linear(sysm)
        return
    sol = solve_linear(sysm)
    assert sol.dimension == n_unk - M.rank()
    pt = sol.point([data.draw(small) for _ in range(sol.dimension)])
    for i in range(n_eq):
        # convention: sum coeff*u + const = 0
        assert sum(A[i][j] * Fraction(pt[names[j]]) for j in range(n_unk)) + b[i] == 0


def test_nullspace_and_rank():
    names = ["a", "b", "c"]
    sysm = LinearSystem(names, [({"a": 1, "b": 1}, 0), ({"b": 1, "c": -1}, 0)])
    basis = nullspace(sysm)
    assert len(basis) == 1
    v = basis[0]
    assert v.get("a", 0) + v.get("b", 0) == 0 and v.get("b", 0) == v.get("c", 0)
    assert rank_mod_p([{0: 1, 1: 2}, {0: 2, 1: 4}]) == 1


@given(st.lists(st.fractions(min_value=-6, max_value=6, max_denominator=4), min_size=1, max_size=4))
def test_rational_roots_of_products(roots):
    t = sp.Symbol("t")
    expr = sp.expand(sp.prod([t - sp.Rational(r.numerator, r.denominator) for r in roots]) * 3)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(sp.Poly(expr, t).all_coeffs())]
    assert rational_roots(coeffs) == sorted(set(roots))


def test_quadratic_system_points_satisfy_equations():
    # (a - 1)(a + 2) = 0, b - a = 0
    eqs = [
        qpoly_from_linear_products([(1, ["a", "a"]), (1, ["a"]), (-2, [])]),
        qpoly_from_linear_products([(1, ["b"]), (-1, ["a"])]),
    ]
    pts = solve_quadratic_bounded(PolySystem(["a", "b"], eqs))
    got = sorted((p["a"], p["b"]) for p in pts)
    assert got == [(-2, -2), (1, 1)]


def test_quadratic_budget_is_reported():
    eqs = [qpoly_from_linear_products([(1, ["a", "b"]), (-1, ["c", "d"])])]
    try:
        solve_quadratic_bounded(PolySystem(["a", "b", "c", "d"], eqs), max_branches=1, max_depth=1)
    except BudgetExceeded as exc:
        assert isinstance(exc.partial, list)
