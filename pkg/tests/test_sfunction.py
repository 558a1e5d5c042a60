from __future__ import annotations

import random

import pytest
import sympy as sp

from sfdarboux.algebra import ONE, Poly, RatFn, Y, Z
from sfdarboux.frontend import parse_expression, parse_ode2
from sfdarboux.oracle import generate_random_integrable
from sfdarboux.sfunction import (
    associated_field,
    build_triple,
    dx_total,
    find_sfunction,
    spde_residual,
)

from conftest import SX, SY, SZ, from_sympy, to_sympy
from fixtures import I1, I2, ode1, ode2, sympy_form


def _s_from_integral(I):
    Ix, Iy, Iz = (sp.diff(I, v) for v in (SX, SY, SZ))
    return {1: sp.cancel(Iy / Iz), 2: sp.cancel(Ix / Iz), 3: sp.cancel(Ix / Iy)}


def _ratfn(expr) -> RatFn:
    n, d = sp.fraction(sp.cancel(sp.together(expr)))
    return RatFn(from_sympy(n), from_sympy(d))


@pytest.mark.parametrize("ode, I", [(ode1, I1), (ode2, I2)])
def test_s_functions_of_published_integrals_solve_s_equations(ode, I):
    # [DERIVED] S-functions computed by sympy from the first integral
    for k, S in _s_from_integral(I).items():
        assert spde_residual(ode, _ratfn(S), k).is_zero()


def test_published_s3_values():
    assert spde_residual(ode1, parse_expression("-2*y/x"), 3).is_zero()
    assert spde_residual(ode2, parse_expression("-7*y/x"), 3).is_zero()


@pytest.mark.parametrize("seed", [1, 5, 9, 13])
def test_oracle_truth_s_functions(seed):
    inst = generate_random_integrable(seed)
    S = _s_from_integral(sympy_form(inst.truth))
    for k in (1, 2, 3):
        assert spde_residual(inst.ode, _ratfn(S[k]), k).is_zero()


def test_perturbed_candidates_have_nonzero_residual():
    rng = random.Random(3)
    for ode, S3 in ((ode1, "-2*y/x"), (ode2, "-7*y/x")):
        base = RatFn.coerce(parse_expression(S3))
        for _ in range(5):
            eps = RatFn(Poly.monomial((rng.randint(0, 2), rng.randint(0, 2), rng.randint(0, 2)), rng.choice([-2, -1, 1, 3])))
            assert not spde_residual(ode, base + eps, 3).is_zero()


def test_find_sfunction_recovers_published_values():
    got = find_sfunction(ode1, 3, (1, 1))
    assert RatFn.coerce(parse_expression("-2*y/x")) in got
    got = find_sfunction(ode2, 3, (1, 1))
    assert RatFn.coerce(parse_expression("-7*y/x")) in got


def test_total_derivative_and_field():
    ode = parse_ode2("-y")
    X_ = associated_field(ode)
    assert (X_.cx, X_.cy, X_.cz) == (ONE, Z, -Y)
    # y^2 + z^2 is conserved
    assert dx_total(ode, RatFn(Y * Y + Z * Z)).is_zero()


@pytest.mark.parametrize("ode, S3, I", [(ode1, "-2*y/x", I1), (ode2, "-7*y/x", I2)])
def test_triple_is_proportional_to_gradient(ode, S3, I):
    T = build_triple(ode, parse_expression(S3), 3)
    grad = [sp.diff(I, v) for v in (SX, SY, SZ)]
    Q, P, N = (to_sympy(c) for c in T.as_tuple())
    assert sp.simplify(Q * grad[1] - P * grad[0]) == 0
    assert sp.simplify(P * grad[2] - N * grad[1]) == 0
    # X1, X2, X3 annihilate I
    for fld in (T.X1, T.X2, T.X3):
        expr = sum(to_sympy(c) * g for c, g in zip(fld.coefficients, grad))
        assert sp.simplify(expr / I) == 0


def test_triple_satisfies_linear_relation():
    T = build_triple(ode1, parse_expression("-2*y/x"), 3)
    lhs = ode1.N0 * T.Q + Z * ode1.N0 * T.P + ode1.M0 * T.N
    assert lhs.is_zero()
