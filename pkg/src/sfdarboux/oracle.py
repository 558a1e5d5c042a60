"""Random 2ODEs with a known Liouvillian first integral, used as a test oracle.

Each instance is built from a first integral ``I = e^{A/B} prod f_j^{a_j}`` whose
ingredients are polynomials in two invariant combinations ``(u, w)`` of ``x, y, z``.
Depending on the shape, one of the S-functions is then a constant or a simple
monomial ratio, which keeps the S-function stage inside small degree bounds while
the resulting equations still have dense right-hand sides.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .algebra import ONE, Poly, RatFn, X, Y, Z, gcd_poly, squarefree_decomposition
from .frontend import Ode2
from .integrate import FirstIntegralForm, verify_first_integral

SHAPES = ("linear-xy", "linear-yz", "linear-xz", "product-xy", "homogeneous")


@dataclass(frozen=True)
class OracleBounds:
    max_factors: int = 3
    factor_degree: int = 2
    coeff: int = 3
    exp_probability: float = 0.25
    exp_degree: int = 2
    max_ode_degree: int = 12
    exponents: Tuple[Fraction, ...] = (
        Fraction(1), Fraction(-1), Fraction(2), Fraction(-2), Fraction(3), Fraction(1, 2), Fraction(-1, 3),
    )


@dataclass(frozen=True)
class OracleInstance:
    seed: int
    shape: str
    ode: Ode2
    truth: FirstIntegralForm


class OracleError(RuntimeError):
    pass


def _coords(shape: str, c: int) -> Tuple[Poly, Poly]:
    if shape == "linear-xy":
        return Y + X.scale(c), Z
    if shape == "linear-yz":
        return Y + Z.scale(c), X
    if shape == "linear-xz":
        return X + Z.scale(c), Y
    if shape == "product-xy":
        return X * Y, Z
    raise ValueError(shape)


def _rand_coeff(rng: random.Random, bound: int, nonzero: bool = False) -> int:
    while True:
        v = rng.randint(-bound, bound)
        if v or not nonzero:
            return v


def _poly_in(rng: random.Random, u: Poly, w: Poly, degree: int, bound: int) -> Poly:
    """Random polynomial in ``(u, w)`` whose total degree in ``x, y, z`` stays <= ``degree``."""
    out = Poly()
    for i in range(degree + 1):
        for j in range(degree - i + 1):
            term = u**i * w**j
            if term.degree() <= degree and rng.random() < 0.6:
                out = out + term.scale(_rand_coeff(rng, bound))
    return out


def _homogeneous_factor(rng: random.Random, bound: int) -> Poly:
    a = Poly.const(_rand_coeff(rng, bound)) + Z.scale(_rand_coeff(rng, bound))
    b = Poly.const(_rand_coeff(rng, bound)) + Z.scale(_rand_coeff(rng, bound))
    return a * X + b * Y


def _admissible(factors: Sequence[Poly]) -> bool:
    for f in factors:
        if f.is_zero() or f.is_constant():
            return False
        if len(squarefree_decomposition(f)) != 1 or squarefree_decomposition(f)[0][1] != 1:
            return False
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            if not gcd_poly(factors[i], factors[j]).is_constant():
                return False
    return True


def _ode_from(A: Poly, B: Poly, logs: Sequence[Tuple[Fraction, Poly]]) -> Optional[Ode2]:
    grad = []
    for v in range(3):
        g = RatFn(A, B).diff(v) if not A.is_zero() else RatFn(Poly())
        for a, f in logs:
            d = f.diff(v)
            if not d.is_zero():
                g = g + RatFn(d.scale(a), f)
        grad.append(g)
    if grad[2].is_zero():
        return None
    phi = -(grad[0] + RatFn(Z) * grad[1]) / grad[2]
    if _only_in_z(phi):
        # z' = g(z) has two independent elementary integrals, so the planted
        # one is not a well-defined answer to compare against
        return None
    return Ode2.from_ratfn(phi)


def _only_in_z(phi: RatFn) -> bool:
    return all(p.degree(0) <= 0 and p.degree(1) <= 0 for p in (phi.num, phi.den))


def _attempt(rng: random.Random, bounds: OracleBounds) -> Optional[Tuple[str, Ode2, FirstIntegralForm]]:
    shape = rng.choice(SHAPES)
    nf = rng.randint(1, bounds.max_factors)
    if shape == "homogeneous":
        factors = [_homogeneous_factor(rng, bounds.coeff) for _ in range(max(nf, 2))]
        exps = [rng.choice(bounds.exponents) for _ in factors[:-1]]
        exps.append(-sum(exps))  # total weight zero
        if exps[-1] == 0:
            return None
        if rng.random() < 0.5:
            # an extra weight-zero factor in z alone
            g = Z + Poly.const(_rand_coeff(rng, bounds.coeff, nonzero=True))
            factors.append(g)
            exps.append(rng.choice(bounds.exponents))
        A, B = Poly(), ONE
    else:
        u, w = _coords(shape, _rand_coeff(rng, bounds.coeff, nonzero=True))
        factors = [_poly_in(rng, u, w, bounds.factor_degree, bounds.coeff) for _ in range(nf)]
        exps = [rng.choice(bounds.exponents) for _ in factors]
        A, B = Poly(), ONE
        if rng.random() < bounds.exp_probability:
            A = _poly_in(rng, u, w, bounds.exp_degree, bounds.coeff)
            if rng.random() < 0.5:
                B = factors[0]
            if A.is_zero() or not gcd_poly(A, B).is_constant():
                A, B = Poly(), ONE
    if not _admissible(factors):
        return None
    logs = [(Fraction(a), f) for a, f in zip(exps, factors) if a]
    ode = _ode_from(A, B, logs)
    if ode is None:
        return None
    if max(ode.M0.degree(), ode.N0.degree()) > bounds.max_ode_degree:
        return None
    J = FirstIntegralForm(RatFn(A, B) if not A.is_zero() else RatFn(Poly()), tuple(logs))
    if not verify_first_integral(ode, J).is_zero:
        raise OracleError("constructed first integral does not annihilate the field")
    return shape, ode, J


def generate_random_integrable(seed: int, bounds: Optional[OracleBounds] = None) -> OracleInstance:
    """Deterministic oracle instance for ``seed``; ``truth`` is the first integral used to build it."""
    bounds = bounds or OracleBounds()
    for attempt in range(200):
        rng = random.Random(seed * 7919 + attempt)
        got = _attempt(rng, bounds)
        if got is not None:
            shape, ode, J = got
            return OracleInstance(seed, shape, ode, J)
    raise OracleError(f"no admissible instance for seed {seed}")


def oracle_instances(seeds: Sequence[int], bounds: Optional[OracleBounds] = None) -> List[OracleInstance]:
    return [generate_random_integrable(s, bounds) for s in seeds]
