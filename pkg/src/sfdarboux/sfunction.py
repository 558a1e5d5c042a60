"""Associated vector field, S-function equations, rational S-function search and the (Q, P, N) triple."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Tuple

from .algebra import ONE, Poly, RatFn, Z, exact_div, gcd_list, grlex_key, lcm_poly
from .frontend import Ode2, _is_var_power, format_expression
from .solver import BudgetExceeded, PolySystem, solve_quadratic_bounded


class DegenerateEquation(ValueError):
    pass


class DegenerateTriple(ValueError):
    pass


@dataclass(frozen=True)
class VField:
    """Polynomial vector field ``cx*d/dx + cy*d/dy + cz*d/dz``."""

    cx: Poly
    cy: Poly
    cz: Poly

    def __post_init__(self):
        if self.cx.is_zero() and self.cy.is_zero() and self.cz.is_zero():
            raise ValueError("vector field with all coefficients zero")

    @property
    def coefficients(self) -> Tuple[Poly, Poly, Poly]:
        return (self.cx, self.cy, self.cz)

    def __call__(self, p: Poly) -> Poly:
        out = Poly()
        for i, c in enumerate(self.coefficients):
            if not c.is_zero():
                d = p.diff(i)
                if not d.is_zero():
                    out = out + c * d
        return out

    def apply_ratfn(self, f: RatFn) -> RatFn:
        f = RatFn.coerce(f)
        if f.den == ONE:
            return RatFn.coerce(self(f.num))
        return RatFn(f.den * self(f.num) - f.num * self(f.den), f.den * f.den)

    def divergence(self) -> Poly:
        return self.cx.diff(0) + self.cy.diff(1) + self.cz.diff(2)

    def max_degree(self) -> int:
        return max(c.degree() for c in self.coefficients)

    def parameter(self) -> Optional[int]:
        """Index of the variable the field does not differentiate along, if any."""
        zeros = [i for i, c in enumerate(self.coefficients) if c.is_zero()]
        return zeros[0] if len(zeros) == 1 else None


def associated_field(ode: Ode2) -> VField:
    return VField(ode.N0, Z * ode.N0, ode.M0)


def dx_total(ode: Ode2, f) -> RatFn:
    """Total derivative ``d/dx = d_x + z d_y + phi d_z`` along solutions."""
    f = RatFn.coerce(f)
    xf = associated_field(ode).apply_ratfn(f)
    return xf / RatFn(ode.N0)


def _riccati_coefficients(ode: Ode2, k: int) -> Tuple[RatFn, RatFn, RatFn]:
    """``(a, b, c)`` with the k-th S-equation written as ``D_x S = a S^2 + b S + c``."""
    phi = ode.phi
    px, py, pz = phi.diff(0), phi.diff(1), phi.diff(2)
    z = RatFn(Z)
    if k == 1:
        return RatFn(ONE), pz, -py
    if k == 2:
        inv_z = RatFn(ONE, Z)
        return -inv_z, pz - phi * inv_z, -px
    if k == 3:
        if phi.is_zero():
            raise DegenerateEquation("the third S-equation divides by phi, which is identically zero")
        return -(py / phi), (px - z * py) / phi, z * px / phi
    raise ValueError("k must be 1, 2 or 3")


def spde_residual(ode: Ode2, S, k: int) -> RatFn:
    """Left minus right side of the k-th S-equation evaluated at ``S``."""
    S = RatFn.coerce(S)
    a, b, c = _riccati_coefficients(ode, k)
    return dx_total(ode, S) - (a * S * S + b * S + c)


def _monomials(max_degree: int) -> List[tuple]:
    out = []
    for d in range(max_degree + 1):
        for i in range(d + 1):
            for j in range(d - i + 1):
                out.append((i, j, d - i - j))
    return sorted(out, key=grlex_key, reverse=True)


def _residual_polynomial_form(ode: Ode2, k: int):
    """Polynomials ``(W, A, B, C)``: the k-th residual for ``S = u/v`` has numerator
    ``W*(v X(u) - u X(v)) - A u^2 - B u v - C v^2``."""
    a, b, c = _riccati_coefficients(ode, k)
    L = ode.N0
    for r in (a, b, c):
        L = lcm_poly(L, r.den)
    w = exact_div(L, ode.N0)
    return w, exact_div(L, a.den) * a.num, exact_div(L, b.den) * b.num, exact_div(L, c.den) * c.num


def find_sfunction(
    ode: Ode2,
    k: int,
    bounds: Tuple[int, int] = (1, 1),
    max_branches: int = 64,
    max_depth: int = 12,
    deadline: Optional[float] = None,
) -> List[RatFn]:
    """All rational solutions ``S = u/v`` of the k-th S-equation with deg u <= bounds[0], deg v <= bounds[1].

    The determining system is quadratic in the coefficients of ``u`` and ``v``;
    it is normalized by fixing the leading coefficient of ``v``.
    """
    field = associated_field(ode)
    w, A, B, C = _residual_polynomial_form(ode, k)
    mu = _monomials(bounds[0])
    mv = _monomials(bounds[1])
    us = [("u", m) for m in mu]
    vs = [("v", m) for m in mv]
    xu = {m: field(Poly.monomial(m)) for m in set(mu) | set(mv)}
    eqs: Dict[tuple, Dict[tuple, object]] = {}

    def add(poly: Poly, s1, s2, scale=1):
        key = ((s1, 2),) if s1 == s2 else tuple(sorted(((s1, 1), (s2, 1)), key=repr))
        for mono, c in poly.terms.items():
            tgt = eqs.setdefault(mono, {})
            v = tgt.get(key, 0) + scale * c
            if v:
                tgt[key] = v
            else:
                tgt.pop(key, None)

    for i, ma in enumerate(mu):
        for mb in mv:
            # W * (m_b X(m_a) - m_a X(m_b)) for the product u_a v_b
            t = w * (xu[ma].mul_monomial(mb) - xu[mb].mul_monomial(ma))
            if not B.is_zero():
                t = t - B.mul_monomial(tuple(p + q for p, q in zip(ma, mb)))
            add(t, ("u", ma), ("v", mb))
    if not A.is_zero():
        for ma, mb in combinations_with_replacement(mu, 2):
            f = 1 if ma == mb else 2
            add(A.mul_monomial(tuple(p + q for p, q in zip(ma, mb))), ("u", ma), ("u", mb), -f)
    if not C.is_zero():
        for ma, mb in combinations_with_replacement(mv, 2):
            f = 1 if ma == mb else 2
            add(C.mul_monomial(tuple(p + q for p, q in zip(ma, mb))), ("v", ma), ("v", mb), -f)
    system = PolySystem(us + vs, [e for e in eqs.values() if e], projective_blocks=[vs])
    try:
        points = solve_quadratic_bounded(system, max_branches=max_branches, max_depth=max_depth, deadline=deadline)
        partial = False
    except BudgetExceeded as exc:
        points = exc.partial
        partial = True
    found = {}
    for pt in points:
        u = Poly({m: pt[("u", m)] for m in mu})
        v = Poly({m: pt[("v", m)] for m in mv})
        if v.is_zero():
            continue
        S = RatFn(u, v)
        if spde_residual(ode, S, k).is_zero():
            found[S] = True
    result = sorted(found, key=_sfunction_order)
    if partial and not result:
        raise BudgetExceeded("S-function search caps reached", [])
    return result


def _sfunction_order(S: RatFn):
    dn, dd = max(S.num.degree(), 0), S.den.degree()
    return (max(dn, dd), dn + dd, format_expression(S))


@dataclass(frozen=True)
class STriple:
    """Coprime ``(Q, P, N)`` proportional to the gradient of a first integral."""

    Q: Poly
    P: Poly
    N: Poly

    @property
    def s1(self) -> RatFn:
        return RatFn(self.P, self.N)

    @property
    def s2(self) -> RatFn:
        return RatFn(self.Q, self.N)

    @property
    def s3(self) -> Optional[RatFn]:
        return RatFn(self.Q, self.P) if not self.P.is_zero() else None

    @property
    def X1(self) -> VField:
        return VField(Poly(), self.N, -self.P)

    @property
    def X2(self) -> VField:
        return VField(-self.N, Poly(), self.Q)

    @property
    def X3(self) -> VField:
        return VField(self.P, -self.Q, Poly())

    def fields(self) -> Dict[int, Optional[VField]]:
        """Plane fields by index; a field whose coefficients all vanish is ``None``."""
        out = {}
        for i, coeffs in ((1, (Poly(), self.N, -self.P)), (2, (-self.N, Poly(), self.Q)), (3, (self.P, -self.Q, Poly()))):
            out[i] = None if all(c.is_zero() for c in coeffs) else VField(*coeffs)
        return out

    def as_tuple(self) -> Tuple[Poly, Poly, Poly]:
        return (self.Q, self.P, self.N)


def build_triple(ode: Ode2, S, k: int) -> STriple:
    """Build the coprime ``(Q, P, N)`` from one S-function using ``N0 Q + z N0 P + M0 N = 0``."""
    S = RatFn.coerce(S)
    a, b = S.num, S.den
    M0, N0 = ode.M0, ode.N0
    if k == 1:
        Q, P, N = -(Z * a * N0 + M0 * b), a * N0, b * N0
    elif k == 2:
        Q, P, N = a * Z * N0, -(a * N0 + M0 * b), b * Z * N0
    elif k == 3:
        if M0.is_zero():
            raise DegenerateTriple("phi is identically zero; N cannot be recovered from S3")
        Q, P, N = a * M0, b * M0, -(a + Z * b) * N0
    else:
        raise ValueError("k must be 1, 2 or 3")
    if N.is_zero():
        raise DegenerateTriple("the triple has N identically zero")
    g = gcd_list([Q, P, N])
    Q, P, N = (exact_div(t, g) for t in (Q, P, N))
    # integral, jointly primitive, N with positive leading coefficient
    num, den = 0, 1
    for t in (Q, P, N):
        if t.is_zero():
            continue
        c = t.content()
        num = math.gcd(num, c.numerator)
        den = den * c.denominator // math.gcd(den, c.denominator)
    content = Fraction(num, den)
    if N.leading_coefficient() < 0:
        content = -content
    Q, P, N = (t.scale(1 / content) for t in (Q, P, N))
    if not (N0 * Q + Z * N0 * P + M0 * N).is_zero():
        raise DegenerateTriple("closure relation failed")
    return STriple(Q, P, N)


_ONE_ODE_LABELS = {
    3: ("dy/dx", "z"),
    1: ("dz/dy", "x"),
    2: ("dz/dx", "y"),
}


def _plain(p: Poly) -> str:
    return format_expression(p)


def associated_1ode(S, k: int) -> str:
    """Informational rendering of the associated first-order ODE ``dx_j/dx_i = -S_k``."""
    S = -RatFn.coerce(S)
    lhs, param = _ONE_ODE_LABELS[k]
    if S.den == ONE:
        rhs = _plain(S.num)
    else:
        num = _plain(S.num)
        if len(S.num.terms) > 1:
            num = f"({num})"
        den = _plain(S.den)
        if not _is_var_power(S.den):
            den = f"({den})"
        rhs = f"{num}/{den}"
    return f"{lhs} = {rhs} ({param} parameter)"
