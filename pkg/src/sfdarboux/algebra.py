"""Exact arithmetic kernel: sparse trivariate polynomials over Q and rational functions.

Coefficients are Python ints or :class:`fractions.Fraction` (integral values are
kept as ints).  Monomials are exponent triples ``(ex, ey, ez)``.  All "leading"
notions refer to graded lexicographic order with x > y > z.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, Iterator, Tuple, Union

Monomial = Tuple[int, int, int]
Rational = Union[int, Fraction]

VARS = ("x", "y", "z")
ZERO_MONO: Monomial = (0, 0, 0)


class AlgebraError(ArithmeticError):
    pass


class NotDivisible(AlgebraError):
    """Raised by :func:`exact_div` when the divisor does not divide exactly."""


class DivisionByZero(AlgebraError, ZeroDivisionError):
    pass


def _norm(c) -> Rational:
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int):
        return c
    c = Fraction(c)
    return c.numerator if c.denominator == 1 else c


def grlex_key(m: Monomial):
    return (m[0] + m[1] + m[2], m[0], m[1], m[2])


def _var_index(var) -> int:
    if isinstance(var, int):
        return var
    return VARS.index(var)


class Poly:
    """Immutable sparse polynomial in x, y, z with rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Dict[Monomial, Rational] | None = None, _clean: bool = False):
        if terms is None:
            terms = {}
        elif not _clean:
            terms = {tuple(m): _norm(c) for m, c in terms.items() if c != 0}
        self.terms = terms
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, c) -> "Poly":
        c = _norm(c)
        return cls({ZERO_MONO: c} if c != 0 else {}, _clean=True)

    @classmethod
    def var(cls, name) -> "Poly":
        i = _var_index(name)
        m = [0, 0, 0]
        m[i] = 1
        return cls({tuple(m): 1}, _clean=True)

    @classmethod
    def monomial(cls, m: Monomial, c=1) -> "Poly":
        c = _norm(c)
        return cls({tuple(m): c} if c != 0 else {}, _clean=True)

    @classmethod
    def coerce(cls, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return cls.const(other)
        return NotImplemented

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ZERO_MONO in self.terms)

    def constant_value(self) -> Rational:
        return self.terms.get(ZERO_MONO, 0)

    def __len__(self) -> int:
        return len(self.terms)

    def degree(self, var=None) -> int:
        """Total degree (or degree in ``var``); the zero polynomial has degree -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(m) for m in self.terms)
        i = _var_index(var)
        return max(m[i] for m in self.terms)

    def min_degree(self, var) -> int:
        i = _var_index(var)
        return min(m[i] for m in self.terms) if self.terms else -1

    def variables(self) -> Tuple[int, ...]:
        used = [False, False, False]
        for m in self.terms:
            for i in range(3):
                if m[i]:
                    used[i] = True
        return tuple(i for i in range(3) if used[i])

    def sorted_terms(self):
        """Terms in decreasing graded-lex order."""
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def leading_monomial(self) -> Monomial:
        if not self.terms:
            raise AlgebraError("zero polynomial has no leading term")
        return max(self.terms, key=grlex_key)

    def leading_coefficient(self) -> Rational:
        return self.terms[self.leading_monomial()] if self.terms else 0

    def coefficient(self, m: Monomial) -> Rational:
        return self.terms.get(tuple(m), 0)

    # arithmetic
    def __add__(self, other):
        other = Poly.coerce(other)
        if other is NotImplemented:
            return other
        if len(self.terms) < len(other.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = dict(a)
        for m, c in b.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = _norm(s)
            else:
                out.pop(m, None)
        return Poly(out, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()}, _clean=True)

    def __sub__(self, other):
        other = Poly.coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) - c
            if s:
                out[m] = _norm(s)
            else:
                out.pop(m, None)
        return Poly(out, _clean=True)

    def __rsub__(self, other):
        return Poly.coerce(other) - self

    def scale(self, c) -> "Poly":
        c = _norm(c)
        if c == 0:
            return Poly()
        if c == 1:
            return self
        return Poly({m: _norm(v * c) for m, v in self.terms.items()}, _clean=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.terms or not other.terms:
            return Poly()
        out: Dict[Monomial, Rational] = {}
        get = out.get
        for (a0, a1, a2), ca in self.terms.items():
            for (b0, b1, b2), cb in other.terms.items():
                m = (a0 + b0, a1 + b1, a2 + b2)
                out[m] = get(m, 0) + ca * cb
        return Poly({m: _norm(c) for m, c in out.items() if c}, _clean=True)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def mul_monomial(self, m: Monomial, c=1) -> "Poly":
        c = _norm(c)
        if c == 0:
            return Poly()
        return Poly(
            {(a[0] + m[0], a[1] + m[1], a[2] + m[2]): _norm(v * c) for a, v in self.terms.items()},
            _clean=True,
        )

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        from .frontend import format_expression

        return f"Poly({format_expression(self)!r})"

    def __str__(self):
        from .frontend import format_expression

        return format_expression(self)

    # calculus and evaluation
    def diff(self, var) -> "Poly":
        i = _var_index(var)
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                mm = list(m)
                mm[i] = e - 1
                out[tuple(mm)] = c * e
        return Poly(out, _clean=True)

    def evaluate(self, point) -> Rational:
        """Evaluate at ``point = (x, y, z)`` exactly."""
        px, py, pz = (_norm(v) for v in point)
        total = 0
        for (a, b, c), v in self.terms.items():
            total += v * px**a * py**b * pz**c
        return _norm(total)

    def subs(self, var, value) -> "Poly":
        """Substitute a constant (or a polynomial) for one variable."""
        i = _var_index(var)
        if isinstance(value, Poly):
            out = Poly()
            groups: Dict[int, Dict[Monomial, Rational]] = {}
            for m, c in self.terms.items():
                mm = list(m)
                e = mm[i]
                mm[i] = 0
                groups.setdefault(e, {})[tuple(mm)] = c
            for e, t in groups.items():
                out = out + Poly(t, _clean=True) * value**e
            return out
        value = _norm(value)
        out: Dict[Monomial, Rational] = {}
        for m, c in self.terms.items():
            mm = list(m)
            e = mm[i]
            mm[i] = 0
            k = tuple(mm)
            out[k] = out.get(k, 0) + c * value**e
        return Poly(out)

    # content and normalization
    def content(self) -> Fraction:
        """Positive rational content: gcd of numerators over lcm of denominators."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            if isinstance(c, Fraction):
                num = math.gcd(num, c.numerator)
                den = den * c.denominator // math.gcd(den, c.denominator)
            else:
                num = math.gcd(num, c)
        return Fraction(num, den)

    def primitive(self) -> "Poly":
        """Integer-coefficient primitive part with positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading_coefficient() < 0:
            c = -c
        if c == 1:
            return self
        return self.scale(1 / c)

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        return self.scale(Fraction(1) / self.leading_coefficient())

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.terms.values())

    def max_norm(self) -> int:
        return max((abs(c) for c in self.terms.values()), default=0)

    def monomials(self) -> Iterator[Monomial]:
        return iter(self.terms)


X = Poly.var("x")
Y = Poly.var("y")
Z = Poly.var("z")
ONE = Poly.const(1)
ZERO_POLY = Poly()


def derivative(p: Poly, var) -> Poly:
    return p.diff(var)


def poly_sum(polys: Iterable[Poly]) -> Poly:
    out: Dict[Monomial, Rational] = {}
    for p in polys:
        for m, c in p.terms.items():
            out[m] = out.get(m, 0) + c
    return Poly(out)


# exact division ----------------------------------------------------------

def _divides(a: Monomial, b: Monomial) -> bool:
    return a[0] <= b[0] and a[1] <= b[1] and a[2] <= b[2]


def divmod_poly(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    """Multivariate division by the single divisor ``b`` (graded lex).

    Returns ``(q, r)`` with ``a = q*b + r`` and no term of ``r`` divisible by lm(b).
    """
    if b.is_zero():
        raise DivisionByZero("division by the zero polynomial")
    lm = b.leading_monomial()
    lc = b.terms[lm]
    inv = Fraction(1) / lc if lc not in (1, -1) else lc
    rest = [(m, c) for m, c in b.terms.items() if m != lm]
    work = dict(a.terms)
    q: Dict[Monomial, Rational] = {}
    r: Dict[Monomial, Rational] = {}
    keyf = grlex_key
    while work:
        m = max(work, key=keyf)
        c = work.pop(m)
        if _divides(lm, m):
            t = (m[0] - lm[0], m[1] - lm[1], m[2] - lm[2])
            f = _norm(c * inv)
            q[t] = f
            for mb, cb in rest:
                k = (mb[0] + t[0], mb[1] + t[1], mb[2] + t[2])
                s = work.get(k, 0) - f * cb
                if s:
                    work[k] = s
                else:
                    work.pop(k, None)
        else:
            r[m] = c
    return Poly(q), Poly(r)


def exact_div(a: Poly, b: Poly) -> Poly:
    """Return ``q`` with ``a == q*b``; raise :class:`NotDivisible` otherwise."""
    if b.is_zero():
        raise DivisionByZero("division by the zero polynomial")
    if a.is_zero():
        return a
    if b.is_constant():
        return a.scale(Fraction(1) / b.constant_value())
    # cheap degree screens before the full division
    for i in range(3):
        if b.degree(i) > a.degree(i) or b.min_degree(i) > a.min_degree(i):
            raise NotDivisible
    lm = b.leading_monomial()
    lm_a = a.leading_monomial()
    if not _divides(lm, lm_a):
        raise NotDivisible
    lc = b.terms[lm]
    rest = [(m, c) for m, c in b.terms.items() if m != lm]
    work = dict(a.terms)
    q: Dict[Monomial, Rational] = {}
    keyf = grlex_key
    while work:
        m = max(work, key=keyf)
        if not _divides(lm, m):
            raise NotDivisible
        c = work.pop(m)
        t = (m[0] - lm[0], m[1] - lm[1], m[2] - lm[2])
        f = c if lc == 1 else _norm(Fraction(c) / lc)
        q[t] = f
        for mb, cb in rest:
            k = (mb[0] + t[0], mb[1] + t[1], mb[2] + t[2])
            s = work.get(k, 0) - f * cb
            if s:
                work[k] = s
            else:
                work.pop(k, None)
    return Poly(q)


def try_exact_div(a: Poly, b: Poly):
    """Like :func:`exact_div` but returns ``None`` instead of raising."""
    try:
        return exact_div(a, b)
    except NotDivisible:
        return None


def divides(b: Poly, a: Poly) -> bool:
    return try_exact_div(a, b) is not None


# gcd ---------------------------------------------------------------------

def _int_primitive(p: Poly) -> Tuple[Fraction, Poly]:
    """Split ``p = c * pp`` with ``pp`` integral and primitive (sign untouched)."""
    c = p.content()
    return c, p.scale(1 / c) if c != 1 else p


def _eval_int(p: Poly, i: int, value: int) -> Poly:
    out: Dict[Monomial, int] = {}
    for m, c in p.terms.items():
        mm = list(m)
        e = mm[i]
        mm[i] = 0
        k = tuple(mm)
        out[k] = out.get(k, 0) + c * value**e
    return Poly(out)


def _smod(a: int, m: int) -> int:
    r = a % m
    if r > m // 2:
        r -= m
    return r


def _interpolate(h: Poly, xi: int, i: int) -> Poly:
    out: Dict[Monomial, int] = {}
    e = 0
    cur = dict(h.terms)
    while cur:
        nxt = {}
        for m, c in cur.items():
            g = _smod(c, xi)
            if g:
                mm = list(m)
                mm[i] = e
                out[tuple(mm)] = g
            rest = (c - g) // xi
            if rest:
                nxt[m] = rest
        cur = nxt
        e += 1
    return Poly(out)


class _HeuristicFailed(Exception):
    pass


def _heu_gcd(f: Poly, g: Poly, vars_left: Tuple[int, ...]) -> Poly:
    """Heuristic gcd of integral polynomials in the variables ``vars_left``."""
    if f.is_zero():
        return g
    if g.is_zero():
        return f
    if not vars_left:
        return Poly.const(math.gcd(f.constant_value(), g.constant_value()))
    # integer contents are handled separately: candidates are made primitive below
    cf, cg = f.content(), g.content()
    c = math.gcd(int(cf), int(cg))
    if cf != 1 or cg != 1:
        return _heu_gcd(f.scale(Fraction(1, int(cf))), g.scale(Fraction(1, int(cg))), vars_left).scale(c)
    i = vars_left[-1]
    rest = vars_left[:-1]
    if f.degree(i) == 0 and g.degree(i) == 0:
        return _heu_gcd(f, g, rest)
    fn, gn = f.max_norm(), g.max_norm()
    b = 2 * min(fn, gn) + 29
    xi = max(min(b, 99 * math.isqrt(b)), 2 * min(fn // abs(f.leading_coefficient()), gn // abs(g.leading_coefficient())) + 4)
    for _ in range(6):
        ff = _eval_int(f, i, xi)
        gg = _eval_int(g, i, xi)
        if not ff.is_zero() and not gg.is_zero():
            try:
                h = _heu_gcd(ff, gg, rest)
            except _HeuristicFailed:
                h = None
            if h is not None:
                got = _heu_candidates(f, g, ff, gg, h, xi, i)
                if got is not None:
                    return got
        xi = 73794 * xi * math.isqrt(math.isqrt(xi)) // 27011
    raise _HeuristicFailed


def _heu_candidates(f, g, ff, gg, hv, xi, i):
    # the gcd itself, then each cofactor (robust to spurious integer content)
    h = _interpolate(hv, xi, i)
    if not h.is_zero():
        h = h.primitive()
        if try_exact_div(f, h) is not None and try_exact_div(g, h) is not None:
            return h
    for a, b, av in ((f, g, ff), (g, f, gg)):
        cv = try_exact_div(av, hv)
        if cv is None:
            continue
        cof = _interpolate(cv, xi, i)
        if cof.is_zero():
            continue
        h = try_exact_div(a, cof)
        if h is not None and not h.is_zero():
            h = h.primitive()
            if try_exact_div(b, h) is not None:
                return h
    return None


# recursive primitive PRS fallback -----------------------------------------

def _as_univariate(p: Poly, i: int) -> Dict[int, Poly]:
    groups: Dict[int, Dict[Monomial, Rational]] = {}
    for m, c in p.terms.items():
        mm = list(m)
        e = mm[i]
        mm[i] = 0
        groups.setdefault(e, {})[tuple(mm)] = c
    return {e: Poly(t, _clean=True) for e, t in groups.items()}


def _from_univariate(u: Dict[int, Poly], i: int) -> Poly:
    out: Dict[Monomial, Rational] = {}
    for e, c in u.items():
        for m, v in c.terms.items():
            mm = list(m)
            mm[i] = e
            out[tuple(mm)] = v
    return Poly(out, _clean=True)


def _prs_gcd(f: Poly, g: Poly) -> Poly:
    if f.is_zero():
        return g.primitive()
    if g.is_zero():
        return f.primitive()
    vs = sorted(set(f.variables()) | set(g.variables()))
    if not vs:
        return ONE
    i = vs[-1]
    if f.degree(i) == 0 or g.degree(i) == 0:
        # gcd with something free of i divides every coefficient in i
        others = list(_as_univariate(f, i).values()) + list(_as_univariate(g, i).values())
        return reduce(_prs_gcd, others).primitive()
    cf = reduce(_prs_gcd, _as_univariate(f, i).values())
    cg = reduce(_prs_gcd, _as_univariate(g, i).values())
    pf = exact_div(f, cf)
    pg = exact_div(g, cg)
    a, b = (pf, pg) if pf.degree(i) >= pg.degree(i) else (pg, pf)
    while not b.is_zero() and b.degree(i) > 0:
        r = _pseudo_rem(a, b, i)
        if r.is_zero():
            break
        cr = reduce(_prs_gcd, _as_univariate(r, i).values())
        a, b = b, exact_div(r, cr)
    if b.is_zero():
        h = a
    elif b.degree(i) == 0:
        h = ONE
    else:
        h = b
    h = exact_div(h, reduce(_prs_gcd, _as_univariate(h, i).values())) if h.degree(i) > 0 else ONE
    return (h * _prs_gcd(cf, cg)).primitive()


def _pseudo_rem(a: Poly, b: Poly, i: int) -> Poly:
    db = b.degree(i)
    ub = _as_univariate(b, i)
    lcb = ub[db]
    r = a
    while not r.is_zero() and r.degree(i) >= db:
        dr = r.degree(i)
        ur = _as_univariate(r, i)
        lcr = ur[dr]
        m = [0, 0, 0]
        m[i] = dr - db
        r = r * lcb - (b * lcr).mul_monomial(tuple(m))
    return r


def gcd_poly(a: Poly, b: Poly) -> Poly:
    """Greatest common divisor, primitive over Z with positive leading coefficient."""
    if a.is_zero():
        return b.primitive()
    if b.is_zero():
        return a.primitive()
    if a.is_constant() or b.is_constant():
        return ONE
    _, fa = _int_primitive(a)
    _, fb = _int_primitive(b)
    if fa.primitive() == fb.primitive():
        return fa.primitive()
    # pull out common monomial factors first
    mono = tuple(min(fa.min_degree(i), fb.min_degree(i)) for i in range(3))
    lo_a = tuple(fa.min_degree(i) for i in range(3))
    lo_b = tuple(fb.min_degree(i) for i in range(3))
    fa = Poly({tuple(m[k] - lo_a[k] for k in range(3)): c for m, c in fa.terms.items()}, _clean=True)
    fb = Poly({tuple(m[k] - lo_b[k] for k in range(3)): c for m, c in fb.terms.items()}, _clean=True)
    if fa.is_constant() or fb.is_constant():
        h = ONE
    else:
        vs = tuple(sorted(set(fa.variables()) | set(fb.variables())))
        try:
            h = _heu_gcd(fa, fb, vs)
        except _HeuristicFailed:
            h = _prs_gcd(fa, fb)
    return h.mul_monomial(mono).primitive()


def gcd_list(polys: Iterable[Poly]) -> Poly:
    g = Poly()
    for p in polys:
        g = gcd_poly(g, p)
        if g == ONE:
            break
    return g


def lcm_poly(a: Poly, b: Poly) -> Poly:
    if a.is_zero() or b.is_zero():
        return Poly()
    return exact_div(a * b, gcd_poly(a, b)).primitive()


def squarefree_decomposition(p: Poly) -> list:
    """Return ``[(f, k), ...]`` with ``p = c * prod f**k``, each ``f`` square-free and coprime.

    Uses Yun's algorithm variable by variable; factors free of a variable are
    split recursively in the next one.
    """
    p = p.primitive()
    if p.is_constant():
        return []
    out: Dict[Poly, int] = {}
    _sqf_rec(p, out)
    merged: Dict[Poly, int] = {}
    for f, k in out.items():
        merged[f] = merged.get(f, 0) + k
    return sorted(merged.items(), key=lambda t: (t[1], t[0].degree(), str(t[0])))


def _sqf_rec(p: Poly, out: Dict[Poly, int], mult: int = 1) -> None:
    if p.is_constant():
        return
    i = p.variables()[0]
    # split off the part free of variable i
    free = reduce(gcd_poly, _as_univariate(p, i).values())
    if not free.is_constant():
        _sqf_rec(free, out, mult)
        p = exact_div(p, free)
    if p.is_constant():
        return
    dp = p.diff(i)
    a = gcd_poly(p, dp)
    b = exact_div(p, a)
    c = exact_div(dp, a)
    k = 1
    while not b.is_constant():
        d = c - b.diff(i)
        g = gcd_poly(b, d)
        if not g.is_constant():
            out[g.primitive()] = out.get(g.primitive(), 0) + k * mult
        b = exact_div(b, g)
        c = exact_div(d, g)
        k += 1


# rational functions -------------------------------------------------------

class RatFn:
    """Canonical quotient ``num/den`` of coprime polynomials.

    The denominator is integral, primitive and has a positive leading coefficient;
    any rational scale lives in the numerator.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _canonical: bool = False):
        num = Poly.coerce(num) if not isinstance(num, Poly) else num
        den = ONE if den is None else (Poly.coerce(den) if not isinstance(den, Poly) else den)
        if den.is_zero():
            raise DivisionByZero("rational function with zero denominator")
        if not _canonical:
            num, den = _canonical_pair(num, den)
        self.num = num
        self.den = den

    @classmethod
    def coerce(cls, v) -> "RatFn":
        if isinstance(v, RatFn):
            return v
        if isinstance(v, Poly):
            return cls(v, ONE, _canonical=True)
        if isinstance(v, (int, Fraction)):
            return cls(Poly.const(v), ONE, _canonical=True)
        return NotImplemented

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den == ONE

    def __add__(self, other):
        other = RatFn.coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RatFn(self.num + other.num, self.den)
        g = gcd_poly(self.den, other.den)
        da = exact_div(self.den, g)
        db = exact_div(other.den, g)
        return RatFn(self.num * db + other.num * da, da * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFn(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        other = RatFn.coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return RatFn.coerce(other) - self

    def __mul__(self, other):
        other = RatFn.coerce(other)
        if other is NotImplemented:
            return other
        g1 = gcd_poly(self.num, other.den)
        g2 = gcd_poly(other.num, self.den)
        n = exact_div(self.num, g1) * exact_div(other.num, g2)
        d = exact_div(self.den, g2) * exact_div(other.den, g1)
        return RatFn(n, d)

    __rmul__ = __mul__

    def inverse(self) -> "RatFn":
        if self.num.is_zero():
            raise DivisionByZero("inverse of zero")
        return RatFn(self.den, self.num)

    def __truediv__(self, other):
        other = RatFn.coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RatFn.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFn(self.num**n, self.den**n, _canonical=True)

    def diff(self, var) -> "RatFn":
        return RatFn(self.num.diff(var) * self.den - self.num * self.den.diff(var), self.den * self.den)

    def evaluate(self, point) -> Rational:
        d = self.den.evaluate(point)
        if d == 0:
            raise DivisionByZero("denominator vanishes at point")
        return _norm(Fraction(self.num.evaluate(point)) / d)

    def __eq__(self, other):
        other = RatFn.coerce(other) if not isinstance(other, RatFn) else other
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        from .frontend import format_expression

        return f"RatFn({format_expression(self)!r})"

    def __str__(self):
        from .frontend import format_expression

        return format_expression(self)


def _canonical_pair(num: Poly, den: Poly) -> Tuple[Poly, Poly]:
    if num.is_zero():
        return Poly(), ONE
    if not den.is_constant():
        g = gcd_poly(num, den)
        if not g.is_constant():
            num = exact_div(num, g)
            den = exact_div(den, g)
    # move the rational scale of the denominator into the numerator
    c = den.content()
    if den.leading_coefficient() < 0:
        c = -c
    if c != 1:
        den = den.scale(1 / c)
        num = num.scale(1 / c)
    return num, den


def normalize(value):
    """Canonicalize a :class:`Poly` or :class:`RatFn` (idempotent)."""
    if isinstance(value, Poly):
        return Poly(dict(value.terms))
    return RatFn(value.num, value.den)


def as_ratfn(value) -> RatFn:
    return RatFn.coerce(value)
