"""Exact linear algebra over Q and a bounded solver for quadratic determining systems.

Linear systems are solved by fraction-free sparse elimination on integer rows
(rows are rescaled by their content after every update).  Independent blocks of
a system (connected components of the unknown/equation incidence graph) are
eliminated separately.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from .algebra import Poly, _norm

Symbol = Hashable
LinearForm = Tuple[Dict[Symbol, object], object]  # (coefficients, constant): sum(c*u) + const = 0

DEFAULT_PRIME = 2305843009213693951  # 2**61 - 1


class SolverError(ArithmeticError):
    pass


class Inconsistent(SolverError):
    """The linear system has no solution."""


class BudgetExceeded(SolverError):
    """A search cap was hit; ``partial`` holds any solutions found before that."""

    def __init__(self, message: str = "search budget exceeded", partial=None):
        super().__init__(message)
        self.partial = list(partial or [])


@dataclass
class LinearSystem:
    unknowns: List[Symbol]
    equations: List[LinearForm] = field(default_factory=list)

    def add(self, coeffs: Dict[Symbol, object], const=0) -> None:
        self.equations.append((coeffs, const))

    def check(self) -> None:
        known = set(self.unknowns)
        for coeffs, _ in self.equations:
            for u in coeffs:
                if u not in known:
                    raise ValueError(f"equation references undeclared unknown {u!r}")


@dataclass
class AffineSolution:
    """Solution set ``particular + span(basis)`` of a linear system."""

    unknowns: List[Symbol]
    particular: Dict[Symbol, object]
    basis: List[Dict[Symbol, object]]
    free: List[Symbol] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def point(self, params: Sequence = ()) -> Dict[Symbol, object]:
        out = dict(self.particular)
        for t, vec in zip(params, self.basis):
            if t:
                for u, c in vec.items():
                    out[u] = _norm(out.get(u, 0) + t * c)
        return {u: out.get(u, 0) for u in self.unknowns}


# --------------------------------------------------------------------------
# integer row utilities

CONST = -1  # column key of the constant term inside integer rows


def _integer_row(coeffs: Dict[int, object]) -> Dict[int, int]:
    den = 1
    for c in coeffs.values():
        if isinstance(c, Fraction) and c.denominator != 1:
            den = den * c.denominator // math.gcd(den, c.denominator)
    row = {}
    for k, c in coeffs.items():
        if c:
            v = c * den
            row[k] = v.numerator if isinstance(v, Fraction) else int(v)
    return _primitive_row(row)


def _primitive_row(row: Dict[int, int]) -> Dict[int, int]:
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {k: v // g for k, v in row.items()}
    return row


class _Echelon:
    """Incremental fraction-free echelon form; pivot column = smallest column index."""

    def __init__(self, modulus: Optional[int] = None):
        self.mod = modulus
        self.pivots: Dict[int, Dict[int, int]] = {}
        self.order: List[int] = []  # pivot columns in creation order
        self.rank_of: Dict[int, int] = {}

    def reduce(self, row: Dict[int, int]) -> Dict[int, int]:
        mod = self.mod
        row = dict(row)
        while True:
            hits = [c for c in row if c in self.pivots]
            if not hits:
                return row
            c = min(hits, key=self.rank_of.__getitem__)
            prow = self.pivots[c]
            a = prow[c]
            b = row[c]
            if mod is None:
                g = math.gcd(a, b)
                fa, fb = a // g, b // g
                new = {k: v * fa for k, v in row.items()}
                for k, v in prow.items():
                    s = new.get(k, 0) - fb * v
                    if s:
                        new[k] = s
                    else:
                        new.pop(k, None)
                row = _primitive_row(new)
            else:
                f = b * pow(a, -1, mod) % mod
                for k, v in prow.items():
                    s = (row.get(k, 0) - f * v) % mod
                    if s:
                        row[k] = s
                    else:
                        row.pop(k, None)

    def add(self, row: Dict[int, int]) -> bool:
        """Insert a row; returns False when it reduces to an inconsistent constant."""
        row = self.reduce(row)
        cols = [c for c in row if c != CONST]
        if not cols:
            return not row.get(CONST)
        c = min(cols)
        if self.mod is not None:
            inv = pow(row[c], -1, self.mod)
            row = {k: v * inv % self.mod for k, v in row.items()}
        elif row[c] < 0:
            row = {k: -v for k, v in row.items()}
        self.pivots[c] = row
        self.rank_of[c] = len(self.order)
        self.order.append(c)
        return True

    def back_substitute(self) -> None:
        for c in reversed(self.order):
            row = self.pivots[c]
            others = [k for k in row if k != c and k in self.pivots]
            if not others:
                continue
            rest = {k: v for k, v in row.items()}
            del self.pivots[c]
            rest = self.reduce(rest)
            self.pivots[c] = rest


def _components(n_unknowns: int, rows: List[Dict[int, int]]) -> List[Tuple[List[int], List[int]]]:
    parent = list(range(n_unknowns))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for row in rows:
        cols = [c for c in row if c != CONST]
        for c in cols[1:]:
            ra, rb = find(cols[0]), find(c)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    comp_cols: Dict[int, List[int]] = {}
    for c in range(n_unknowns):
        comp_cols.setdefault(find(c), []).append(c)
    comp_rows: Dict[int, List[int]] = {}
    for i, row in enumerate(rows):
        cols = [c for c in row if c != CONST]
        key = find(cols[0]) if cols else None
        comp_rows.setdefault(key, []).append(i)
    out = []
    for key in sorted(comp_cols):
        out.append((comp_cols[key], comp_rows.get(key, [])))
    if None in comp_rows:
        out.append(([], comp_rows[None]))
    return out


def _rows_from_system(sys: LinearSystem) -> Tuple[Dict[Symbol, int], List[Dict[int, int]]]:
    index = {u: i for i, u in enumerate(sys.unknowns)}
    rows = []
    for coeffs, const in sys.equations:
        raw = {index[u]: c for u, c in coeffs.items() if c}
        if const:
            raw[CONST] = const
        if raw:
            rows.append(_integer_row(raw))
    return index, rows


def solve_linear(sys: LinearSystem) -> AffineSolution:
    """Exact parametric solution of ``sys``; raises :class:`Inconsistent`.

    Pivots are taken on the earliest declared unknown of each row, so unknowns
    listed last become the free parameters whenever there is a choice.
    """
    index, rows = _rows_from_system(sys)
    n = len(sys.unknowns)
    particular: Dict[Symbol, object] = {}
    basis: List[Dict[Symbol, object]] = []
    free_syms: List[Symbol] = []
    for cols, row_ids in _components(n, rows):
        ech = _Echelon()
        for i in sorted(row_ids, key=lambda i: (len(rows[i]), i)):
            if not ech.add(rows[i]):
                raise Inconsistent("linear system is inconsistent")
        if not cols:
            continue
        ech.back_substitute()
        free = [c for c in cols if c not in ech.pivots]
        for c, row in ech.pivots.items():
            a = row[c]
            const = row.get(CONST, 0)
            if const:
                particular[sys.unknowns[c]] = _norm(Fraction(-const, a))
        for f in free:
            vec = {sys.unknowns[f]: 1}
            for c, row in ech.pivots.items():
                v = row.get(f)
                if v:
                    vec[sys.unknowns[c]] = _norm(Fraction(-v, row[c]))
            basis.append(vec)
            free_syms.append(sys.unknowns[f])
    # present the basis in declared unknown order of the free parameter
    order = sorted(range(len(free_syms)), key=lambda k: index[free_syms[k]])
    basis = [basis[k] for k in order]
    free_syms = [free_syms[k] for k in order]
    return AffineSolution(list(sys.unknowns), particular, basis, free_syms)


def nullspace(sys: LinearSystem) -> List[Dict[Symbol, object]]:
    """Basis of the homogeneous solution space (constants ignored)."""
    homog = LinearSystem(sys.unknowns, [(c, 0) for c, _ in sys.equations])
    return solve_linear(homog).basis


def rank_mod_p(rows: Iterable[Dict[int, int]], prime: int = DEFAULT_PRIME) -> int:
    """Rank of integer rows modulo ``prime`` (a lower bound for the rank over Q)."""
    ech = _Echelon(prime)
    for row in rows:
        r = {k: v % prime for k, v in row.items() if k != CONST and v % prime}
        if r:
            ech.add(r)
    return len(ech.order)


def integer_rows(forms: Iterable[Dict[int, object]]) -> List[Dict[int, int]]:
    return [_integer_row(f) for f in forms if any(f.values())]


# --------------------------------------------------------------------------
# polynomials whose coefficients are affine forms in unknowns


class LinearPoly:
    """Polynomial in x, y, z whose coefficients are affine forms in unknowns.

    ``terms`` maps a monomial to ``{symbol: coeff}``; the symbol ``None`` holds
    the constant part.  Used to assemble undetermined-coefficient identities.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: Dict[tuple, Dict[Optional[Symbol], object]] = terms or {}

    @classmethod
    def ansatz(cls, symbols_by_monomial: Dict[tuple, Symbol]) -> "LinearPoly":
        return cls({m: {s: 1} for m, s in symbols_by_monomial.items()})

    @classmethod
    def known(cls, p: Poly) -> "LinearPoly":
        return cls({m: {None: c} for m, c in p.terms.items()})

    def add_inplace(self, other: "LinearPoly", scale=1) -> "LinearPoly":
        for m, form in other.terms.items():
            tgt = self.terms.setdefault(m, {})
            for s, c in form.items():
                v = tgt.get(s, 0) + scale * c
                if v:
                    tgt[s] = v
                else:
                    tgt.pop(s, None)
        return self

    def add_poly_times(self, p: Poly, sym: Symbol, scale=1) -> "LinearPoly":
        """Add ``scale * sym * p`` for a scalar unknown ``sym``."""
        for m, c in p.terms.items():
            tgt = self.terms.setdefault(m, {})
            v = tgt.get(sym, 0) + scale * c
            if v:
                tgt[sym] = v
            else:
                tgt.pop(sym, None)
        return self

    def times_poly(self, p: Poly) -> "LinearPoly":
        out: Dict[tuple, Dict[Optional[Symbol], object]] = {}
        for m, form in self.terms.items():
            for t, c in p.terms.items():
                k = (m[0] + t[0], m[1] + t[1], m[2] + t[2])
                tgt = out.get(k)
                if tgt is None:
                    tgt = out[k] = {}
                for s, v in form.items():
                    tgt[s] = tgt.get(s, 0) + v * c
        return LinearPoly(out)

    def diff(self, var: int) -> "LinearPoly":
        out = {}
        for m, form in self.terms.items():
            e = m[var]
            if e:
                mm = list(m)
                mm[var] = e - 1
                out[tuple(mm)] = {s: v * e for s, v in form.items()}
        return LinearPoly(out)

    def equations(self) -> List[LinearForm]:
        eqs = []
        for m in sorted(self.terms, key=lambda m: (-sum(m), tuple(-e for e in m))):
            form = self.terms[m]
            coeffs = {s: v for s, v in form.items() if s is not None and v}
            const = form.get(None, 0)
            if coeffs or const:
                eqs.append((coeffs, const))
        return eqs

    def substitute(self, values: Dict[Symbol, object]) -> Poly:
        out = {}
        for m, form in self.terms.items():
            v = 0
            for s, c in form.items():
                v += c if s is None else c * values.get(s, 0)
            if v:
                out[m] = v
        return Poly(out)


def poly_from_values(symbols_by_monomial: Dict[tuple, Symbol], values: Dict[Symbol, object]) -> Poly:
    return Poly({m: values.get(s, 0) for m, s in symbols_by_monomial.items()})


# --------------------------------------------------------------------------
# bounded quadratic solver

# A polynomial in the unknowns is a dict {monomial: coeff}; a monomial is a
# sorted tuple of (unknown_index, exponent) pairs; () is the constant monomial.


def _qmul_mono(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _qadd(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + scale * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _qmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _qmul_mono(ma, mb)
            out[m] = out.get(m, 0) + ca * cb
    return {m: c for m, c in out.items() if c}


def _qdeg(p: dict) -> int:
    return max((sum(e for _, e in m) for m in p), default=-1)


def _qvars(p: dict) -> set:
    return {v for m in p for v, _ in m}


def _qsubs(p: dict, var: int, expr: dict, cache=None) -> dict:
    """Substitute the polynomial ``expr`` for unknown ``var``."""
    if not any(v == var for m in p for v, _ in m):
        return p
    out: dict = {}
    powers = {0: {(): 1}, 1: expr}
    for m, c in p.items():
        e = 0
        rest = []
        for v, k in m:
            if v == var:
                e = k
            else:
                rest.append((v, k))
        rest = tuple(rest)
        if e == 0:
            out[rest] = out.get(rest, 0) + c
            continue
        if e not in powers:
            acc = powers[max(k for k in powers if k <= e)]
            k0 = max(k for k in powers if k <= e)
            while k0 < e:
                acc = _qmul(acc, expr)
                k0 += 1
                powers[k0] = acc
        for mm, cc in powers[e].items():
            key = _qmul_mono(rest, mm)
            out[key] = out.get(key, 0) + c * cc
    return {m: _norm(c) for m, c in out.items() if c}


def _qeval(p: dict, values: Dict[int, object]):
    total = 0
    for m, c in p.items():
        t = c
        for v, e in m:
            t = t * values[v] ** e
        total += t
    return _norm(total)


def _qnormalize(p: dict) -> dict:
    """Scale to a primitive integer polynomial with positive leading coefficient."""
    if not p:
        return p
    den = 1
    num = 0
    for c in p.values():
        c = Fraction(c)
        den = den * c.denominator // math.gcd(den, c.denominator)
        num = math.gcd(num, c.numerator)
    lead = p[max(p)]
    s = Fraction(den, num) * (1 if lead > 0 else -1)
    return {m: _norm(c * s) for m, c in p.items()}


def _divisors(n: int, limit: int = 10**5) -> Optional[List[int]]:
    n = abs(n)
    if n == 0:
        return None
    small, large = [], []
    d = 1
    while d * d <= n:
        if d > limit:
            return None
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def rational_roots(coeffs: Sequence) -> List[Fraction]:
    """Distinct rational roots of ``sum coeffs[k] * t**k`` (exact, sorted)."""
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) <= 1:
        return []
    roots = set()
    while cs and cs[0] == 0:
        roots.add(Fraction(0))
        cs.pop(0)
    den = 1
    for c in cs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in cs]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    ints = [v // g for v in ints]
    deg = len(ints) - 1

    def value(t: Fraction):
        acc = Fraction(0)
        for c in reversed(ints):
            acc = acc * t + c
        return acc

    if deg == 1:
        roots.add(Fraction(-ints[0], ints[1]))
    elif deg == 2:
        c0, c1, c2 = ints
        disc = c1 * c1 - 4 * c2 * c0
        if disc >= 0:
            s = math.isqrt(disc)
            if s * s == disc:
                roots.add(Fraction(-c1 + s, 2 * c2))
                roots.add(Fraction(-c1 - s, 2 * c2))
    elif deg > 2:
        ps = _divisors(ints[0])
        qs = _divisors(ints[-1])
        if ps is not None and qs is not None and len(ps) * len(qs) <= 10**5:
            for p in ps:
                for q in qs:
                    for t in (Fraction(p, q), Fraction(-p, q)):
                        if value(t) == 0:
                            roots.add(t)
        else:
            import numpy as np

            for r in np.roots([float(v) for v in reversed(ints)]):
                if abs(r.imag) < 1e-7 * max(1.0, abs(r.real)):
                    t = Fraction(r.real).limit_denominator(10**9)
                    if value(t) == 0:
                        roots.add(t)
    return sorted(roots)


@dataclass
class PolySystem:
    """Polynomial equations (degree <= 2 on input) in the listed unknowns.

    Equations are ``{monomial: coeff}`` dicts, monomials being sorted tuples of
    ``(unknown, exponent)`` pairs.  ``projective_blocks`` lists groups of unknowns
    in which the system is homogeneous; each is normalized by setting its first
    nonzero entry (in the listed order) to 1.
    """

    unknowns: List[Symbol]
    equations: List[Dict[tuple, object]]
    projective_blocks: List[List[Symbol]] = field(default_factory=list)

    def check(self) -> None:
        known = set(self.unknowns)
        for eq in self.equations:
            for m in eq:
                for u, _ in m:
                    if u not in known:
                        raise ValueError(f"undeclared unknown {u!r}")


@dataclass
class _Branch:
    eqs: List[dict]
    subst: List[Tuple[int, dict, Optional[dict]]]  # (var, numerator, denominator or None)
    nonzero: List[dict]
    depth: int


class _QuadraticSearch:
    def __init__(self, n: int, max_branches: int, max_depth: int, max_degree: int, max_terms: int, deadline: Optional[float] = None):
        self.n = n
        self.deadline = deadline
        self.max_branches = max_branches
        self.max_depth = max_depth
        self.max_degree = max_degree
        self.max_terms = max_terms
        self.branches = 0
        self.budget_hit = False
        self.results: List[Dict[int, object]] = []

    def run(self, br: _Branch) -> None:
        stack = [br]
        while stack:
            if self.deadline is not None and time.monotonic() > self.deadline:
                self.budget_hit = True
                return
            b = stack.pop()
            children = self.step(b)
            if children:
                stack.extend(reversed(children))

    def _spawn(self, count: int) -> bool:
        self.branches += count
        if self.branches > self.max_branches:
            self.budget_hit = True
            return False
        return True

    @staticmethod
    def _clean(eqs: List[dict]) -> Optional[List[dict]]:
        out = []
        seen = set()
        for e in eqs:
            if not e:
                continue
            if len(e) == 1 and () in e:
                return None
            e = _qnormalize(e)
            key = tuple(sorted(e.items()))
            if key in seen:
                continue
            seen.add(key)
            out.append(e)
        return out

    def _eliminate(self, b: _Branch) -> Optional[_Branch]:
        eqs = self._clean(b.eqs)
        if eqs is None:
            return None
        subst = list(b.subst)
        while eqs:
            pick = None
            # fully linear equations first, then unknowns occurring once linearly
            best = None
            for idx, e in enumerate(eqs):
                deg = _qdeg(e)
                for m, c in e.items():
                    if len(m) != 1 or m[0][1] != 1:
                        continue
                    v = m[0][0]
                    if any(vv == v for mm in e if mm != m for vv, _ in mm):
                        continue
                    rest = {mm: cc for mm, cc in e.items() if mm != m}
                    score = (deg > 1, _qdeg(rest), len(e), -v)
                    if best is None or score < best:
                        best = score
                        pick = (idx, v, c, rest)
            if pick is None:
                break
            if self.deadline is not None and time.monotonic() > self.deadline:
                self.budget_hit = True
                return None
            idx, v, c, rest = pick
            expr = {mm: _norm(Fraction(-cc) / c) for mm, cc in rest.items()}
            subst.append((v, expr, None))
            new = []
            for k, e in enumerate(eqs):
                if k == idx:
                    continue
                new.append(_qsubs(e, v, expr))
            nonzero = [_qsubs(g, v, expr) for g in b.nonzero]
            if any(not g for g in nonzero):
                return None
            b = _Branch(new, subst, nonzero, b.depth)
            eqs = self._clean(new)
            if eqs is None:
                return None
            if any(_qdeg(e) > self.max_degree or len(e) > self.max_terms for e in eqs):
                self.budget_hit = True
                return None
        return _Branch(eqs, subst, b.nonzero, b.depth)

    def step(self, b: _Branch) -> List[_Branch]:
        b = self._eliminate(b)
        if b is None:
            return []
        if not b.eqs:
            self.finish(b)
            return []
        if b.depth >= self.max_depth:
            self.budget_hit = True
            return []
        eqs = b.eqs
        # univariate equations: branch on rational roots
        uni = [(len(e), _qdeg(e), i) for i, e in enumerate(eqs) if len(_qvars(e)) == 1]
        if uni:
            _, _, i = min(uni)
            e = eqs[i]
            v = next(iter(_qvars(e)))
            deg = _qdeg(e)
            coeffs = [0] * (deg + 1)
            for m, c in e.items():
                coeffs[m[0][1] if m else 0] += c
            roots = rational_roots(coeffs)
            if not roots or not self._spawn(len(roots)):
                return []
            out = []
            for r in roots:
                out.append(self._assign(b, v, {(): r} if r else {}))
            return [c for c in out if c is not None]
        # common unknown factor: split on it
        for e in sorted(eqs, key=len):
            common = None
            for m in e:
                vs = {v for v, _ in m}
                common = vs if common is None else common & vs
            if common:
                v = min(common)
                if not self._spawn(2):
                    return []
                zero = self._assign(b, v, {})
                k = min(dict(m)[v] for m in e)
                reduced = {}
                for m, c in e.items():
                    d = dict(m)
                    d[v] -= k
                    if not d[v]:
                        del d[v]
                    reduced[tuple(sorted(d.items()))] = c
                rest_eqs = [reduced if x is e else x for x in eqs]
                nz = _Branch(rest_eqs, b.subst, b.nonzero + [{((v, 1),): 1}], b.depth + 1)
                return [c for c in (zero, nz) if c is not None]
        # u linear with a nonconstant coefficient g: split g = 0 | g != 0
        best = None
        for i, e in enumerate(eqs):
            for v in sorted(_qvars(e)):
                g, h, ok = {}, {}, True
                for m, c in e.items():
                    d = dict(m)
                    k = d.get(v, 0)
                    if k > 1:
                        ok = False
                        break
                    if k == 1:
                        del d[v]
                        g[tuple(sorted(d.items()))] = c
                    else:
                        h[m] = c
                if ok and g:
                    score = (len(g), _qdeg(g), len(e), v)
                    if best is None or score < best[0]:
                        best = (score, i, v, g, h)
        if best is None:
            self.budget_hit = True
            return []
        _, i, v, g, h = best
        if not self._spawn(2):
            return []
        others = [e for k, e in enumerate(eqs) if k != i]
        zero_branch = _Branch(others + [g, h], b.subst, b.nonzero, b.depth + 1)
        neg_h = {m: -c for m, c in h.items()}
        new_eqs = []
        for e in others:
            dv = max((dict(m).get(v, 0) for m in e), default=0)
            if dv == 0:
                new_eqs.append(e)
                continue
            # g^dv * e(v = -h/g)
            acc: dict = {}
            for m, c in e.items():
                d = dict(m)
                k = d.pop(v, 0)
                term = {tuple(sorted(d.items())): c}
                for _ in range(k):
                    term = _qmul(term, neg_h)
                for _ in range(dv - k):
                    term = _qmul(term, g)
                acc = _qadd(acc, term)
            new_eqs.append(acc)
        solved = _Branch(new_eqs, b.subst + [(v, neg_h, g)], b.nonzero + [g], b.depth + 1)
        return [zero_branch, solved]

    def _assign(self, b: _Branch, v: int, value: dict) -> Optional[_Branch]:
        eqs = [_qsubs(e, v, value) for e in b.eqs]
        nonzero = [_qsubs(g, v, value) for g in b.nonzero]
        if any(not g for g in nonzero):
            return None
        return _Branch(eqs, b.subst + [(v, value, None)], nonzero, b.depth + 1)

    def finish(self, b: _Branch) -> None:
        assigned = {v for v, _, _ in b.subst}
        for trial in (0, 1, 2, -1, 3):
            values = {v: trial for v in range(self.n) if v not in assigned}
            ok = True
            for v, num, den in reversed(b.subst):
                val = _qeval(num, values)
                if den is not None:
                    d = _qeval(den, values)
                    if d == 0:
                        ok = False
                        break
                    val = _norm(Fraction(val) / d)
                values[v] = val
            if ok and all(_qeval(g, values) != 0 for g in b.nonzero):
                self.results.append(values)
                return
            if len(assigned) == self.n:
                return


def solve_quadratic_bounded(
    sys: PolySystem,
    max_branches: int = 64,
    max_depth: int = 12,
    max_degree: int = 24,
    max_terms: int = 4000,
    deadline: Optional[float] = None,
) -> List[Dict[Symbol, object]]:
    """Rational solution points of a bounded quadratic system.

    Unknowns occurring linearly are eliminated first; then univariate equations
    are branched on their rational roots, common unknown factors are split off,
    and unknowns with a polynomial coefficient are split into ``coeff = 0`` and
    ``coeff != 0`` cases.  Unknowns left free are set to 0.  Every returned point
    satisfies every input equation exactly.  Raises :class:`BudgetExceeded` (with
    ``partial`` results) when a cap stopped some branch or ``deadline``
    (a ``time.monotonic()`` value) passed.
    """
    index = {u: i for i, u in enumerate(sys.unknowns)}
    base = [{tuple(sorted((index[u], e) for u, e in m)): c for m, c in eq.items() if c} for eq in sys.equations]
    blocks = [[index[u] for u in blk] for blk in sys.projective_blocks]
    search = _QuadraticSearch(len(sys.unknowns), max_branches, max_depth, max_degree, max_terms, deadline)

    def pivots(k: int, fixed: List[Tuple[int, dict]]):
        if k == len(blocks):
            yield fixed
            return
        blk = blocks[k]
        for j, piv in enumerate(blk):
            yield from pivots(k + 1, fixed + [(u, {}) for u in blk[:j]] + [(piv, {(): 1})])

    for fixed in pivots(0, []):
        eqs = base
        for v, val in fixed:
            eqs = [_qsubs(e, v, val) for e in eqs]
        search.branches = 0
        search.run(_Branch(eqs, list(fixed and [(v, val, None) for v, val in fixed]), [], 0))
    seen = set()
    out = []
    for values in search.results:
        if all(_qeval(e, values) == 0 for e in base):
            key = tuple(values[i] for i in range(len(sys.unknowns)))
            if key not in seen:
                seen.add(key)
                out.append({u: values[index[u]] for u in sys.unknowns})
    if search.budget_hit:
        raise BudgetExceeded("quadratic search caps reached", out)
    return out


def qpoly_from_linear_products(terms: Iterable[Tuple[object, Sequence[Symbol]]]) -> Dict[tuple, object]:
    """Build an equation dict from ``(coeff, [unknowns...])`` products."""
    out: Dict[tuple, object] = {}
    for c, syms in terms:
        d: Dict[Symbol, int] = {}
        for s in syms:
            d[s] = d.get(s, 0) + 1
        m = tuple(sorted(d.items(), key=lambda t: repr(t[0])))
        out[m] = out.get(m, 0) + c
    return {m: c for m, c in out.items() if c}
