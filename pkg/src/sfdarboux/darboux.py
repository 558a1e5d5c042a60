"""Darboux polynomials of the plane fields, exponential part, cofactor balance and
linear recovery of the remaining unknown Darboux polynomial."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .algebra import (
    ONE,
    Poly,
    _norm,
    exact_div,
    gcd_poly,
    grlex_key,
    squarefree_decomposition,
    try_exact_div,
)
from .sfunction import STriple, VField
from .solver import (
    DEFAULT_PRIME,
    BudgetExceeded,
    Inconsistent,
    LinearPoly,
    LinearSystem,
    PolySystem,
    _Echelon,
    solve_linear,
    solve_quadratic_bounded,
)


class NotDarboux(ValueError):
    """The polynomial is not a Darboux polynomial of the field."""


class NoSolution(ValueError):
    pass


@dataclass(frozen=True)
class DarbouxPair:
    p: Poly
    cofactors: Mapping[int, Poly]

    def __post_init__(self):
        if self.p.is_constant():
            raise ValueError("a Darboux polynomial must be nonconstant")


@dataclass(frozen=True)
class ExpPart:
    A: Poly
    B: Poly
    Pi: Mapping[int, Poly]

    @property
    def trivial(self) -> bool:
        return self.A.is_zero()


@dataclass(frozen=True)
class CofactorBalance:
    exponents: Mapping[int, Fraction]
    n0q0: Mapping[int, Poly]

    @property
    def complete(self) -> bool:
        """True when no unknown Darboux polynomial is needed."""
        return all(q.is_zero() for q in self.n0q0.values())


# --------------------------------------------------------------------------
# basic operations


def apply_field(X: VField, p: Poly) -> Poly:
    return X(p)


def cofactor_of(X: VField, p: Poly) -> Poly:
    """Cofactor ``q`` with ``X(p) = q p``; raises :class:`NotDarboux`."""
    if p.is_zero() or p.is_constant():
        raise ValueError("cofactor_of needs a nonconstant polynomial")
    q = try_exact_div(X(p), p)
    if q is None:
        raise NotDarboux("p does not divide X(p)")
    return q


def triple_fields(triple: STriple, indices: Iterable[int] = (1, 2, 3)) -> Dict[int, VField]:
    fields = triple.fields()
    return {i: fields[i] for i in indices if fields.get(i) is not None}


def common_cofactors(fields: Mapping[int, VField], p: Poly) -> Optional[Dict[int, Poly]]:
    out = {}
    for i, X in fields.items():
        q = try_exact_div(X(p), p)
        if q is None:
            return None
        out[i] = q
    return out


def divergences(fields: Mapping[int, VField]) -> Dict[int, Poly]:
    return {i: X.divergence() for i, X in fields.items()}


# --------------------------------------------------------------------------
# gradings


def gradings(fields: Mapping[int, VField], cofactors: Optional[Mapping[int, Poly]] = None) -> List[Tuple[int, int, int]]:
    """Integer weight vectors for which every field is weighted homogeneous.

    ``cofactors`` (per field) are required to be homogeneous of the field's
    weight shift as well.  Returns a basis of primitive integer vectors.
    """
    keys = sorted(fields)
    unknowns = ["wx", "wy", "wz"] + [("d", i) for i in keys]
    sys = LinearSystem(unknowns)
    for i in keys:
        X = fields[i]
        pts = []
        for u, c in enumerate(X.coefficients):
            for m in c.terms:
                pts.append(tuple(m[k] - (1 if k == u else 0) for k in range(3)))
        if cofactors and i in cofactors:
            pts.extend(cofactors[i].terms)
        for s in pts:
            coeffs = {name: s[k] for k, name in enumerate(("wx", "wy", "wz")) if s[k]}
            coeffs[("d", i)] = coeffs.get(("d", i), 0) - 1
            sys.add(coeffs)
    try:
        sol = solve_linear(sys)
    except Inconsistent:  # pragma: no cover - homogeneous systems are consistent
        return []
    out = []
    for vec in sol.basis:
        w = [Fraction(vec.get(n, 0)) for n in ("wx", "wy", "wz")]
        if not any(w):
            continue
        den = 1
        for c in w:
            den = den * c.denominator // math.gcd(den, c.denominator)
        ints = [int(c * den) for c in w]
        g = 0
        for c in ints:
            g = math.gcd(g, c)
        ints = [c // g for c in ints]
        if next(c for c in ints if c) < 0:
            ints = [-c for c in ints]
        out.append(tuple(ints))
    return out


def _block_key(m, grads) -> tuple:
    return tuple(g[0] * m[0] + g[1] * m[1] + g[2] * m[2] for g in grads)


def _shift_key(X: VField, grads) -> Optional[tuple]:
    for u, c in enumerate(X.coefficients):
        for m in c.terms:
            s = tuple(m[k] - (1 if k == u else 0) for k in range(3))
            return _block_key(s, grads)
    return None


def _monomials_box(limits: Sequence[int], total: Optional[int] = None, active: Optional[Sequence[int]] = None, active_deg: Optional[int] = None):
    out = []
    for m in itertools.product(*(range(l + 1) for l in limits)):
        if total is not None and sum(m) > total:
            continue
        if active is not None and sum(m[k] for k in active) > active_deg:
            continue
        out.append(m)
    return out


_DIRECTIONS = [d for d in itertools.product((-1, 0, 1), repeat=3) if any(d)]


def cofactor_support(X: VField) -> List[tuple]:
    """Monomials that can occur in a cofactor of ``X`` (Newton polytope bound)."""
    gens = []
    for u, c in enumerate(X.coefficients):
        for m in c.terms:
            gens.append(tuple(m[k] - (1 if k == u else 0) for k in range(3)))
    if not gens:
        return []
    bound = {d: max(d[0] * g[0] + d[1] * g[1] + d[2] * g[2] for g in gens) for d in _DIRECTIONS}
    top = max(0, X.max_degree() - 1)
    hi = [max(0, max(g[k] for g in gens)) for k in range(3)]
    out = []
    for m in _monomials_box(hi, total=top):
        if all(d[0] * m[0] + d[1] * m[1] + d[2] * m[2] <= b for d, b in bound.items()):
            out.append(m)
    return out


# --------------------------------------------------------------------------
# easy Darboux polynomials (bilinear undetermined coefficients)


@dataclass
class DpSearchStats:
    blocks: int = 0
    skipped: int = 0
    budget_hits: int = 0


def _dp_ansatz(primary: VField, deg_main: int, deg_param: int) -> List[tuple]:
    param = primary.parameter()
    if param is None:
        return _monomials_box([deg_main] * 3, total=deg_main)
    active = [k for k in range(3) if k != param]
    limits = [deg_main] * 3
    limits[param] = deg_param
    return _monomials_box(limits, active=active, active_deg=deg_main)


def _search_dps(
    fields: Mapping[int, VField],
    primary: int,
    deg_main: int,
    deg_param: int,
    max_block: int = 12,
    max_branches: int = 48,
    stats: Optional[DpSearchStats] = None,
    deadline: Optional[float] = None,
) -> List[DarbouxPair]:
    stats = stats if stats is not None else DpSearchStats()
    grads = gradings(fields)
    ansatz = _dp_ansatz(fields[primary], deg_main, deg_param)
    blocks: Dict[tuple, List[tuple]] = {}
    for m in ansatz:
        blocks.setdefault(_block_key(m, grads), []).append(m)
    shift = {i: _shift_key(X, grads) for i, X in fields.items()}
    supports = {i: [t for t in cofactor_support(X) if _block_key(t, grads) == shift[i]] for i, X in fields.items()}
    images = {i: {} for i in fields}
    found: List[DarbouxPair] = []
    order = sorted(blocks, key=lambda k: (len(blocks[k]), min(sum(m) for m in blocks[k]), k))
    for key in order:
        mons = sorted(blocks[key], key=grlex_key, reverse=True)
        if not any(any(m) for m in mons):
            continue
        if len(mons) > max_block:
            stats.skipped += 1
            continue
        if deadline is not None and time.monotonic() > deadline:
            stats.budget_hits += 1
            break
        stats.blocks += 1
        ps = [("p", m) for m in mons]
        unknowns = list(ps)
        eqs: Dict[tuple, Dict[tuple, object]] = {}
        for i, X in fields.items():
            qs = [("q", i, t) for t in supports[i]]
            unknowns.extend(qs)
            for m, sym in zip(mons, ps):
                img = images[i].get(m)
                if img is None:
                    img = images[i][m] = X(Poly.monomial(m))
                for mono, c in img.terms.items():
                    tgt = eqs.setdefault((i, mono), {})
                    k = ((sym, 1),)
                    tgt[k] = tgt.get(k, 0) + c
                for t, qsym in zip(supports[i], qs):
                    mono = (m[0] + t[0], m[1] + t[1], m[2] + t[2])
                    tgt = eqs.setdefault((i, mono), {})
                    k = tuple(sorted(((sym, 1), (qsym, 1)), key=repr))
                    tgt[k] = tgt.get(k, 0) - 1
        equations = [{k: v for k, v in e.items() if v} for e in eqs.values()]
        system = PolySystem(unknowns, [e for e in equations if e], projective_blocks=[ps])
        try:
            points = solve_quadratic_bounded(system, max_branches=max_branches, max_depth=16, deadline=deadline)
        except BudgetExceeded as exc:
            stats.budget_hits += 1
            points = exc.partial
        for pt in points:
            p = Poly({m: pt[s] for m, s in zip(mons, ps)})
            if p.is_zero() or p.is_constant():
                continue
            p = p.primitive()
            cof = common_cofactors(fields, p)
            if cof is None:  # pragma: no cover - points are verified by the solver
                continue
            if any(_associates(p, d.p) for d in found):
                continue
            found.append(DarbouxPair(p, cof))
    return found


def _associates(a: Poly, b: Poly) -> bool:
    return a.primitive() == b.primitive()


def find_dps(
    X: VField,
    deg_main: int = 1,
    deg_param: Optional[int] = None,
    field_index: int = 0,
    max_block: int = 12,
    deadline: Optional[float] = None,
) -> List[DarbouxPair]:
    """Darboux polynomials of a single field by undetermined coefficients.

    The ansatz has degree <= ``deg_main`` in the active variables and
    ``<= deg_param`` in the parameter variable (the one the field does not
    differentiate along).  Returned polynomials are primitive, pairwise
    non-associate and include the square-free pieces of composite results.
    """
    if deg_param is None:
        param = X.parameter()
        deg_param = max(c.degree(param) for c in X.coefficients if not c.is_zero()) if param is not None else 0
    stats = DpSearchStats()
    fields = {field_index: X}
    out: List[DarbouxPair] = []
    for dm in range(1, deg_main + 1):
        for dp in range(0, deg_param + 1):
            for pair in _search_dps(fields, field_index, dm, dp, max_block=max_block, stats=stats, deadline=deadline):
                out.append(pair)
    result = refine_pairs(fields, [d.p for d in out])
    if not result and stats.budget_hits:
        raise BudgetExceeded("Darboux polynomial search caps reached", [])
    return result


def find_common_dps(
    triple: STriple,
    deg_main: int = 2,
    deg_param: int = 2,
    max_block: int = 12,
    deadline: Optional[float] = None,
    stats: Optional[DpSearchStats] = None,
    min_main: int = 1,
) -> List[DarbouxPair]:
    """Polynomials that are Darboux for all three plane fields.

    Each field in turn provides the ansatz shape (two active variables plus its
    parameter) while the equations of all fields are stacked.  Past ``deadline``
    (a ``time.monotonic()`` value) the search stops and returns what it has;
    ``stats.budget_hits`` records that it was cut short.
    """
    fields = triple_fields(triple)
    stats = stats if stats is not None else DpSearchStats()
    raw: List[Poly] = []
    for dm in range(min_main, deg_main + 1):
        for dp in range(0, deg_param + 1):
            for i in sorted(fields):
                if fields[i].parameter() is None:
                    continue
                if deadline is not None and time.monotonic() > deadline:
                    stats.budget_hits += 1
                    return refine_pairs(fields, raw)
                for pair in _search_dps(fields, i, dm, dp, max_block=max_block, stats=stats, deadline=deadline):
                    raw.append(pair.p)
    return refine_pairs(fields, raw)


def coprime_basis(polys: Iterable[Poly]) -> List[Poly]:
    """Pairwise coprime square-free polynomials generating the same factors."""
    pending = []
    for p in polys:
        if p.is_zero() or p.is_constant():
            continue
        for f, _ in squarefree_decomposition(p):
            if not f.is_constant():
                pending.append(f.primitive())
    basis: List[Poly] = []
    while pending:
        a = pending.pop(0)
        changed = False
        for k, b in enumerate(basis):
            g = gcd_poly(a, b)
            if g.is_constant():
                continue
            basis.pop(k)
            parts = [g, exact_div(a, g), exact_div(b, g)]
            pending = [x.primitive() for x in parts if not x.is_constant()] + pending
            changed = True
            break
        if not changed:
            basis.append(a)
    basis = list(dict.fromkeys(basis))
    return sorted(basis, key=lambda p: (p.degree(), grlex_key(p.leading_monomial()), str(p)))


def refine_pairs(fields: Mapping[int, VField], polys: Iterable[Poly]) -> List[DarbouxPair]:
    out = []
    for f in coprime_basis(polys):
        cof = common_cofactors(fields, f)
        if cof is not None:
            out.append(DarbouxPair(f, cof))
    return out


# --------------------------------------------------------------------------
# exponential part and cofactor balance


def _ansatz(prefix, degree: int) -> Dict[tuple, tuple]:
    return {m: (prefix, m) for m in _monomials_box([degree] * 3, total=degree)}


def solve_exp_part(triple: STriple, B: Poly = ONE, degA: int = 2) -> ExpPart:
    """Minimal exponential part ``e^{A/B}`` for a given ``B``.

    Solves ``B X_i(A) - A X_i(B) = B^2 P_i`` jointly over the three fields; the
    returned point has every free coefficient of ``A`` set to zero, so ``A = 0``
    whenever the homogeneous system allows it.
    """
    fields = triple_fields(triple)
    if B.is_zero():
        raise ValueError("B must be nonzero")
    a_syms = _ansatz("A", degA)
    unknowns = list(a_syms.values())
    eqs = []
    pi_syms = {}
    for i, X in fields.items():
        lp = LinearPoly()
        A = LinearPoly.ansatz(a_syms)
        # B X(A) - A X(B)
        xa = LinearPoly()
        for k in range(3):
            c = X.coefficients[k]
            if not c.is_zero():
                xa.add_inplace(A.diff(k).times_poly(c))
        lp.add_inplace(xa.times_poly(B))
        xb = X(B)
        if not xb.is_zero():
            lp.add_inplace(A.times_poly(xb), -1)
        # minus B^2 P_i with P_i unknown
        B2 = B * B
        degP = max(0, max((sum(m) for m in lp.terms), default=0) - B2.degree())
        psyms = _ansatz(("P", i), degP)
        pi_syms[i] = psyms
        unknowns.extend(psyms.values())
        lp.add_inplace(LinearPoly.ansatz(psyms).times_poly(B2), -1)
        eqs.extend(lp.equations())
    sys = LinearSystem(unknowns, eqs)
    try:
        sol = solve_linear(sys)
    except Inconsistent as exc:
        raise NoSolution("no exponential part for this B") from exc
    pt = sol.point()
    A = Poly({m: pt[s] for m, s in a_syms.items()})
    Pi = {i: Poly({m: pt[s] for m, s in ps.items()}) for i, ps in pi_syms.items()}
    g = gcd_poly(A, B) if not A.is_zero() else B
    if not A.is_zero() and not g.is_constant():
        A, B = exact_div(A, g), exact_div(B, g)
    return ExpPart(A, B if not A.is_zero() else ONE, Pi if not A.is_zero() else {i: Poly() for i in fields})


def trivial_exp_part(triple: STriple) -> ExpPart:
    return ExpPart(Poly(), ONE, {i: Poly() for i in triple_fields(triple)})


def _balance_residuals(triple: STriple, dps: Sequence[DarbouxPair], exp: ExpPart) -> Tuple[Dict[int, Poly], Dict[int, List[Poly]]]:
    fields = triple_fields(triple)
    base = {}
    per_dp = {}
    for i, X in fields.items():
        base[i] = exp.Pi.get(i, Poly()) + X.divergence()
        per_dp[i] = [d.cofactors[i] for d in dps]
    return base, per_dp


def balance_family(triple: STriple, dps: Sequence[DarbouxPair], exp: ExpPart, degq0: Optional[int] = None):
    """Affine family of balances.

    Returns ``(base, per_dp, constraints)``: for exponents ``n``,
    ``n0q0_i = -(base_i + sum_j n_j per_dp[i][j])``; ``constraints`` is an
    :class:`AffineSolution` over the exponent symbols ``("n", j)`` describing the
    admissible exponents (those keeping ``deg n0q0_i <= degq0``).
    """
    fields = triple_fields(triple)
    if degq0 is None:
        degq0 = max(X.max_degree() for X in fields.values()) - 1
    base, per_dp = _balance_residuals(triple, dps, exp)
    syms = [("n", j) for j in range(len(dps))]
    sys = LinearSystem(syms)
    for i in fields:
        lp = LinearPoly.known(base[i])
        for j, q in enumerate(per_dp[i]):
            lp.add_poly_times(q, syms[j])
        for m, form in lp.terms.items():
            if sum(m) > degq0:
                coeffs = {s: c for s, c in form.items() if s is not None and c}
                const = form.get(None, 0)
                if coeffs or const:
                    sys.add(coeffs, const)
    try:
        sol = solve_linear(sys)
    except Inconsistent as exc:
        raise NoSolution("cofactor balance has no solution within the degree bound") from exc
    return base, per_dp, sol


def balance_at(triple: STriple, dps: Sequence[DarbouxPair], exp: ExpPart, exponents: Mapping[int, object]) -> CofactorBalance:
    base, per_dp = _balance_residuals(triple, dps, exp)
    n0q0 = {}
    for i in base:
        acc = base[i]
        for j, q in enumerate(per_dp[i]):
            n = exponents.get(j, 0)
            if n:
                acc = acc + q.scale(n)
        n0q0[i] = -acc
    return CofactorBalance({j: _norm(Fraction(exponents.get(j, 0))) for j in range(len(dps))}, n0q0)


def balance_cofactors(
    triple: STriple,
    dps: Sequence[DarbouxPair],
    exp: ExpPart,
    degq0: Optional[int] = None,
    exponents: Optional[Mapping[int, object]] = None,
) -> CofactorBalance:
    """Solve ``P_i + sum_j n_j q_ij + n0 q_i0 + div X_i = 0`` for the ``n_j`` and ``n0 q_i0``.

    With ``exponents`` given, they are used as is (after checking admissibility).
    Otherwise, among the admissible exponents the point with the fewest nonzero
    coefficients in the ``n0 q_i0`` is selected.
    """
    base, per_dp, sol = balance_family(triple, dps, exp, degq0)
    if exponents is not None:
        values = {("n", j): Fraction(exponents.get(j, 0)) for j in range(len(dps))}
        for coeffs, const in _constraint_rows(sol):
            if sum(c * values[s] for s, c in coeffs.items()) + const != 0:
                raise NoSolution("exponents violate the balance degree bound")
        return balance_at(triple, dps, exp, exponents)
    point = _sparsest_point(base, per_dp, sol)
    return balance_at(triple, dps, exp, {j: point[("n", j)] for j in range(len(dps))})


def _constraint_rows(sol):
    # express "point lies in the affine family" as linear equations
    rows = []
    free = set(sol.free)
    for u in sol.unknowns:
        if u in free:
            continue
        coeffs = {u: 1}
        for t, vec in zip(sol.free, sol.basis):
            c = vec.get(u, 0)
            if c:
                coeffs[t] = coeffs.get(t, 0) - c
        rows.append((coeffs, -Fraction(sol.particular.get(u, 0))))
    return rows


def _sparsest_point(base, per_dp, sol) -> Dict[tuple, Fraction]:
    k = len(sol.basis)
    particular = {u: Fraction(sol.particular.get(u, 0)) for u in sol.unknowns}
    if k == 0:
        return particular
    # each n0q0 coefficient is affine in the free parameters t
    forms = []
    for i in sorted(base):
        coeffs: Dict[tuple, List[Fraction]] = {}
        for m, c in base[i].terms.items():
            coeffs.setdefault(m, [Fraction(0)] * (k + 1))[0] += c
        for j, q in enumerate(per_dp[i]):
            sym = ("n", j)
            for m, c in q.terms.items():
                vec = coeffs.setdefault(m, [Fraction(0)] * (k + 1))
                vec[0] += c * particular[sym]
                for r, b in enumerate(sol.basis):
                    vec[r + 1] += c * Fraction(b.get(sym, 0))
        forms.extend(v for v in coeffs.values() if any(v))

    def count(t):
        return sum(1 for v in forms if v[0] + sum(a * b for a, b in zip(v[1:], t)) != 0)

    candidates = [tuple([Fraction(0)] * k)]
    nonconst = [v for v in forms if any(v[1:])]
    if k == 1:
        candidates += [(-v[0] / v[1],) for v in nonconst]
    else:
        for combo in itertools.combinations(nonconst[:60], k):
            sub = LinearSystem(list(range(k)), [({r: v[r + 1] for r in range(k) if v[r + 1]}, v[0]) for v in combo])
            try:
                s = solve_linear(sub)
            except Inconsistent:
                continue
            if s.dimension == 0:
                candidates.append(tuple(Fraction(s.particular.get(r, 0)) for r in range(k)))
    best = min(set(candidates), key=lambda t: (count(t), tuple(abs(x) for x in t), t))
    pt = dict(particular)
    for r, b in enumerate(sol.basis):
        for u, c in b.items():
            pt[u] = pt.get(u, 0) + best[r] * c
    return pt


def complete_balance(
    triple: STriple,
    dps: Sequence[DarbouxPair],
    B: Poly = ONE,
    degA: int = 2,
) -> Tuple[ExpPart, CofactorBalance]:
    """Integrating factor ``e^{A/B} prod p_j^{n_j}`` with no unknown Darboux polynomial.

    Solves ``B X_i(A) - A X_i(B) + B^2 (sum_j n_j q_ij + div X_i) = 0`` linearly in
    the coefficients of ``A`` and the exponents.
    """
    return complete_balance_candidates(triple, dps, B, degA, limit=1)[0]


def complete_balance_candidates(
    triple: STriple,
    dps: Sequence[DarbouxPair],
    B: Poly = ONE,
    degA: int = 2,
    values: Sequence[int] = (-1, 0, 1, -2, 2),
    limit: int = 12,
) -> List[Tuple[ExpPart, CofactorBalance]]:
    """Several points of the complete-balance family.

    When the family is positive dimensional (for instance ``R`` times a power of a
    first integral), free exponents are tried from ``values`` with the free
    coefficients of ``A`` at zero; integral exponent vectors come first.
    """
    fields = triple_fields(triple)
    a_syms = _ansatz("A", degA) if degA >= 0 else {}
    n_syms = [("n", j) for j in range(len(dps))]
    # exponents first so that they become pivots; A's coefficients are free when possible
    unknowns = n_syms + sorted(a_syms.values(), key=lambda s: grlex_key(s[1]))
    B2 = B * B
    eqs = []
    for i, X in fields.items():
        lp = LinearPoly.known(B2 * X.divergence())
        for j, d in enumerate(dps):
            lp.add_poly_times(B2 * d.cofactors[i], n_syms[j])
        if a_syms:
            A = LinearPoly.ansatz(a_syms)
            xa = LinearPoly()
            for k in range(3):
                c = X.coefficients[k]
                if not c.is_zero():
                    xa.add_inplace(A.diff(k).times_poly(c))
            lp.add_inplace(xa.times_poly(B))
            xb = X(B)
            if not xb.is_zero():
                lp.add_inplace(A.times_poly(xb), -1)
        eqs.extend(lp.equations())
    try:
        sol = solve_linear(LinearSystem(unknowns, eqs))
    except Inconsistent as exc:
        raise NoSolution("no complete balance") from exc
    free_n = [t for t in sol.free if t in set(n_syms)]
    assignments = [()]
    if free_n:
        assignments = list(itertools.islice(itertools.product(values, repeat=len(free_n)), 400))
    points = []
    seen = set()
    for values_t in assignments:
        chosen = dict(zip(free_n, values_t))
        pt = sol.point([chosen.get(t, 0) for t in sol.free])
        exps = tuple(_norm(Fraction(pt[s])) for s in n_syms)
        A = Poly({m: pt[s] for m, s in a_syms.items()})
        key = (exps, A)
        if key in seen:
            continue
        seen.add(key)
        nonint = sum(1 for e in exps if Fraction(e).denominator != 1)
        points.append(((nonint, max((abs(e) for e in exps), default=0), len(points)), exps, A))
    points.sort(key=lambda t: t[0])
    out = []
    for _, exps, A in points[:limit]:
        exp = _exp_from(fields, triple, A, B)
        n0q0 = {i: Poly() for i in fields}
        out.append((exp, CofactorBalance({j: e for j, e in enumerate(exps)}, n0q0)))
    return out


def _exp_from(fields, triple, A: Poly, B: Poly) -> ExpPart:
    if A.is_zero():
        return trivial_exp_part(triple)
    g = gcd_poly(A, B)
    A2, B2r = exact_div(A, g), exact_div(B, g)
    Pi = {}
    for i, X in fields.items():
        Pi[i] = exact_div(B2r * X(A2) - A2 * X(B2r), B2r * B2r)
    return ExpPart(A2, B2r, Pi)


# --------------------------------------------------------------------------
# recovery of the unknown Darboux polynomial


DEFAULT_N0_TRIALS = (-1, 1, -2, 2, Fraction(-1, 2), Fraction(1, 2), -3, 3, Fraction(-1, 3), Fraction(1, 3), -4, 4)


@dataclass
class RecoveryStats:
    blocks: int = 0
    rank_checks: int = 0
    exact_solves: int = 0
    skipped_blocks: int = 0
    budget_hits: int = 0


def recover_dp(
    triple: STriple,
    balance: CofactorBalance,
    deg_p0: int = 48,
    n0_trials: Sequence = DEFAULT_N0_TRIALS,
    fields: Sequence[int] = (1, 2, 3),
    coprime_to: Sequence[Poly] = (),
    max_unknowns: int = 1500,
    stats: Optional[RecoveryStats] = None,
    deadline: Optional[float] = None,
) -> Tuple[Poly, Fraction]:
    """Find ``p0`` and ``n0`` with ``X_i(p0) = (n0q0_i / n0) p0`` for the chosen fields.

    The result has minimal total degree; ties go to the earlier ``n0`` trial.
    ``coprime_to`` rejects candidates sharing a factor with known polynomials.
    Raises :class:`NoSolution` when nothing is found within the caps or
    before ``deadline`` (a ``time.monotonic()`` value).
    """
    stats = stats if stats is not None else RecoveryStats()
    all_fields = triple_fields(triple)
    use = {i: all_fields[i] for i in fields if i in all_fields}
    if not use:
        raise NoSolution("no usable fields")
    targets = {i: balance.n0q0.get(i, Poly()) for i in use}
    if all(t.is_zero() for t in targets.values()):
        raise NoSolution("all n0*q0 vanish; no unknown Darboux polynomial to recover")
    grads = gradings(use, targets)
    # when some n0q0_i is not homogeneous for a grading, gradings() already dropped it
    blocks = _blocks_upto(grads, deg_p0, max_unknowns)
    images: Dict[Tuple[int, tuple], Poly] = {}

    def image(i, m):
        key = (i, m)
        img = images.get(key)
        if img is None:
            img = images[key] = use[i](Poly.monomial(m))
        return img

    indicial = _IndicialFilter(use, targets)
    best = None  # (degree, trial index, block key, poly, n0)
    for key, mons in blocks:
        if deadline is not None and time.monotonic() > deadline:
            stats.budget_hits += 1
            break
        low = min(sum(m) for m in mons)
        if best is not None and low > best[0]:
            continue
        # degree-truncated prefixes: kernels are nested, so the first deficient prefix gives minimal degree
        mons = sorted(mons, key=grlex_key)
        cuts = []
        for k in range(1, len(mons) + 1):
            if k == len(mons) or sum(mons[k]) != sum(mons[k - 1]):
                cuts.append(k)
        usable = [c for c in cuts if c <= max_unknowns]
        if len(usable) < len(cuts):
            stats.skipped_blocks += 1
        if not usable:
            continue
        trials = [(ti, Fraction(n0)) for ti, n0 in enumerate(n0_trials) if indicial.viable(mons[: usable[-1]], Fraction(n0))]
        if not trials:
            continue
        stats.blocks += 1
        system = _BlockSystem(use, targets, mons[: usable[-1]], image)
        for ti, n0 in trials:
            if best is not None and (low, ti) > best[:2]:
                break
            if best is not None:
                usable = [c for c in usable if sum(mons[c - 1]) <= best[0]]
                if not usable:
                    break

            def deficient(c):
                stats.rank_checks += 1
                return not _full_rank_mod_p(system.rows(n0, c), c)

            if not deficient(usable[-1]):
                continue
            lo, hi = 0, len(usable) - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if deficient(usable[mid]):
                    hi = mid
                else:
                    lo = mid + 1
            for c in usable[lo:]:
                if deadline is not None and time.monotonic() > deadline:
                    stats.budget_hits += 1
                    break
                stats.exact_solves += 1
                cand = _min_degree_kernel(system.rows(n0, c), mons[:c], coprime_to)
                if cand is None:
                    continue
                entry = (cand.degree(), ti, key, cand, n0)
                if best is None or entry[:3] < best[:3]:
                    best = entry
                break
    if best is None:
        raise NoSolution("no Darboux polynomial with the balanced cofactor within the degree cap")
    return best[3], _norm(best[4])


class _IndicialFilter:
    """Necessary conditions on the extreme monomials of a Darboux polynomial.

    For a generic weight ``lam`` let ``m`` be the lam-largest monomial of ``p``.
    The lam-top term of ``X(p)`` sits at ``m + s`` (``s`` the top shift of ``X``)
    with coefficient ``kappa . m``; comparing with the top term of ``q p`` gives a
    linear condition on ``m`` that can be checked without any linear algebra.
    """

    WEIGHTS = [(10**6, 10**3, 1), (10**6, 1, 10**3), (10**3, 10**6, 1), (1, 10**6, 10**3), (10**3, 1, 10**6), (1, 10**3, 10**6)]

    def __init__(self, fields: Mapping[int, VField], targets: Mapping[int, Poly]):
        self.rules = []  # per direction: list of (kappa, top shift weight, target lead weight, target coeff)
        for base in self.WEIGHTS:
            for sign in (1, -1):
                lam = tuple(sign * w for w in base)
                per_field = []
                for i, X in fields.items():
                    terms: Dict[tuple, List[Fraction]] = {}
                    for u, c in enumerate(X.coefficients):
                        for t, coef in c.terms.items():
                            sh = tuple(t[k] - (1 if k == u else 0) for k in range(3))
                            vec = terms.setdefault(sh, [0, 0, 0])
                            vec[u] += coef
                    top = max(terms, key=lambda sh: _dot(lam, sh))
                    kappa = tuple(terms[top])
                    q = targets[i]
                    if q.is_zero():
                        lead = None
                    else:
                        lm = max(q.terms, key=lambda t: _dot(lam, t))
                        lead = (_dot(lam, lm) - _dot(lam, top), q.terms[lm])
                    per_field.append((kappa, lead))
                self.rules.append((lam, per_field))

    def viable(self, mons: Sequence[tuple], n0: Fraction) -> bool:
        for lam, per_field in self.rules:
            ok = False
            for m in mons:
                good = True
                for kappa, lead in per_field:
                    val = kappa[0] * m[0] + kappa[1] * m[1] + kappa[2] * m[2]
                    if lead is None or lead[0] < 0:
                        need = 0
                    elif lead[0] == 0:
                        need = Fraction(lead[1]) / n0
                    else:
                        return False
                    if val != need:
                        good = False
                        break
                if good:
                    ok = True
                    break
            if not ok:
                return False
        return True


def _dot(a, b) -> int:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _blocks_upto(grads, degree: int, max_unknowns: int):
    blocks: Dict[tuple, List[tuple]] = {}
    for d in range(0, degree + 1):
        for i in range(d, -1, -1):
            for j in range(d - i, -1, -1):
                m = (i, j, d - i - j)
                blocks.setdefault(_block_key(m, grads), []).append(m)
    keys = sorted(blocks, key=lambda k: (min(sum(m) for m in blocks[k]), len(blocks[k]), k))
    return [(k, blocks[k]) for k in keys]


class _BlockSystem:
    """Rows of ``n0 X_i(p) - (n0 q0_i) p = 0`` over the first ``c`` monomials of a block."""

    def __init__(self, fields, targets, mons, image):
        self.xrows: Dict[tuple, Dict[int, object]] = {}
        self.qrows: Dict[tuple, Dict[int, object]] = {}
        for i in sorted(fields):
            t = targets[i]
            for k, m in enumerate(mons):
                for mono, c in image(i, m).terms.items():
                    row = self.xrows.setdefault((i, mono), {})
                    row[k] = row.get(k, 0) + c
                for mono, c in t.terms.items():
                    mm = (mono[0] + m[0], mono[1] + m[1], mono[2] + m[2])
                    row = self.qrows.setdefault((i, mm), {})
                    row[k] = row.get(k, 0) + c
        self.keys = sorted(set(self.xrows) | set(self.qrows), key=lambda r: (r[0], grlex_key(r[1])))

    def rows(self, n0: Fraction, ncols: int) -> List[Dict[int, object]]:
        r, s = n0.numerator, n0.denominator
        out = []
        for rk in self.keys:
            row = {}
            for k, v in self.xrows.get(rk, {}).items():
                if k < ncols:
                    row[k] = r * v
            for k, v in self.qrows.get(rk, {}).items():
                if k < ncols:
                    row[k] = row.get(k, 0) - s * v
            row = {k: v for k, v in row.items() if v}
            if row:
                out.append(row)
        return out


def _full_rank_mod_p(rows: List[Dict[int, object]], ncols: int, prime: int = DEFAULT_PRIME) -> bool:
    ech = _Echelon(prime)
    for row in sorted(rows, key=len):
        r = {}
        for k, v in row.items():
            if isinstance(v, Fraction):
                v = v.numerator * pow(v.denominator, -1, prime)
            v %= prime
            if v:
                r[k] = v
        if r:
            ech.add(r)
            if len(ech.order) == ncols:
                return True
    return False


def _min_degree_kernel(rows, mons, coprime_to) -> Optional[Poly]:
    unknowns = list(range(len(mons)))
    sys = LinearSystem(unknowns, [(row, 0) for row in rows])
    basis = solve_linear(sys).basis
    cands = []
    for vec in basis:
        p = Poly({mons[k]: v for k, v in vec.items() if v})
        if p.is_zero() or p.is_constant():
            continue
        cands.append(p.primitive())
    cands.sort(key=lambda p: (p.degree(), len(p), str(p)))
    for p in cands:
        if all(gcd_poly(p, c).is_constant() for c in coprime_to):
            return p
    return None
