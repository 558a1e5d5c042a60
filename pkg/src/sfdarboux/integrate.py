"""Integrating factor assembly, closed-form integration by linear ansatz, and
certification of first integrals."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import ONE, Poly, RatFn, _norm, exact_div, gcd_list, grlex_key, try_exact_div
from .darboux import ExpPart, _block_key, _monomials_box, coprime_basis, gradings, triple_fields
from .frontend import Ode2, format_expression, format_poly
from .sfunction import STriple, VField, associated_field
from .solver import Inconsistent, LinearPoly, LinearSystem, solve_linear


class IdentityFails(ValueError):
    def __init__(self, index: int, residual: RatFn):
        self.index = index
        self.residual = residual
        super().__init__(f"integrating-factor identity fails for field {index}: residual {residual}")


class AnsatzExhausted(ValueError):
    pass


def _xi_ratfn(X: VField, f: RatFn) -> RatFn:
    return X.apply_ratfn(f)


@dataclass(frozen=True)
class IntegratingFactor:
    """``R = e^{A/B} prod p_j^{n_j}``."""

    exp: ExpPart
    factors: Tuple[Tuple[Poly, Fraction], ...]

    @property
    def integer_exponents(self) -> bool:
        return all(Fraction(n).denominator == 1 for _, n in self.factors)

    def algebraic_part(self) -> Optional[RatFn]:
        """``prod p_j^{n_j}`` as a rational function (integer exponents only)."""
        if not self.integer_exponents:
            return None
        num, den = ONE, ONE
        for p, n in self.factors:
            n = int(n)
            if n > 0:
                num = num * p**n
            elif n < 0:
                den = den * p ** (-n)
        return RatFn(num, den)

    def log_derivative(self, X: VField) -> RatFn:
        """``X(R)/R`` via the logarithmic-derivative expansion."""
        out = RatFn(Poly())
        if not self.exp.A.is_zero():
            out = out + _xi_ratfn(X, RatFn(self.exp.A, self.exp.B))
        for p, n in self.factors:
            if n:
                q = try_exact_div(X(p), p)
                term = RatFn(q) if q is not None else RatFn(X(p), p)
                out = out + term * RatFn(Poly.const(n))
        return out

    def __str__(self):
        parts = []
        if not self.exp.A.is_zero():
            parts.append(f"exp({format_expression(RatFn(self.exp.A, self.exp.B))})")
        for p, n in self.factors:
            if not n:
                continue
            base = format_poly(p)
            if len(p.terms) > 1:
                base = f"({base})"
            parts.append(base if n == 1 else f"{base}^({_fmt_rat(n)})")
        return "*".join(parts) if parts else "1"


def _fmt_rat(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def assemble_R(exp: ExpPart, factors: Sequence[Tuple[Poly, object]], triple: STriple) -> IntegratingFactor:
    """Build ``R`` and certify ``X_i(R)/R = -div X_i`` exactly for every plane field."""
    R = IntegratingFactor(exp, tuple((p, _norm(Fraction(n))) for p, n in factors if n))
    for i, X in triple_fields(triple).items():
        res = R.log_derivative(X) + RatFn(X.divergence())
        if not res.is_zero():
            raise IdentityFails(i, res)
    return R


# --------------------------------------------------------------------------
# first integrals


@dataclass(frozen=True)
class Residual:
    """``rational + exp_coeff * e^W``; zero exactly when both parts vanish."""

    rational: RatFn
    exp_coeff: Optional[RatFn] = None

    @property
    def is_zero(self) -> bool:
        return self.rational.is_zero() and (self.exp_coeff is None or self.exp_coeff.is_zero())

    def __str__(self):
        if self.is_zero:
            return "0"
        s = format_expression(self.rational)
        if self.exp_coeff is not None and not self.exp_coeff.is_zero():
            s += f" + ({format_expression(self.exp_coeff)})*exp(W)"
        return s


@dataclass(frozen=True)
class FirstIntegralForm:
    """``J = rational_part + sum c_k ln(arg_k) + coeff e^W``."""

    rational_part: RatFn
    log_terms: Tuple[Tuple[Fraction, Poly], ...] = ()
    exp_term: Optional[Tuple[RatFn, RatFn]] = None

    def apply(self, X: VField) -> Residual:
        out = X.apply_ratfn(self.rational_part)
        for c, p in self.log_terms:
            q = try_exact_div(X(p), p)
            out = out + (RatFn(q) if q is not None else RatFn(X(p), p)) * RatFn(Poly.const(c))
        exp_coeff = None
        if self.exp_term is not None:
            W, coeff = self.exp_term
            exp_coeff = X.apply_ratfn(W) * coeff + X.apply_ratfn(coeff)
        return Residual(out, exp_coeff)

    def gradient(self) -> Tuple[Tuple[RatFn, ...], Optional[Tuple[RatFn, ...]]]:
        """Partial derivatives split into the rational part and the ``e^W`` coefficient."""
        rat = []
        ex = [] if self.exp_term is not None else None
        for v in range(3):
            g = self.rational_part.diff(v)
            for c, p in self.log_terms:
                d = p.diff(v)
                if not d.is_zero():
                    g = g + RatFn(d.scale(c), p)
            rat.append(g)
            if ex is not None:
                W, coeff = self.exp_term
                ex.append(W.diff(v) * coeff + coeff.diff(v))
        return tuple(rat), (tuple(ex) if ex is not None else None)

    @property
    def rational_logs(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c, _ in self.log_terms)

    def additive(self) -> str:
        parts = []
        if not self.rational_part.is_zero():
            parts.append(format_expression(self.rational_part))
        for c, p in self.log_terms:
            c = Fraction(c)
            mag = abs(c)
            body = f"ln({format_poly(p)})" if mag == 1 else f"{_fmt_rat(mag)}*ln({format_poly(p)})"
            parts.append(("- " if c < 0 else "+ ") + body)
        if self.exp_term is not None:
            W, coeff = self.exp_term
            parts.append(f"+ ({format_expression(coeff)})*exp({format_expression(W)})")
        if not parts:
            return "0"
        text = " ".join(parts)
        if text.startswith("+ "):
            text = text[2:]
        elif text.startswith("- "):
            text = "-" + text[2:]
        return text

    def exponential(self) -> Optional[str]:
        """``e^J`` as exp(rational) times powers, when that presentation applies."""
        if self.exp_term is not None or not self.rational_logs:
            return None
        parts = []
        if not self.rational_part.is_zero():
            parts.append(f"exp({format_expression(self.rational_part)})")
        for c, p in self.log_terms:
            base = format_poly(p)
            if len(p.terms) > 1:
                base = f"({base})"
            parts.append(base if c == 1 else f"{base}^({_fmt_rat(c)})")
        return "*".join(parts) if parts else "1"


def verify_first_integral(ode: Ode2, J: FirstIntegralForm) -> Residual:
    """``X(J)`` for the associated field, computed exactly."""
    return J.apply(associated_field(ode))


def _gradient_vector(J: FirstIntegralForm) -> Tuple[RatFn, ...]:
    rat, ex = J.gradient()
    if ex is None:
        return rat
    if all(r.is_zero() for r in rat):
        return ex  # e^W is a common nonzero factor
    raise ValueError("mixed additive/exponential forms have no rational gradient direction")


def gradients_parallel(J1: FirstIntegralForm, J2: FirstIntegralForm) -> bool:
    """``grad J1 x grad J2 == 0`` exactly."""
    a = _gradient_vector(J1)
    b = _gradient_vector(J2)
    for i, j in ((1, 2), (2, 0), (0, 1)):
        if not (a[i] * b[j] - a[j] * b[i]).is_zero():
            return False
    return True


def parse_first_integral(text: str) -> FirstIntegralForm:
    """Parse ``rational + c*ln(poly) - ln(poly) ...`` as printed by :meth:`FirstIntegralForm.additive`."""
    from .frontend import ParseError, parse_expression

    rest = []
    logs: List[Tuple[Fraction, Poly]] = []
    i, n = 0, len(text)
    depth = 0
    start = 0
    pieces = []
    # split at top-level + and - (not inside parentheses, not a leading sign)
    while i < n:
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and text[start:i].strip():
            prev = text[start:i].rstrip()
            if not prev.endswith(("*", "/", "^")):
                pieces.append(text[start:i])
                start = i
        i += 1
    pieces.append(text[start:])
    for piece in pieces:
        p = piece.strip()
        if "ln(" not in p:
            rest.append(p)
            continue
        sign = Fraction(1)
        if p[0] in "+-":
            sign = Fraction(-1) if p[0] == "-" else sign
            p = p[1:].strip()
        k = p.index("ln(")
        coeff_text = p[:k].rstrip()
        if coeff_text:
            if not coeff_text.endswith("*"):
                raise ParseError("expected '*' before ln", text.find(piece) + k, {"*"})
            coeff = parse_expression(coeff_text[:-1])
            if not isinstance(coeff, Poly) or not coeff.is_constant():
                raise ParseError("log coefficients must be rational constants", text.find(piece), {"number"})
            sign *= Fraction(coeff.constant_value())
        if not p.endswith(")"):
            raise ParseError("unbalanced ln(...)", text.find(piece) + len(piece), {")"})
        arg = parse_expression(p[k + 3 : -1])
        if not isinstance(arg, Poly) or arg.is_constant():
            raise ParseError("ln argument must be a nonconstant polynomial", text.find(piece) + k, {"polynomial"})
        logs.append((sign, arg))
    rational = RatFn(Poly())
    if rest:
        joined = " ".join(rest).strip()
        if joined.startswith("+"):
            joined = joined[1:]
        rational = RatFn.coerce(parse_expression(joined))
    return FirstIntegralForm(rational, tuple(logs))


# --------------------------------------------------------------------------
# integration by linear ansatz


def _multiplicity(p: Poly, b: Poly) -> Tuple[int, Poly]:
    k = 0
    while True:
        q = try_exact_div(p, b)
        if q is None:
            return k, p
        p = q
        k += 1


def _factor_exponents(R: IntegratingFactor) -> List[Tuple[Poly, Fraction]]:
    """Exponents of ``R`` over a coprime square-free basis of its factors."""
    basis = coprime_basis([p for p, _ in R.factors])
    out = []
    for b in basis:
        e = Fraction(0)
        for p, n in R.factors:
            k, _ = _multiplicity(p, b)
            e += k * Fraction(n)
        if e:
            out.append((b, e))
    return out


def _degc_ladder(triple: STriple, cap: Optional[int], start: Optional[int] = None) -> List[int]:
    first = start if start is not None else max(t.degree() for t in triple.as_tuple() if not t.is_zero())
    cap = cap if cap is not None else first + 4
    ladder = list(range(first, cap + 1, 2)) or [cap]
    if ladder[-1] != cap:
        ladder.append(cap)
    return ladder


def integrate_closed_form(
    R: IntegratingFactor,
    triple: STriple,
    degC: Optional[int] = None,
    degC_cap: Optional[int] = None,
    max_unknowns: int = 4000,
) -> FirstIntegralForm:
    """Integrate the exact form ``R (Q dx + P dy + N dz)`` by a linear ansatz.

    Without an exponential part the ansatz is ``C/D + sum c_k ln p_k`` with the
    log arguments running over a coprime basis of the factors of ``R``; with one
    it is ``e^{A/B} C/D``.  ``C`` has undetermined coefficients of total degree
    up to the current ladder value.  When neither fits (typically ``R`` is a
    power of a first integral over an inverse multiplier) the first integral
    ``R C`` with polynomial ``C`` is tried and returned through its logarithm.
    """
    ladder = [degC] if degC is not None else _degc_ladder(triple, degC_cap)
    grads = gradings(triple_fields(triple))
    last_error = None
    if R.integer_exponents:
        for d in ladder:
            try:
                if R.exp.A.is_zero():
                    J = _integrate_logs(R, triple, d, grads, max_unknowns)
                else:
                    J = _integrate_exp(R, triple, d, grads, max_unknowns)
            except (Inconsistent, AnsatzExhausted) as exc:
                last_error = exc
                continue
            if J is not None:
                return J
    if R.exp.A.is_zero():
        for d in range(0, ladder[-1] + 1):
            try:
                return _integrate_power(R, triple, d, max_unknowns)
            except (Inconsistent, AnsatzExhausted) as exc:
                last_error = exc
    raise AnsatzExhausted(f"no closed form within degree {ladder[-1]}: {last_error}")


def _rhs(R_alg: RatFn, triple: STriple) -> Tuple[RatFn, RatFn, RatFn]:
    return tuple(R_alg * RatFn(c) for c in triple.as_tuple())


def _c_ansatz(d: int, grads, weight: Optional[tuple], max_unknowns: int) -> Dict[tuple, tuple]:
    mons = _monomials_box([d] * 3, total=d)
    if weight is not None and grads:
        mons = [m for m in mons if _block_key(m, grads) == weight]
    if len(mons) > max_unknowns:
        raise AnsatzExhausted(f"ansatz with {len(mons)} unknowns exceeds the cap")
    return {m: ("C", m) for m in sorted(mons, key=grlex_key)}


def _homogeneous_weight(p: Poly, grads) -> Optional[tuple]:
    keys = {_block_key(m, grads) for m in p.terms}
    return keys.pop() if len(keys) == 1 else None


def _target_weight(grads, D: Poly, rhs) -> Optional[tuple]:
    """Weight of ``C`` when the gradient is weighted homogeneous of weight 0."""
    if not grads:
        return None
    wd = _homogeneous_weight(D, grads)
    if wd is None:
        return None
    for v, r in enumerate(rhs):
        if r.is_zero():
            continue
        wn = _homogeneous_weight(r.num, grads)
        wden = _homogeneous_weight(r.den, grads)
        if wn is None or wden is None:
            return None
        # d/dv lowers the weight by the weight of variable v
        want = tuple(-g[v] for g in grads)
        if tuple(a - b for a, b in zip(wn, wden)) != want:
            return None
    return wd


def _integrate_logs(R: IntegratingFactor, triple: STriple, d: int, grads, max_unknowns: int) -> Optional[FirstIntegralForm]:
    exps = _factor_exponents(R)
    try:
        return _log_ansatz(R, triple, d, grads, max_unknowns, exps, None)
    except Inconsistent:
        pass
    # a square-free class may hide factors with different log coefficients
    W = _log_ansatz(R, triple, d, grads, max_unknowns, exps, "residue")
    refined = _split_by_residues(W)
    if refined is None:
        raise AnsatzExhausted("log part does not split over rational residues")
    exps = [(b, e) for b, e in exps if e >= 0] + refined
    return _log_ansatz(R, triple, d, grads, max_unknowns, exps, None)


def _log_ansatz(R, triple, d, grads, max_unknowns, exps, mode):
    D = ONE
    logs: List[Poly] = []
    S = ONE
    for b, e in exps:
        if e < 0:
            k = int(-e) - 1
            if k:
                D = D * b**k
            logs.append(b)
            if e == -1:
                S = S * b
    R_alg = R.algebraic_part()
    rhs = _rhs(R_alg, triple)
    weight = _target_weight(grads, D, rhs)
    csyms = _c_ansatz(d, grads, weight, max_unknowns)
    lsyms = [("c", k) for k in range(len(logs))]
    H = D * D * S
    C = LinearPoly.ansatz(csyms)
    eqs = []
    Sall = ONE
    for b in logs:
        Sall = Sall * b
    wsyms = {}
    if mode == "residue":
        # the whole log part as an unknown closed form W/Sall; H is a multiple of Sall
        lsyms = []
        top = max(Sall.degree() - 1, 0)
        wS = _homogeneous_weight(Sall, grads) if grads else None
        for v in range(3):
            mons = _monomials_box([top] * 3, total=top)
            if wS is not None:
                want = tuple(a - g[v] for a, g in zip(wS, grads))
                mons = [m for m in mons if _block_key(m, grads) == want]
            wsyms[v] = {m: ("W", v, m) for m in mons}
    for v in range(3):
        lp = C.diff(v).times_poly(S * D)
        dD = D.diff(v)
        if not dD.is_zero():
            lp.add_inplace(C.times_poly(S * dD), -1)
        for k, b in enumerate(logs if mode is None else ()):
            db = b.diff(v)
            if not db.is_zero():
                lp.add_poly_times(db * exact_div(H, b), lsyms[k])
        if mode == "residue":
            lp.add_inplace(LinearPoly.ansatz(wsyms[v]).times_poly(exact_div(H, Sall)))
        r = rhs[v]
        if not r.is_zero():
            known = exact_div(H * r.num, r.den) if try_exact_div(H * r.num, r.den) is not None else None
            if known is None:
                raise AnsatzExhausted("denominator of R*(Q,P,N) not covered by the ansatz")
            lp.add_inplace(LinearPoly.known(known), -1)
        eqs.extend(lp.equations())
    unknowns = lsyms + [s for v in range(3) for s in wsyms.get(v, {}).values()] + list(csyms.values())
    sol = solve_linear(LinearSystem(unknowns, eqs))
    pt = sol.point()
    if mode == "residue":
        Wv = tuple(Poly({m: pt[s] for m, s in wsyms[v].items()}) for v in range(3))
        return [(b, e) for b, e in exps if e < 0], Sall, Wv
    Cp = Poly({m: pt[s] for m, s in csyms.items()})
    Cp = _normalize_constant(Cp, D)
    log_terms = [(_norm(Fraction(pt[lsyms[k]])), b) for k, b in enumerate(logs) if pt[lsyms[k]]]
    log_terms = tuple(sorted(log_terms, key=lambda t: (t[1].degree(), grlex_key(t[1].leading_monomial()), str(t[1]))))
    return FirstIntegralForm(RatFn(Cp, D), log_terms)


def _integrate_power(R: IntegratingFactor, triple: STriple, d: int, max_unknowns: int) -> FirstIntegralForm:
    """``J = R C``: solve ``L grad C + C sum n_j grad(p_j) L/p_j = L (Q, P, N)`` with ``L = prod p_j``."""
    exps = _factor_exponents(R)
    L = ONE
    for b, _ in exps:
        L = L * b
    csyms = _c_ansatz(d, None, None, max_unknowns)
    C = LinearPoly.ansatz(csyms)
    eqs = []
    for v, T in enumerate(triple.as_tuple()):
        lp = C.diff(v).times_poly(L)
        for b, e in exps:
            db = b.diff(v)
            if not db.is_zero():
                lp.add_inplace(C.times_poly((db * exact_div(L, b)).scale(e)))
        if not T.is_zero():
            lp.add_inplace(LinearPoly.known(L * T), -1)
        eqs.extend(lp.equations())
    sol = solve_linear(LinearSystem(list(csyms.values()), eqs))
    pt = sol.point()
    Cp = Poly({m: pt[s] for m, s in csyms.items() if pt[s]})
    if Cp.is_zero():
        raise AnsatzExhausted("power ansatz gives C = 0")
    # ln(R C) = sum n_j ln p_j + ln C, with the factors of C shared with p_j merged
    coeff = {b: e for b, e in exps}
    for b in list(coeff):
        k, Cp = _multiplicity(Cp, b)
        coeff[b] += k
    terms = [(e, b) for b, e in coeff.items() if e]
    if not Cp.is_constant():
        terms.append((Fraction(1), Cp.primitive()))
    if not terms:
        raise AnsatzExhausted("power ansatz gives a constant")
    terms = [(_norm(Fraction(e)), b) for e, b in terms]
    terms.sort(key=lambda t: (t[1].degree(), grlex_key(t[1].leading_monomial()), str(t[1])))
    return FirstIntegralForm(RatFn(Poly()), tuple(terms))


def _split_by_residues(data, tries: int = 3) -> Optional[List[Tuple[Poly, Fraction]]]:
    """Split log bases using the residues of ``W/S``.

    For an irreducible factor ``s`` of a base ``b`` with log coefficient ``c``,
    ``W - c grad(b) S/b`` vanishes modulo ``s``.  Candidate values of ``c`` are
    read off numerically at roots of ``b`` on a random line and each piece is
    then certified by an exact gcd.
    """
    bases, S, W = data
    rng = random.Random(20240917)
    out: List[Tuple[Poly, Fraction]] = []
    for b, e in bases:
        cof = exact_div(S, b)
        G = tuple(b.diff(v) * cof for v in range(3))
        remaining = b
        pieces: List[Tuple[Poly, Fraction]] = []
        for _ in range(tries):
            if remaining.is_constant():
                break
            for c in _residue_candidates(remaining, W, G, rng):
                if remaining.is_constant():
                    break
                diffs = [W[v] - G[v].scale(c) for v in range(3)]
                g = gcd_list([remaining] + [t for t in diffs if not t.is_zero()])
                if g.is_constant():
                    continue
                pieces.append((g.primitive(), c))
                remaining = exact_div(remaining, g)
        if not remaining.is_constant():
            return None
        out.extend((p, e) for p, _ in pieces)
    return out


def _residue_candidates(b: Poly, W, G, rng) -> List[Fraction]:
    v = max(range(3), key=lambda k: b.degree(k))
    for _ in range(6):
        point = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3)]
        line = [rng.randint(-3, 3) for _ in range(3)]
        line[v] = 1
        # b(point + t*line) as an exact univariate polynomial in t
        uni = _restrict_to_line(b, point, line)
        n = uni.degree()
        if n < 1:
            continue
        coeffs = [float(uni.coefficient((n - k, 0, 0))) for k in range(n + 1)]
        scale = max(abs(c) for c in coeffs)
        coeffs = np.array([c / scale for c in coeffs])
        roots = np.roots(coeffs)
        cands = []
        for r in roots:
            pt = [complex(point[k]) + r * line[k] for k in range(3)]
            num = sum(complex(_eval_c(W[k], pt)) * line[k] for k in range(3))
            den = sum(complex(_eval_c(G[k], pt)) * line[k] for k in range(3))
            if abs(den) < 1e-9:
                continue
            c = num / den
            if abs(c.imag) > 1e-4 * max(1.0, abs(c.real)):
                continue
            cands.append(Fraction(c.real).limit_denominator(1000))
        if cands:
            return sorted(set(cands), key=lambda c: (abs(c.denominator), abs(c), c))
    return []


def _restrict_to_line(p: Poly, point, line) -> Poly:
    T = Poly.var("x")
    subs = [Poly.const(point[k]) + T.scale(line[k]) for k in range(3)]
    powers = [{0: ONE} for _ in range(3)]
    out = Poly()
    for m, c in p.terms.items():
        term = Poly.const(c)
        for k in range(3):
            e = m[k]
            if e not in powers[k]:
                powers[k][e] = subs[k] ** e
            term = term * powers[k][e]
        out = out + term
    return out


def _eval_c(p: Poly, pt) -> complex:
    total = 0j
    for m, c in p.terms.items():
        total += float(c) * pt[0] ** m[0] * pt[1] ** m[1] * pt[2] ** m[2]
    return total


def _normalize_constant(C: Poly, D: Poly) -> Poly:
    # J is defined up to an additive constant: remove the multiple of D that
    # puts weight on D's leading monomial
    lm = D.leading_monomial()
    c = C.coefficient(lm)
    if c:
        C = C - D.scale(Fraction(c) / D.leading_coefficient())
    return C


def _integrate_exp(R: IntegratingFactor, triple: STriple, d: int, grads, max_unknowns: int) -> Optional[FirstIntegralForm]:
    A, B = R.exp.A, R.exp.B
    exps = _factor_exponents(R)
    R_alg = R.algebraic_part()
    rhs = _rhs(R_alg, triple)
    last = None
    # D ladder: every pole of R to order -n-1, then to order -n
    for shift in (1, 0):
        D = ONE
        for b, e in exps:
            if e < 0:
                k = int(-e) - shift
                if k > 0:
                    D = D * b**k
        csyms = _c_ansatz(d, grads, None, max_unknowns)
        C = LinearPoly.ansatz(csyms)
        # grad(A/B) C/D + grad(C/D) = rhs ; multiply by B^2 D^2 * den
        eqs = []
        ok = True
        for v in range(3):
            gW = RatFn(A, B).diff(v)  # num/den
            H = B * B * D * D
            r = rhs[v]
            lp = LinearPoly()
            # B^2 D^2 * gW * C / D = B^2 D * gW * C
            t = try_exact_div(B * B * D * gW.num, gW.den) if not gW.is_zero() else Poly()
            if t is None:
                ok = False
                break
            if not t.is_zero():
                lp.add_inplace(C.times_poly(t))
            lp.add_inplace(C.diff(v).times_poly(B * B * D))
            dD = D.diff(v)
            if not dD.is_zero():
                lp.add_inplace(C.times_poly(B * B * dD), -1)
            if not r.is_zero():
                known = try_exact_div(H * r.num, r.den)
                if known is None:
                    ok = False
                    break
                lp.add_inplace(LinearPoly.known(known), -1)
            eqs.extend(lp.equations())
        if not ok:
            continue
        try:
            sol = solve_linear(LinearSystem(list(csyms.values()), eqs))
        except Inconsistent as exc:
            last = exc
            continue
        pt = sol.point()
        Cp = Poly({m: pt[s] for m, s in csyms.items()})
        if Cp.is_zero():
            continue
        return FirstIntegralForm(RatFn(Poly()), (), (RatFn(A, B), RatFn(Cp, D)))
    raise AnsatzExhausted(f"exponential ansatz failed: {last}")
