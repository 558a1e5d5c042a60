"""Parsing and printing of polynomials, rational functions and rational 2ODEs.

Grammar (whitespace-insensitive, see ``docs/grammar.md``)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := atom ("^" INT)?
    atom    := INT | "x" | "y" | "z" | "(" expr ")"

Implicit multiplication is rejected, exponents are nonnegative integer literals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple, Union

from .algebra import ONE, VARS, DivisionByZero, Poly, RatFn

Expr = Union[Poly, RatFn]


class ParseError(ValueError):
    def __init__(self, message: str, position: int, expected=()):
        self.position = position
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at position {position}{detail}")


class DegenerateOde(ValueError):
    pass


_SINGLE = {"+", "-", "*", "/", "^", "(", ")"}


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
        elif ch in VARS:
            tokens.append(("var", ch, i))
            i += 1
        elif ch in _SINGLE:
            tokens.append((ch, ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", i, {"integer", "x", "y", "z", "(", "-"})
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    # values are carried as unreduced (num, den) pairs; reduction happens once at the end

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"unexpected {tok[1] or 'end of input'!r}", tok[2], {kind})
        return self.take()

    def parse(self):
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2], {"+", "-", "*", "/", "end of input"})
        return value

    def expr(self):
        n, d = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            n2, d2 = self.term()
            if d == d2:
                n = n + n2 if op == "+" else n - n2
            else:
                n, d = (n * d2 + n2 * d, d * d2) if op == "+" else (n * d2 - n2 * d, d * d2)
        return n, d

    def term(self):
        n, d = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.take()
            n2, d2 = self.unary()
            if op[0] == "*":
                n, d = n * n2, d * d2
            else:
                if n2.is_zero():
                    raise DivisionByZero(f"division by zero at position {op[2]}")
                n, d = n * d2, d * n2
        return n, d

    def unary(self):
        tok = self.peek()
        if tok[0] == "-":
            self.take()
            n, d = self.unary()
            return -n, d
        if tok[0] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        n, d = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "int":
                raise ParseError("exponent must be a nonnegative integer literal", tok[2], {"integer"})
            e = int(self.take()[1])
            n, d = n**e, d**e
            if self.peek()[0] == "^":
                raise ParseError("chained exponents are not allowed", self.peek()[2], {"*", "/", "+", "-"})
        return n, d

    def atom(self):
        tok = self.peek()
        if tok[0] == "int":
            self.take()
            return Poly.const(int(tok[1])), ONE
        if tok[0] == "var":
            self.take()
            return Poly.var(tok[1]), ONE
        if tok[0] == "(":
            self.take()
            value = self.expr()
            self.expect(")")
            return value
        raise ParseError(f"unexpected {tok[1] or 'end of input'!r}", tok[2], {"integer", "x", "y", "z", "(", "-", "+"})


def _parse_pair(text: str) -> Tuple[Poly, Poly]:
    return _Parser(text).parse()


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into a canonical :class:`Poly` (constant denominator) or :class:`RatFn`."""
    n, d = _parse_pair(text)
    if d.is_zero():
        raise DivisionByZero("division by zero")
    if d.is_constant():
        return n.scale(Fraction(1) / d.constant_value())
    r = RatFn(n, d)
    return r.num if r.den == ONE else r


@dataclass(frozen=True)
class Ode2:
    """The rational 2ODE ``z' = M0/N0`` with ``z = y'``; ``M0``/``N0`` coprime."""

    M0: Poly
    N0: Poly

    @property
    def phi(self) -> RatFn:
        return RatFn(self.M0, self.N0, _canonical=True)

    @classmethod
    def from_ratfn(cls, phi) -> "Ode2":
        phi = RatFn.coerce(phi)
        return cls(phi.num, phi.den)

    def __str__(self):
        return format_expression(self.phi)


def parse_ode2(text: str) -> Ode2:
    """Parse the right-hand side ``phi`` of ``z' = phi(x, y, z)``."""
    try:
        n, d = _parse_pair(text)
    except DivisionByZero as exc:
        raise DegenerateOde(str(exc)) from exc
    if d.is_zero():
        raise DegenerateOde("N0 is identically zero")
    return Ode2.from_ratfn(RatFn(n, d))


# printing -----------------------------------------------------------------

def _format_coeff(c) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _format_monomial(m) -> str:
    parts = []
    for name, e in zip(VARS, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    out = []
    for i, (m, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        mono = _format_monomial(m)
        if not mono:
            body = _format_coeff(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_format_coeff(a)}*{mono}"
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def _is_var_power(p: Poly) -> bool:
    if len(p.terms) != 1:
        return False
    (m, c), = p.terms.items()
    return c == 1 and sum(1 for e in m if e) == 1


def format_expression(value) -> str:
    """Deterministic canonical text; ``parse_expression(format_expression(v)) == v``."""
    if isinstance(value, (int, Fraction)):
        value = Poly.const(value)
    if isinstance(value, Poly):
        return format_poly(value)
    if isinstance(value, RatFn):
        if value.den == ONE:
            return format_poly(value.num)
        den = format_poly(value.den)
        if not _is_var_power(value.den):
            den = f"({den})"
        num = format_poly(value.num)
        if len(value.num.terms) > 1:
            num = f"({num})"
        return f"{num}/{den}"
    raise TypeError(f"cannot format {type(value).__name__}")
