"""Exact multivariate polynomials over Q and a parser for their ASCII form.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?          exponent must be a nonnegative integer
    atom   := integer | integer '/' integer | variable | '(' expr ')'
    variable := 't' | 'x' digits

``a/b`` is only accepted between integer literals, so the grammar stays
polynomial.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ParseError
from .padic import PadicNumber, embed_rational
from .series import MultiSeries, PadicSeries, TailCertificate

_TOKEN = re.compile(r"\s*(?:(\d+)|(t|x\d+)|(.))")


class Poly:
    """Polynomial in ``nvars`` variables with Fraction coefficients (immutable)."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        clean = {}
        for e, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[tuple(e)] = c
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def const(cls, nvars: int, c) -> Poly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> Poly:
        return cls(nvars, {tuple(1 if j == i else 0 for j in range(nvars)): 1})

    # -- structure ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=0)

    def coeff(self, e) -> Fraction:
        return self.terms.get(tuple(e), Fraction(0))

    def denominators(self) -> list[int]:
        return [c.denominator for c in self.terms.values()]

    def univariate_coeffs(self) -> list[Fraction]:
        """Coefficient list for a one-variable polynomial."""
        if self.nvars != 1:
            raise ValueError("not univariate")
        out = [Fraction(0)] * (self.degree() + 1)
        for (k,), c in self.terms.items():
            out[k] = c
        return out

    def __eq__(self, other):
        return isinstance(other, Poly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, tuple(sorted(self.terms.items()))))

    # -- arithmetic ---------------------------------------------------------
    def _lift(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return Poly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Poly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def derivative(self, i: int = 0) -> Poly:
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                terms[tuple(e2)] = c * e[i]
        return Poly(self.nvars, terms)

    def substitute(self, polys: Sequence[Poly]) -> Poly:
        """Compose: replace variable i by ``polys[i]``."""
        nv = polys[0].nvars
        out = Poly(nv)
        cache: dict = {}
        for e, c in self.terms.items():
            term = Poly.const(nv, c)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in cache:
                        cache[(i, k)] = polys[i] ** k
                    term = term * cache[(i, k)]
            out = out + term
        return out

    # -- evaluation ---------------------------------------------------------
    def __call__(self, *point):
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        """Exact value at a point of Fractions/ints (or any ring supporting + * **)."""
        acc = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            acc = acc + term
        return acc

    def evaluate_padic(self, point: Sequence[PadicNumber], N: int) -> PadicNumber:
        p = point[0].p
        acc = PadicNumber.exact_zero(p)
        for e, c in self.terms.items():
            term = embed_rational(c, p, N)
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            acc = acc + term
        return acc

    def evaluate_mod(self, point: Sequence[int], m: int) -> int:
        """Value modulo m; every denominator must be invertible mod m."""
        acc = 0
        for e, c in self.terms.items():
            term = c.numerator * pow(c.denominator, -1, m) % m
            for x, k in zip(point, e):
                if k:
                    term = term * pow(x, k, m) % m
            acc += term
        return acc % m

    # -- conversions ----------------------------------------------------------
    def to_multiseries(self, p: int, N: int) -> MultiSeries:
        coeffs = {e: embed_rational(c, p, N) for e, c in self.terms.items()}
        return MultiSeries(p, self.nvars, coeffs, max(self.degree(), 0), TailCertificate.zero())

    def to_series(self, p: int, N: int) -> PadicSeries:
        return PadicSeries(p, [embed_rational(c, p, N) for c in self.univariate_coeffs()], TailCertificate.zero())

    def to_sympy(self, symbols):
        import sympy

        return sympy.Add(*[
            sympy.Rational(c.numerator, c.denominator) * sympy.Mul(*[s**k for s, k in zip(symbols, e)])
            for e, c in self.terms.items()
        ])

    def format(self, names: Sequence[str] | None = None) -> str:
        """Deterministic ASCII rendering, re-parseable by :func:`parse_poly`."""
        if names is None:
            names = ["t"] if self.nvars == 1 else [f"x{i}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            a = abs(c)
            cs = str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
            if mono:
                body = mono if a == 1 else f"{cs}*{mono}"
            else:
                body = cs
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"Poly({self.format()!r})"


class _Parser:
    def __init__(self, text: str, nvars: int | None, allow_t: bool):
        self.text = text
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ParseError(f"cannot tokenize at position {pos}")
            if m.group(1):
                self.toks.append(("int", int(m.group(1)), m.start(1)))
            elif m.group(2):
                self.toks.append(("var", m.group(2), m.start(2)))
            else:
                ch = m.group(3)
                if ch not in "+-*/^()":
                    raise ParseError(f"unexpected character {ch!r} at position {m.start(3)}")
                self.toks.append((ch, ch, m.start(3)))
            pos = m.end()
        self.i = 0
        self.nvars = nvars
        self.allow_t = allow_t
        self.max_index = -1

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, kind=None):
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of input")
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r} at position {tok[2]}, found {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            raise ParseError("empty polynomial")
        node = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input at position {self.toks[self.i][2]}")
        return node

    # nodes are callables nvars -> Poly so the variable count can be fixed late
    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            node = (lambda a, b, op: (lambda n: a(n) + b(n) if op == "+" else a(n) - b(n)))(node, rhs, op)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == "*":
            self.take()
            rhs = self.unary()
            node = (lambda a, b: (lambda n: a(n) * b(n)))(node, rhs)
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            inner = self.unary()
            return lambda n: -inner(n)
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            tok = self.take("int")
            k = tok[1]
            return lambda n: base(n) ** k
        return base

    def atom(self):
        kind = self.peek()
        if kind == "int":
            a = self.take()[1]
            if self.peek() == "/":
                self.take()
                b = self.take("int")[1]
                if b == 0:
                    raise ParseError("zero denominator")
                q = Fraction(a, b)
            else:
                q = Fraction(a)
            return lambda n: Poly.const(n, q)
        if kind == "var":
            name = self.take()[1]
            if name == "t":
                if not self.allow_t:
                    raise ParseError("variable 't' not allowed here")
                idx = 0
            else:
                idx = int(name[1:])
                if self.nvars is not None and idx >= self.nvars:
                    raise ParseError(f"variable {name} out of range for {self.nvars} variables")
            self.max_index = max(self.max_index, idx)
            return lambda n: Poly.var(n, idx)
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        tok = self.toks[self.i] if self.i < len(self.toks) else None
        raise ParseError("unexpected end of input" if tok is None else f"unexpected {tok[1]!r} at position {tok[2]}")


def parse_poly(text: str, nvars: int | None = None, allow_t: bool = True) -> Poly:
    """Parse a polynomial; ``nvars`` defaults to the highest variable index + 1."""
    if not isinstance(text, str):
        raise ParseError("polynomial must be a string")
    parser = _Parser(text, nvars, allow_t)
    node = parser.parse()
    n = nvars if nvars is not None else max(parser.max_index + 1, 1)
    return node(n)


def parse_map(texts: Iterable[str]) -> list[Poly]:
    """Coordinate maps f_i(t), each univariate in t."""
    out = []
    for s in texts:
        P = _Parser(s, 1, True)
        node = P.parse()
        if any(tok[0] == "var" and tok[1] != "t" for tok in P.toks):
            raise ParseError(f"map {s!r} must use only the variable t")
        out.append(node(1))
    return out


def parse_rational(x) -> Fraction:
    if isinstance(x, bool):
        raise ParseError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {x!r}") from exc
    raise ParseError(f"not a rational: {x!r}")
