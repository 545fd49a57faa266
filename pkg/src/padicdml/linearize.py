"""Conjugacies h with f(h(x)) = h(A x) near a fixed point at the origin.

Writing ``f(y) = A y + f2(y)`` with A diagonal, ``diag(lam)``, the degree-n
part of the identity reads, for every multi-index e with ``|e| = n``,

    h_{i,e} * (lam^e - lam_i) = [f2_i(h)]_e

and the right-hand side only involves coefficients of h of degree < n.  The
products ``h^e`` are expanded layer by layer and memoised so each monomial of
f2 costs one truncated product.

Attracting radius.  Suppose ``A = lam*I`` with ``a = v(lam) > 0`` and
``v(b_e) >= -s(|e| - 1)`` for the nonlinear coefficients of f, ``s >= 0``.
With ``c = a + s`` induction on the degree gives ``v(h_e) >= -c(|e| - 1)``:
a product of k >= 2 factors of total degree n has valuation at least
``-c(n - k)``, the coefficient adds ``-s(k - 1)``, the divisor ``-a``, and
``c(k - 1) >= s(k - 1) + a``.  So h converges on ``v(x) > c``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    MultiplicativeRelationFound,
    NonUnitEigenvalue,
    NotHomothety,
    UnsupportedRegime,
    ZeroMultiplier,
)
from .padic import INFINITY, PadicNumber, embed_rational
from .series import MultiSeries, TailCertificate


def _unit(g: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(g))


def _monomials(g: int, n: int):
    """Exponent vectors of total degree n, in a fixed order."""
    if g == 1:
        yield (n,)
        return
    for k in range(n, -1, -1):
        for rest in _monomials(g - 1, n - k):
            yield (k,) + rest


@dataclass
class LocalMap:
    """A germ ``f`` fixing the origin, with its linear part ``A``."""

    g: int
    f: list  # MultiSeries per component
    A: list  # g x g PadicNumber matrix

    @classmethod
    def from_series(cls, f: list) -> LocalMap:
        g = f[0].g
        for comp in f:
            c0 = comp[(0,) * g]
            if not c0.is_zero():
                raise ValueError("the map does not fix the origin")
        A = [comp.linear_part() for comp in f]
        return cls(g, f, A)

    @property
    def p(self) -> int:
        return self.f[0].p

    def is_diagonal(self) -> bool:
        return all(self.A[i][j].is_zero() for i in range(self.g) for j in range(self.g) if i != j)

    def eigenvalues(self) -> list:
        return [self.A[i][i] for i in range(self.g)]


@dataclass
class SmallDivisorReport:
    checked_degree: int
    min_divisor_valuation: Fraction | float
    witnesses: list = field(default_factory=list)  # (e, i, v(lam^e - lam_i))

    def to_json(self):
        return {
            "checked_degree": self.checked_degree,
            "min_divisor_valuation": None if self.min_divisor_valuation == INFINITY else str(self.min_divisor_valuation),
            "witnesses": [{"e": list(e), "i": i, "v": str(v)} for e, i, v in self.witnesses],
        }


@dataclass
class Conjugacy:
    """``h`` with ``Dh(0) = Id``; valid on ``v_p(x) > radius_val`` (radius ``p^-radius_val``)."""

    h: list
    radius_val: Fraction
    regime: str
    certificate: str
    multiplier: list = field(default_factory=list)

    @property
    def g(self) -> int:
        return len(self.h)

    @property
    def p(self) -> int:
        return self.h[0].p

    @property
    def degree(self) -> int:
        return self.h[0].degree

    def radius(self):
        if self.radius_val == -INFINITY:
            return INFINITY
        return Fraction(self.p) ** (-self.radius_val)

    def in_domain(self, x: list) -> bool:
        return all(xi.is_exact_zero() or xi.valuation_lower_bound() > self.radius_val for xi in x)

    def evaluate(self, x: list) -> list:
        return [hi.evaluate(x) for hi in self.h]

    def invert(self, y: list, iterations: int = 400) -> list:
        """Solve h(x) = y for x in the domain by the contraction x <- y - (h(x) - x)."""
        x = list(y)
        for _ in range(iterations):
            hx = self.evaluate(x)
            new = [yi - (hi - xi) for yi, hi, xi in zip(y, hx, x)]
            if all(a.agrees_with(b) for a, b in zip(new, x)):
                return new
            x = new
        return x

    def to_json(self) -> dict:
        return {
            "regime": self.regime,
            "certificate": self.certificate,
            "radius": {"p": self.p, "exponent": "inf" if self.radius_val == -INFINITY else str(-self.radius_val)},
            "h": [hi.to_json() for hi in self.h],
        }


class _Layers:
    """Degree layers of products ``h^e``, filled in as h is solved."""

    def __init__(self, g: int, p: int):
        self.g = g
        self.p = p
        self.h = [dict() for _ in range(g)]  # per component: {degree: {e: coeff}}
        self.memo: dict = {}

    def h_layer(self, i: int, n: int) -> dict:
        return self.h[i].get(n, {})

    def layer(self, e: tuple, n: int) -> dict:
        """Degree-n part of ``h^e``; needs every h layer below ``n - |e| + 2``."""
        key = (e, n)
        if key in self.memo:
            return self.memo[key]
        k = sum(e)
        if n < k:
            return {}
        if k == 1:
            i = e.index(1)
            return self.h_layer(i, n)
        i = max(j for j in range(self.g) if e[j])
        prev = tuple(x - (j == i) for j, x in enumerate(e))
        out: dict = {}
        for m in range(k - 1, n):
            A = self.layer(prev, m)
            B = self.h_layer(i, n - m)
            if not A or not B:
                continue
            for e1, c1 in A.items():
                for e2, c2 in B.items():
                    ee = tuple(a + b for a, b in zip(e1, e2))
                    v = c1 * c2
                    out[ee] = out[ee] + v if ee in out else v
        self.memo[key] = out
        return out


def _nonlinear_terms(m: LocalMap, D: int) -> list:
    terms = []
    for i, comp in enumerate(m.f):
        if not comp.is_polynomial and D > comp.degree:
            raise ValueError("map known only through degree %d" % comp.degree)
        terms.append([(e, c) for e, c in sorted(comp.coeffs.items()) if sum(e) >= 2 and sum(e) <= D])
    return terms


def _solve(m: LocalMap, D: int, lam: list, check=None) -> list:
    g, p = m.g, m.p
    N = max(x.prec for x in lam)
    one = embed_rational(1, p, N)
    L = _Layers(g, p)
    for i in range(g):
        L.h[i][1] = {_unit(g, i): one}
    terms = _nonlinear_terms(m, D)
    powcache: dict = {}

    def lam_pow(e):
        if e not in powcache:
            acc = one
            for x, k in zip(lam, e):
                if k:
                    acc = acc * x**k
            powcache[e] = acc
        return powcache[e]

    for n in range(2, D + 1):
        for i in range(g):
            rhs: dict = {}
            for e, b in terms[i]:
                if sum(e) > n:
                    continue
                for ee, c in L.layer(e, n).items():
                    v = b * c
                    rhs[ee] = rhs[ee] + v if ee in rhs else v
            layer = {}
            for ee, r in rhs.items():
                div = lam_pow(ee) - lam[i]
                if check is not None:
                    check(ee, i, div)
                layer[ee] = r / div
            L.h[i][n] = layer
    h = []
    for i in range(g):
        coeffs = {}
        for n, layer in L.h[i].items():
            coeffs.update(layer)
        h.append(coeffs)
    return h


def _linear_germ(m: LocalMap) -> bool:
    return all(comp.is_polynomial and all(sum(e) <= 1 for e in comp.coeffs) for comp in m.f)


def _identity(m: LocalMap) -> list:
    return [MultiSeries.coordinate(m.p, m.g, i) for i in range(m.g)]


def _homothety(m: LocalMap) -> PadicNumber:
    lam = m.A[0][0]
    for i in range(m.g):
        for j in range(m.g):
            x = m.A[i][j]
            if i == j:
                if not x.agrees_with(lam):
                    raise NotHomothety("diagonal entries differ")
            elif not x.is_zero():
                raise NotHomothety("linear part has off-diagonal entries")
    return lam


def linearize_attracting(m: LocalMap, D: int = 12) -> Conjugacy:
    lam = _homothety(m)
    if lam.is_zero():
        raise ZeroMultiplier("multiplier vanishes")
    a = lam.valuation()
    if a <= 0:
        raise UnsupportedRegime(f"|lam|_p = p^{-a} is not < 1")
    if _linear_germ(m):
        return Conjugacy(_identity(m), -INFINITY, "attracting-homothety", "rigorous", [lam] * m.g)

    def check(e, i, div):
        if div.is_zero() or div.valuation() != a:
            raise AssertionError(f"divisor lam^{sum(e)} - lam has unexpected valuation")

    coeffs = _solve(m, D, [lam] * m.g, check)
    s = Fraction(0)
    for comp in m.f:
        for e, c in comp.coeffs.items():
            k = sum(e)
            if k >= 2 and not c.is_zero():
                s = max(s, Fraction(-c.valuation(), k - 1))
    c = a + s
    tail = TailCertificate(c, -c)
    h = [MultiSeries(m.p, m.g, co, D, tail) for co in coeffs]
    for i, hi in enumerate(h):
        lp = hi.linear_part()
        assert all((x.agrees_with(1) if j == i else x.is_zero()) for j, x in enumerate(lp)), "Dh(0) != Id"
        for e, co in hi.coeffs.items():
            if not co.is_zero():
                assert co.valuation() >= c - c * sum(e), "coefficient violates the radius bound"
    return Conjugacy(h, c, "attracting-homothety", "rigorous", [lam] * m.g)


def small_divisor_report(lam: list, E_max: int) -> SmallDivisorReport:
    g = len(lam)
    p = lam[0].p
    one = embed_rational(1, p, max(x.prec for x in lam))
    vmin = INFINITY
    witnesses = []
    for n in range(2, E_max + 1):
        for e in _monomials(g, n):
            pw = one
            for x, k in zip(lam, e):
                if k:
                    pw = pw * x**k
            for i in range(g):
                div = pw - lam[i]
                if div.is_zero():
                    raise MultiplicativeRelationFound(
                        f"lam^{list(e)} = lam_{i} to precision {div.abs_prec}", witness=(e, i)
                    )
                v = div.valuation()
                if v > 0:
                    witnesses.append((e, i, Fraction(v)))
                vmin = min(vmin, v)
    witnesses.sort(key=lambda t: (-t[2], t[0], t[1]))
    return SmallDivisorReport(E_max, Fraction(vmin) if vmin != INFINITY else INFINITY, witnesses[:20])


def linearize_indifferent(m: LocalMap, E_max: int = 10, D: int = 12):
    """Conjugacy for a diagonal unit linear part; the radius is an estimate."""
    if not m.is_diagonal():
        raise UnsupportedRegime("linear part must be diagonal in the given coordinates")
    lam = m.eigenvalues()
    for x in lam:
        if x.is_zero() or x.valuation() != 0:
            raise NonUnitEigenvalue(f"eigenvalue {x!r} is not a unit")
    if _linear_germ(m):
        # h = id conjugates a linear germ whatever the multiplicative relations
        return Conjugacy(_identity(m), -INFINITY, "indifferent-diagonal", "rigorous", lam), SmallDivisorReport(0, INFINITY)
    report = small_divisor_report(lam, max(E_max, D))
    coeffs = _solve(m, D, lam)
    # observed growth v(h_e) >= -c(|e| - 1), with a margin of one digit
    c = Fraction(0)
    for co in coeffs:
        for e, x in co.items():
            k = sum(e)
            if k >= 2 and not x.is_zero():
                c = max(c, Fraction(-x.valuation(), k - 1))
    c += 1
    tail = TailCertificate(c, -c)
    h = [MultiSeries(m.p, m.g, co, D, tail) for co in coeffs]
    return Conjugacy(h, c, "indifferent-diagonal", "heuristic", lam), report


@dataclass
class ResidualReport:
    degree: int
    min_valuation: Fraction | float  # lower bound over coefficients of f(h) - h(Ax)
    worst: tuple | None
    passes: bool

    def to_json(self):
        return {
            "degree": self.degree,
            "min_valuation": None if self.min_valuation == INFINITY else str(self.min_valuation),
            "passes": self.passes,
        }


def compose_maps(f: list, h: list, D: int) -> list:
    """Truncated composition ``f(h(x))`` of polynomial maps given as MultiSeries."""
    g = h[0].g
    p = h[0].p
    powers: dict = {}

    def power(e):
        if e in powers:
            return powers[e]
        if sum(e) == 0:
            res = MultiSeries(p, g, {(0,) * g: embed_rational(1, p)}, 0, TailCertificate.zero())
        else:
            i = max(j for j in range(len(e)) if e[j])
            prev = tuple(x - (j == i) for j, x in enumerate(e))
            res = power(prev).mul(h[i], D)
        powers[e] = res
        return res

    out = []
    for comp in f:
        acc: dict = {}
        for e, c in sorted(comp.coeffs.items()):
            if sum(e) > D:
                continue
            for ee, x in power(e).coeffs.items():
                v = c * x
                acc[ee] = acc[ee] + v if ee in acc else v
        out.append(MultiSeries(p, g, acc, D, None))
    return out


def verify_conjugacy(m: LocalMap, c: Conjugacy, D: int | None = None, threshold: int | None = None) -> ResidualReport:
    """Coefficients of ``f(h(x)) - h(Ax)`` through degree D.

    Passes when every coefficient is zero to its precision and that precision
    reaches ``threshold`` (when given).
    """
    if D is None:
        D = c.degree
    g, p = m.g, m.p
    lhs = compose_maps(m.f, [hi.truncate(D) for hi in c.h], D)
    # h(Ax): substitute the linear map
    Ax = [MultiSeries(p, g, {_unit(g, j): m.A[i][j] for j in range(g) if not m.A[i][j].is_exact_zero()}, 1, TailCertificate.zero()) for i in range(g)]
    rhs = compose_maps([hi.truncate(D) for hi in c.h], Ax, D)
    vmin = INFINITY
    worst = None
    nonzero = False
    for i in range(g):
        keys = set(lhs[i].coeffs) | set(rhs[i].coeffs)
        for e in sorted(keys):
            if sum(e) > D:
                continue
            d = lhs[i][e] - rhs[i][e]
            if d.is_exact_zero():
                continue
            if not d.is_zero():
                nonzero = True
            b = d.valuation_lower_bound()
            if b < vmin:
                vmin, worst = b, (i, e)
    passes = not nonzero and (threshold is None or vmin >= threshold)
    return ResidualReport(D, vmin, worst, passes)
