"""Truncated power series over Q_p with certified geometric tails.

A :class:`PadicSeries` stores explicit coefficients ``c_0 .. c_D`` together
with an optional :class:`TailCertificate` ``(vB, vrho)`` asserting

    v_p(c_n) >= vB + n * vrho        for every n > D.

``vB = inf`` marks a polynomial (every omitted coefficient is exactly zero);
``tail=None`` marks a formal series about which nothing beyond degree D is
known.  Formal series may be multiplied and composed but cannot be evaluated.

Certificate bookkeeping
-----------------------
Every derivation below reduces to one lemma.  Write ``lb(c)`` for the
valuation lower bound of a coefficient.  For a slope ``r <= vrho`` the
constant

    K(r) = min( min_{n<=D} lb(c_n) - n r ,  vB + (D+1)(vrho - r) )

satisfies ``v(c_n) >= K(r) + n r`` for *all* n (see :meth:`PadicSeries.global_bound`).

* sum:      K_f(r), K_g(r) at the common r = min(vrho)  ->  (min K, r)
* product:  the Cauchy product of two such bounds gives (K_f + K_g, r)
* compose:  if ``v(g_k) >= delta + k sigma`` for all k then
            ``v([g^n]_k) >= n delta + k sigma``; when g(0) = 0 the factor
            ``g^n`` starts at degree n so only n <= k contributes.  Summing
            ``f_n g^n`` over n gives the bounds implemented in
            :func:`compose`; the sum over n > D_f converges iff
            ``vrho_f + delta > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    CompositionDiverges,
    IncompatiblePrime,
    OutsideConvergenceDisk,
    OutsideExpDomain,
    OutsideLogDomain,
)
from .padic import DEFAULT_PRECISION, INFINITY, PadicNumber, embed_rational, padic

DEFAULT_DEGREE = 32


def _ceil(x):
    return x if x == INFINITY or x == -INFINITY else math.ceil(x)


@dataclass(frozen=True)
class TailCertificate:
    """``v_p(c_n) >= vB + n*vrho`` for every n beyond the truncation degree."""

    vB: Fraction | float
    vrho: Fraction

    @classmethod
    def zero(cls) -> TailCertificate:
        return cls(INFINITY, Fraction(0))

    @property
    def is_zero(self) -> bool:
        return self.vB == INFINITY

    def bound(self, n: int):
        return self.vB if self.is_zero else self.vB + n * self.vrho

    def covers(self, vz) -> bool:
        """Whether the tail converges for every z with ``v_p(z) >= vz``."""
        return self.is_zero or self.vrho + vz > 0

    def check(self, coeffs: Sequence[PadicNumber], start: int) -> bool:
        """Validate the certificate against coefficients ``start, start+1, ...``."""
        for i, c in enumerate(coeffs):
            if c.valuation_lower_bound() < self.bound(start + i) and not c.is_inexact_zero():
                return False
        return True

    def to_json(self):
        if self.is_zero:
            return {"vB": None, "vRho": None, "zero": True}
        return {"vB": str(self.vB), "vRho": str(self.vrho)}


class PadicSeries:
    """Univariate truncated power series over Q_p (immutable)."""

    __slots__ = ("p", "coeffs", "tail")

    def __init__(self, p: int, coeffs: Sequence[PadicNumber], tail: TailCertificate | None):
        if not coeffs:
            coeffs = [PadicNumber.exact_zero(p)]
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "tail", tail)

    def __setattr__(self, name, value):
        raise AttributeError("PadicSeries is immutable")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def polynomial(cls, p: int, coeffs, N: int = DEFAULT_PRECISION) -> PadicSeries:
        return cls(p, [padic(c, p, N) for c in coeffs], TailCertificate.zero())

    @classmethod
    def constant(cls, p: int, c, N: int = DEFAULT_PRECISION) -> PadicSeries:
        return cls.polynomial(p, [c], N)

    @classmethod
    def variable(cls, p: int, N: int = DEFAULT_PRECISION) -> PadicSeries:
        return cls.polynomial(p, [0, 1], N)

    # -- properties ----------------------------------------------------------
    @property
    def degree(self) -> int:
        """Truncation degree D."""
        return len(self.coeffs) - 1

    @property
    def is_polynomial(self) -> bool:
        return self.tail is not None and self.tail.is_zero

    @property
    def is_formal(self) -> bool:
        return self.tail is None

    def __getitem__(self, n: int) -> PadicNumber:
        if n < len(self.coeffs):
            return self.coeffs[n]
        if self.is_polynomial:
            return PadicNumber.exact_zero(self.p)
        raise IndexError(f"coefficient {n} lies beyond the truncation degree")

    def coeff_lower_bound(self, n: int):
        if n <= self.degree:
            return self.coeffs[n].valuation_lower_bound()
        if self.tail is None:
            return -INFINITY
        return self.tail.bound(n)

    def global_bound(self, r: Fraction, start: int = 0):
        """Constant K with ``v(c_n) >= K + n*r`` for every n >= start."""
        if self.tail is None:
            return -INFINITY
        K = INFINITY
        for n in range(start, len(self.coeffs)):
            b = self.coeffs[n].valuation_lower_bound()
            if b != INFINITY:
                K = min(K, b - n * r)
        if not self.tail.is_zero:
            if r > self.tail.vrho:
                return -INFINITY
            n0 = max(self.degree + 1, start)
            K = min(K, self.tail.vB + n0 * (self.tail.vrho - r))
        return K

    def is_zero_to_precision(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __repr__(self):
        terms = []
        for n, c in enumerate(self.coeffs):
            if c.is_exact_zero():
                continue
            terms.append(f"({c!r})*z^{n}")
        body = " + ".join(terms) or "0"
        if self.tail is None:
            return f"{body} + (formal tail)"
        if self.tail.is_zero:
            return body
        return f"{body} + tail[vB={self.tail.vB}, vrho={self.tail.vrho}]"

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "coefficients": [c.to_json() for c in self.coeffs],
            "tail": None if self.tail is None or self.tail.is_zero else self.tail.to_json(),
            "polynomial": self.is_polynomial,
        }

    @classmethod
    def from_json(cls, p: int, obj: dict) -> PadicSeries:
        coeffs = [PadicNumber.from_json(p, c) for c in obj["coefficients"]]
        if obj.get("polynomial"):
            tail = TailCertificate.zero()
        elif obj.get("tail") is None:
            tail = None
        else:
            tail = TailCertificate(Fraction(obj["tail"]["vB"]), Fraction(obj["tail"]["vRho"]))
        return cls(p, coeffs, tail)

    # -- helpers ---------------------------------------------------------------
    def _check(self, other: PadicSeries):
        if other.p != self.p:
            raise IncompatiblePrime(f"series over Q_{self.p} and Q_{other.p}")

    def _as_series(self, other) -> PadicSeries:
        if isinstance(other, PadicSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, PadicNumber)):
            return PadicSeries(self.p, [padic(other, self.p)], TailCertificate.zero())
        return NotImplemented

    def truncate(self, D: int, r: Fraction | None = None) -> PadicSeries:
        """Drop coefficients above D, folding them into the tail certificate."""
        if D >= self.degree:
            return self
        if self.tail is None:
            return PadicSeries(self.p, self.coeffs[: D + 1], None)
        if r is None:
            r = self.tail.vrho if not self.tail.is_zero else Fraction(0)
        K = self.global_bound(r, start=D + 1)
        return PadicSeries(self.p, self.coeffs[: D + 1], TailCertificate(K, r) if K != INFINITY else TailCertificate.zero())

    # -- ring operations ------------------------------------------------------
    def __add__(self, other):
        g = self._as_series(other)
        if g is NotImplemented:
            return NotImplemented
        f = self
        p = f.p
        if f.is_polynomial and g.is_polynomial:
            n = max(len(f.coeffs), len(g.coeffs))
            return PadicSeries(p, [f[i] + g[i] for i in range(n)], TailCertificate.zero())
        D = min(s.degree for s in (f, g) if not s.is_polynomial)
        coeffs = [f[i] + g[i] for i in range(D + 1)]
        if f.is_formal or g.is_formal:
            return PadicSeries(p, coeffs, None)
        r = min(s.tail.vrho for s in (f, g) if not s.is_polynomial)
        K = min(f.global_bound(r, D + 1), g.global_bound(r, D + 1))
        return PadicSeries(p, coeffs, TailCertificate(K, r))

    __radd__ = __add__

    def __neg__(self):
        return PadicSeries(self.p, [-c for c in self.coeffs], self.tail)

    def __sub__(self, other):
        g = self._as_series(other)
        if g is NotImplemented:
            return NotImplemented
        return self + (-g)

    def __rsub__(self, other):
        g = self._as_series(other)
        if g is NotImplemented:
            return NotImplemented
        return g + (-self)

    def scalar_mul(self, s) -> PadicSeries:
        s = padic(s, self.p)
        if s.is_exact_zero():
            return PadicSeries(self.p, [s], TailCertificate.zero())
        tail = self.tail
        if tail is not None and not tail.is_zero:
            tail = TailCertificate(tail.vB + s.valuation_lower_bound(), tail.vrho)
        return PadicSeries(self.p, [c * s for c in self.coeffs], tail)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PadicNumber)):
            return self.scalar_mul(other)
        g = self._as_series(other)
        if g is NotImplemented:
            return NotImplemented
        f = self
        if f.is_polynomial and g.is_polynomial:
            return PadicSeries(f.p, _mul_trunc(f.coeffs, g.coeffs, f.degree + g.degree), TailCertificate.zero())
        D = min(s.degree for s in (f, g) if not s.is_polynomial)
        coeffs = _mul_trunc(f.coeffs, g.coeffs, D)
        if f.is_formal or g.is_formal:
            return PadicSeries(f.p, coeffs, None)
        r = min(s.tail.vrho for s in (f, g) if not s.is_polynomial)
        K = f.global_bound(r) + g.global_bound(r)
        return PadicSeries(f.p, coeffs, TailCertificate(K, r) if K != INFINITY else TailCertificate.zero())

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = PadicSeries.constant(self.p, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def rescale(self, c) -> PadicSeries:
        """The series z -> f(c*z)."""
        c = padic(c, self.p)
        coeffs = []
        power = embed_rational(1, self.p)
        for a in self.coeffs:
            coeffs.append(a * power)
            power = power * c
        tail = self.tail
        if tail is not None and not tail.is_zero:
            tail = TailCertificate(tail.vB, tail.vrho + c.valuation_lower_bound())
        return PadicSeries(self.p, coeffs, tail)

    def derivative(self) -> PadicSeries:
        coeffs = [self.coeffs[n] * n for n in range(1, len(self.coeffs))]
        tail = self.tail
        if tail is not None and not tail.is_zero:
            # v(n) <= n - 1 keeps the bound linear: v(n c_n) >= vB + n vrho
            tail = TailCertificate(tail.vB + tail.vrho, tail.vrho)
        return PadicSeries(self.p, coeffs or [PadicNumber.exact_zero(self.p)], tail)

    # -- analysis -------------------------------------------------------------
    def evaluate(self, z) -> PadicNumber:
        """Value at z, with the tail truncation error folded into the precision."""
        z = padic(z, self.p)
        acc = PadicNumber.exact_zero(self.p)
        for c in reversed(self.coeffs):
            acc = acc * z + c
        if self.is_polynomial:
            return acc
        vz = z.valuation_lower_bound()
        if self.tail is None or not self.tail.covers(vz):
            raise OutsideConvergenceDisk(f"no certificate covering |z|_p = {self.p}^-{vz}")
        if vz == INFINITY:
            return acc
        err = self.tail.vB + (self.degree + 1) * (self.tail.vrho + vz)
        return acc.with_abs_prec(_ceil(err))

    __call__ = evaluate

    def compose(self, g: PadicSeries, degree: int | None = None) -> PadicSeries:
        return compose(self, g, degree)


def _mul_trunc(a: Sequence[PadicNumber], b: Sequence[PadicNumber], D: int) -> list[PadicNumber]:
    p = a[0].p
    out = [PadicNumber.exact_zero(p)] * (D + 1)
    for i, ai in enumerate(a):
        if i > D:
            break
        if ai.is_exact_zero():
            continue
        for j in range(min(len(b), D + 1 - i)):
            bj = b[j]
            if bj.is_exact_zero():
                continue
            out[i + j] = out[i + j] + ai * bj
    return out


def _delta(g: PadicSeries, sigma: Fraction, g0_zero: bool):
    """delta with ``v([g^n]_k) >= n*delta + k*sigma`` for all n, k."""
    if g0_zero:
        # g = z * gt with v(gt_i) >= gamma + i sigma; delta = gamma - sigma
        gamma = INFINITY
        for k in range(1, len(g.coeffs)):
            b = g.coeffs[k].valuation_lower_bound()
            if b != INFINITY:
                gamma = min(gamma, b - (k - 1) * sigma)
        if not g.is_polynomial:
            if g.tail is None or sigma > g.tail.vrho:
                return -INFINITY
            gamma = min(gamma, g.tail.vB + g.tail.vrho + g.degree * (g.tail.vrho - sigma))
        return gamma - sigma
    return g.global_bound(sigma)


def _tail_analysis(outer_bound, Df: int, vB, vrho, inners, zero_const: bool, ncoeffs: int):
    """Certificate for sum_n f_n * (inner)^n and caps from the omitted f_n, n > Df.

    ``outer_bound(n)`` bounds v(f_n) for 1 <= n <= Df (for several inner
    series n is the total degree).  Returns ``(TailCertificate, caps)`` where
    ``caps[k]`` bounds the contribution of the omitted outer terms to the
    degree-k coefficient (``inf`` when there is none).
    """
    cands = {Fraction(0)}
    for x in inners:
        if not x.is_polynomial and x.tail is not None:
            cands.add(Fraction(x.tail.vrho))
        bs = [(k, c.valuation_lower_bound()) for k, c in enumerate(x.coeffs)]
        bs = [(k, b) for k, b in bs if b != INFINITY and (k or not zero_const)]
        for i, (k1, b1) in enumerate(bs):
            for k2, b2 in bs[i + 1:]:
                cands.add(Fraction(b2 - b1, k2 - k1))
            if k1:
                cands.add((b1 + vrho) / k1)
                cands.add((b1 + vrho) / k1 - Fraction(1, 4 * k1))
                cands.add(Fraction(b1, k1))
    explicit = [(n, outer_bound(n)) for n in range(1, Df + 1)]
    explicit = [(n, b) for n, b in explicit if b != INFINITY]
    best = None
    caps = [INFINITY if zero_const and k <= Df else -INFINITY for k in range(ncoeffs)]
    for sigma in cands:
        delta = min(_delta(x, sigma, zero_const) for x in inners)
        if delta == -INFINITY:
            continue
        if delta == INFINITY:
            delta = Fraction(10**6)
        s = vrho + delta
        if not zero_const and s <= 0:
            continue
        CA = min((b + n * delta for n, b in explicit), default=INFINITY)
        lines = [(CA, sigma)] if CA != INFINITY else []
        if zero_const and s < 0:
            lines.append((vB, sigma + s))
        else:
            lines.append((vB + (Df + 1) * s, sigma))
        key = (min(sl for _, sl in lines), min(c for c, _ in lines))
        if best is None or key > best:
            best = key
        for k in range(ncoeffs):
            if zero_const:
                if k <= Df:
                    continue
                cap = min(vB + (Df + 1) * s, vB + k * s) + k * sigma
            else:
                cap = vB + (Df + 1) * s + k * sigma
            caps[k] = max(caps[k], cap)
    if best is None:
        raise CompositionDiverges("tail certificate of the outer series does not cover the inner series")
    r, K = best
    return TailCertificate(K, r), caps


def compose(f: PadicSeries, g: PadicSeries, degree: int | None = None) -> PadicSeries:
    """The series f(g(z)), certified whenever both inputs carry certificates."""
    if f.p != g.p:
        raise IncompatiblePrime("composition over different primes")
    p = f.p
    g0 = g.coeffs[0]
    g0_zero = g0.is_exact_zero()
    if f.is_polynomial:
        if degree is None and g.is_polynomial:
            acc = PadicSeries(p, [f.coeffs[-1]], TailCertificate.zero())
            for c in reversed(f.coeffs[:-1]):
                acc = acc * g + c
            return acc
        D = degree if degree is not None else g.degree
        gt = g.truncate(D)
        acc = PadicSeries(p, [f.coeffs[-1]], TailCertificate.zero())
        for c in reversed(f.coeffs[:-1]):
            acc = (acc * gt).truncate(D) + c
        return acc.truncate(D)

    if degree is None:
        degree = g.degree if not g.is_polynomial else f.degree
    D = degree
    if not g.is_polynomial and g.degree < D:
        D = g.degree
    if not g0_zero and (f.is_formal or g.is_formal):
        raise CompositionDiverges("formal series composed with a nonzero constant term")

    # explicit part: sum_{n <= D_f} f_n g^n truncated at D
    gc = list(g.coeffs[: D + 1])
    nf = f.degree if not g0_zero else min(f.degree, D)
    acc = [f.coeffs[nf]]
    for n in range(nf - 1, -1, -1):
        acc = _mul_trunc(acc, gc, D)
        acc[0] = acc[0] + f.coeffs[n]
    acc = acc + [PadicNumber.exact_zero(p)] * (D + 1 - len(acc))

    if f.is_formal or g.is_formal:
        if f.degree < D:
            D = f.degree
            acc = acc[: D + 1]
        return PadicSeries(p, acc, None)

    cert, caps = _tail_analysis(
        lambda n: f.coeffs[n].valuation_lower_bound(), f.degree, f.tail.vB, f.tail.vrho, [g], g0_zero, len(acc)
    )
    out = [c.with_abs_prec(_ceil(cap)) for c, cap in zip(acc, caps)]
    return PadicSeries(p, out, cert)


# -- exponential and logarithm -------------------------------------------------

def exp_threshold(p: int) -> Fraction:
    """exp_p converges exactly on v_p(x) > 1/(p-1)."""
    return Fraction(1, p - 1)


def exp_series(p: int, D: int = DEFAULT_DEGREE, N: int = DEFAULT_PRECISION) -> PadicSeries:
    """sum z^n / n! with the certificate v(1/n!) >= (1 - n)/(p - 1)."""
    coeffs = []
    fact = 1
    for n in range(D + 1):
        if n:
            fact *= n
        coeffs.append(embed_rational(Fraction(1, fact), p, N))
    t = Fraction(1, p - 1)
    cert = TailCertificate(t, -t)
    extra, f2 = [], fact
    for n in range(D + 1, D + 6):
        f2 *= n
        extra.append(embed_rational(Fraction(1, f2), p, N))
    assert cert.check(extra, D + 1)
    return PadicSeries(p, coeffs, cert)


def _log_cert(p: int, D: int, eps: Fraction) -> Fraction:
    """vB with v(1/n) >= vB - n*eps for every n > D (uses v(n) <= floor(log_p n))."""
    best = INFINITY
    k = 0
    while True:
        lo = max(p**k, D + 1)
        hi = p ** (k + 1) - 1
        if hi >= lo:
            best = min(best, lo * eps - k)
            if lo * eps - k > best + 1 and p**k > D:
                break
        k += 1
        if k > 200:
            break
    return Fraction(best) if best != INFINITY else Fraction(0)


def log1p_series(p: int, D: int = DEFAULT_DEGREE, N: int = DEFAULT_PRECISION, eps: Fraction | None = None) -> PadicSeries:
    """log(1 + z) = sum (-1)^(n+1) z^n / n, certified with slope -eps."""
    if eps is None:
        eps = Fraction(1, D + 1)
    coeffs = [PadicNumber.exact_zero(p)]
    for n in range(1, D + 1):
        coeffs.append(embed_rational(Fraction((-1) ** (n + 1), n), p, N))
    vB = _log_cert(p, D, eps)
    cert = TailCertificate(vB, -eps)
    extra = [embed_rational(Fraction((-1) ** (n + 1), n), p, N) for n in range(D + 1, D + 6)]
    assert cert.check(extra, D + 1)
    return PadicSeries(p, coeffs, cert)


def exp_p(t, N: int | None = None):
    """p-adic exponential of a number or a series.

    Numbers must satisfy ``v_p(t) > 1/(p-1)`` (boundary excluded); a series
    must have such a constant term and is composed with the certified
    exponential series.
    """
    if isinstance(t, PadicSeries):
        p = t.p
        c0 = t.coeffs[0]
        if c0.valuation_lower_bound() <= exp_threshold(p):
            raise OutsideExpDomain("constant term outside D(0, p^(-1/(p-1)))")
        if t.is_polynomial and all(c.is_exact_zero() for c in t.coeffs[1:]):
            return PadicSeries.constant(p, exp_p(c0, N))
        D = t.degree if not t.is_polynomial else DEFAULT_DEGREE
        try:
            return compose(exp_series(p, D, N or DEFAULT_PRECISION), t, D)
        except CompositionDiverges as exc:
            raise OutsideExpDomain(str(exc)) from exc
    t = t if isinstance(t, PadicNumber) else None
    if t is None:
        raise TypeError("exp_p expects a PadicNumber or PadicSeries")
    p = t.p
    if t.is_exact_zero():
        return embed_rational(1, p, N or DEFAULT_PRECISION)
    vt = t.valuation_lower_bound()
    if vt <= exp_threshold(p):
        raise OutsideExpDomain(f"v_{p}(t) = {vt} is not > 1/({p}-1)")
    target = t.abs_prec if N is None else min(t.abs_prec, N)
    one = embed_rational(1, p, max(int(target), 1) + 1)
    acc = one
    term = one
    n = 0
    inv = Fraction(1, p - 1)
    while True:
        n += 1
        term = term * t / n
        acc = acc + term
        # all later terms satisfy v >= (n+1) vt - n/(p-1)
        if (n + 1) * vt - n * inv >= target:
            break
    return acc.with_abs_prec(target)


def log_p(u, N: int | None = None):
    """p-adic logarithm of a principal unit (|u - 1|_p < 1), or of a series."""
    if isinstance(u, PadicSeries):
        p = u.p
        x = u - 1
        if x.coeffs[0].valuation_lower_bound() <= 0:
            raise OutsideLogDomain("constant term is not a principal unit")
        D = u.degree if not u.is_polynomial else DEFAULT_DEGREE
        return compose(log1p_series(p, D, N or DEFAULT_PRECISION), x, D)
    if not isinstance(u, PadicNumber):
        raise TypeError("log_p expects a PadicNumber or PadicSeries")
    p = u.p
    x = u - 1
    if x.is_exact_zero():
        return PadicNumber.exact_zero(p)
    vx = x.valuation_lower_bound()
    if vx <= 0:
        raise OutsideLogDomain(f"|u - 1|_{p} is not < 1")
    target = x.abs_prec if N is None else min(x.abs_prec, N)
    acc = PadicNumber.exact_zero(p)
    power = x
    n = 0
    lnp = math.log(p)
    while True:
        n += 1
        term = power / n
        acc = acc + term if n % 2 else acc - term
        power = power * x
        m = n + 1
        # later terms: v(x^m/m) >= m vx - log_p(m), increasing once m >= 1/(vx ln p)
        if m * vx - math.log(m) / lnp > target + 1 and m * vx * lnp >= 1:
            break
    return acc.with_abs_prec(target)


# -- multivariate series --------------------------------------------------------

Exponent = tuple


def _deg(e: Exponent) -> int:
    return sum(e)


class MultiSeries:
    """Series in g variables truncated at total degree D.

    ``tail`` bounds omitted coefficients in total degree:
    ``v(c_e) >= vB + |e| * vrho`` for ``|e| > D``.
    """

    __slots__ = ("p", "g", "coeffs", "degree", "tail")

    def __init__(self, p: int, g: int, coeffs: dict, degree: int, tail: TailCertificate | None):
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "coeffs", {e: c for e, c in coeffs.items() if not c.is_exact_zero() and _deg(e) <= degree})
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "tail", tail)

    def __setattr__(self, name, value):
        raise AttributeError("MultiSeries is immutable")

    @classmethod
    def from_rational_terms(cls, p: int, g: int, terms: dict, N: int = DEFAULT_PRECISION) -> MultiSeries:
        """Polynomial from ``{exponent: rational}``."""
        coeffs = {tuple(e): embed_rational(c, p, N) for e, c in terms.items() if c != 0}
        D = max((_deg(e) for e in coeffs), default=0)
        return cls(p, g, coeffs, D, TailCertificate.zero())

    @classmethod
    def coordinate(cls, p: int, g: int, i: int, N: int = DEFAULT_PRECISION) -> MultiSeries:
        e = tuple(1 if j == i else 0 for j in range(g))
        return cls(p, g, {e: embed_rational(1, p, N)}, 1, TailCertificate.zero())

    @property
    def is_polynomial(self) -> bool:
        return self.tail is not None and self.tail.is_zero

    def __getitem__(self, e) -> PadicNumber:
        e = tuple(e)
        if e in self.coeffs:
            return self.coeffs[e]
        if _deg(e) <= self.degree or self.is_polynomial:
            return PadicNumber.exact_zero(self.p)
        raise IndexError("coefficient beyond the truncation degree")

    def layer(self, n: int) -> dict:
        return {e: c for e, c in self.coeffs.items() if _deg(e) == n}

    def linear_part(self) -> list[PadicNumber]:
        out = []
        for j in range(self.g):
            e = tuple(1 if k == j else 0 for k in range(self.g))
            out.append(self[e])
        return out

    def degree_bound(self, n: int):
        """Lower bound on v(c_e) over all e with |e| = n."""
        if n > self.degree:
            if self.tail is None:
                return -INFINITY
            return self.tail.bound(n)
        vals = [c.valuation_lower_bound() for e, c in self.coeffs.items() if _deg(e) == n]
        return min(vals, default=INFINITY)

    def truncate(self, D: int) -> MultiSeries:
        if D >= self.degree:
            return self
        if self.tail is None:
            return MultiSeries(self.p, self.g, self.coeffs, D, None)
        r = self.tail.vrho if not self.tail.is_zero else Fraction(0)
        K = INFINITY
        for e, c in self.coeffs.items():
            if _deg(e) > D:
                K = min(K, c.valuation_lower_bound() - _deg(e) * r)
        if not self.tail.is_zero:
            K = min(K, self.tail.vB + (self.degree + 1) * (self.tail.vrho - r))
        tail = TailCertificate(K, r) if K != INFINITY else TailCertificate.zero()
        return MultiSeries(self.p, self.g, self.coeffs, D, tail)

    def __add__(self, other: MultiSeries) -> MultiSeries:
        if other.p != self.p or other.g != self.g:
            raise IncompatiblePrime("incompatible multiseries")
        if self.is_polynomial and other.is_polynomial:
            D = max(self.degree, other.degree)
            a, b = self, other
        else:
            D = min(s.degree for s in (self, other) if not s.is_polynomial)
            a, b = self.truncate(D), other.truncate(D)
        coeffs = dict(a.coeffs)
        for e, c in b.coeffs.items():
            coeffs[e] = coeffs[e] + c if e in coeffs else c
        if a.tail is None or b.tail is None:
            tail = None
        elif a.is_polynomial and b.is_polynomial:
            tail = TailCertificate.zero()
        else:
            ts = [t for t in (a.tail, b.tail) if not t.is_zero]
            r = min(t.vrho for t in ts)
            tail = TailCertificate(min(t.vB + (D + 1) * (t.vrho - r) for t in ts), r)
        return MultiSeries(self.p, self.g, coeffs, D, tail)

    def __neg__(self):
        return MultiSeries(self.p, self.g, {e: -c for e, c in self.coeffs.items()}, self.degree, self.tail)

    def __sub__(self, other):
        return self + (-other)

    def scalar_mul(self, s) -> MultiSeries:
        s = padic(s, self.p)
        tail = self.tail
        if tail is not None and not tail.is_zero:
            tail = TailCertificate(tail.vB + s.valuation_lower_bound(), tail.vrho)
        return MultiSeries(self.p, self.g, {e: c * s for e, c in self.coeffs.items()}, self.degree, tail)

    def mul(self, other: MultiSeries, D: int) -> MultiSeries:
        """Truncated product, formal beyond D (used by the coefficient solvers)."""
        out: dict = {}
        by_deg: dict[int, list] = {}
        for e, c in other.coeffs.items():
            by_deg.setdefault(_deg(e), []).append((e, c))
        for e1, c1 in self.coeffs.items():
            d1 = _deg(e1)
            for d2, items in by_deg.items():
                if d1 + d2 > D:
                    continue
                for e2, c2 in items:
                    e = tuple(a + b for a, b in zip(e1, e2))
                    prod = c1 * c2
                    out[e] = out[e] + prod if e in out else prod
        tail = TailCertificate.zero() if self.is_polynomial and other.is_polynomial and self.degree + other.degree <= D else None
        return MultiSeries(self.p, self.g, out, D, tail)

    def evaluate(self, point: Sequence[PadicNumber]) -> PadicNumber:
        point = [padic(x, self.p) for x in point]
        acc = PadicNumber.exact_zero(self.p)
        for e, c in self.coeffs.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            acc = acc + term
        if self.is_polynomial:
            return acc
        vz = min(x.valuation_lower_bound() for x in point)
        if self.tail is None or not self.tail.covers(vz):
            raise OutsideConvergenceDisk("point outside the certified polydisk")
        if vz == INFINITY:
            return acc
        err = self.tail.vB + (self.degree + 1) * (self.tail.vrho + vz)
        return acc.with_abs_prec(_ceil(err))

    def substitute(self, xs: Sequence[PadicSeries], degree: int | None = None) -> PadicSeries:
        """The univariate series F(x_1(z), ..., x_g(z)).

        Uses ``v([x^e]_k) >= |e| delta + k sigma`` where every input satisfies
        ``v(x_i,k) >= delta + k sigma``; with all constants zero, only
        ``|e| <= k`` contributes to degree k.
        """
        p = self.p
        if len(xs) != self.g:
            raise ValueError("wrong number of series")
        if self.is_polynomial and all(x.is_polynomial for x in xs) and degree is None:
            D = None
        else:
            D = degree
            if D is None:
                D = min((x.degree for x in xs if not x.is_polynomial), default=self.degree)
        zero_const = all(x.coeffs[0].is_exact_zero() for x in xs)
        # explicit part
        cache: dict = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                if k == 0:
                    cache[key] = PadicSeries.constant(p, 1)
                else:
                    prev = power(i, k - 1)
                    prod = prev * xs[i]
                    cache[key] = prod if D is None else prod.truncate(D)
            return cache[key]

        acc = PadicSeries(p, [PadicNumber.exact_zero(p)], TailCertificate.zero())
        explicit = acc
        for e, c in sorted(self.coeffs.items()):
            if zero_const and D is not None and _deg(e) > D:
                continue
            term = PadicSeries.constant(p, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
                    if D is not None:
                        term = term.truncate(D)
            explicit = explicit + term
        if D is None:
            return explicit
        explicit = explicit.truncate(D)
        if self.is_polynomial:
            return explicit
        if self.tail is None or any(x.is_formal for x in xs):
            return PadicSeries(p, explicit.coeffs[: D + 1], None)

        # tail of the outer series: |e| > Dh
        cert, caps = _tail_analysis(
            self.degree_bound, self.degree, self.tail.vB, self.tail.vrho, xs, zero_const, len(explicit.coeffs)
        )
        out = [c.with_abs_prec(_ceil(cap)) for c, cap in zip(explicit.coeffs, caps)]
        out += [PadicNumber.exact_zero(p)] * (D + 1 - len(out))
        if explicit.tail is not None and not explicit.tail.is_zero and cert.vrho <= explicit.tail.vrho:
            cert = TailCertificate(min(cert.vB, explicit.global_bound(cert.vrho, D + 1)), cert.vrho)
        elif explicit.tail is not None and not explicit.tail.is_zero:
            r = explicit.tail.vrho
            cert = TailCertificate(min(cert.vB + (D + 1) * (cert.vrho - r), explicit.tail.vB), r)
        return PadicSeries(p, out[: D + 1], cert)

    def __repr__(self):
        return f"MultiSeries(p={self.p}, g={self.g}, D={self.degree}, terms={len(self.coeffs)})"

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "degree": self.degree,
            "coefficients": [
                {"e": list(e), **c.to_json()} for e, c in sorted(self.coeffs.items())
            ],
            "tail": None if self.tail is None or self.tail.is_zero else self.tail.to_json(),
            "polynomial": self.is_polynomial,
        }
