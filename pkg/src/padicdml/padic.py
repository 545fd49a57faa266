"""Finite-precision arithmetic in Q_p.

A nonzero value is stored as ``unit * p**val + O(p**(val + prec))`` with
``gcd(unit, p) == 1`` and ``0 <= unit < p**prec``; ``prec`` is the relative
precision.  Zeros come in two flavours:

* exact zeros (``exact=True``), produced by embedding the rational 0.  Their
  valuation is ``math.inf``.
* inexact zeros ``O(p**M)``, produced by cancellation.  Only the lower bound
  ``M`` on their valuation is known and asking for the valuation raises
  :class:`IndeterminateValuation`.

Precision propagation is pessimistic: the absolute precision of a sum is the
minimum of the absolute precisions of the summands, the relative precision of
a product or quotient is the minimum of the relative precisions.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import (
    DenominatorDivisibleByP,
    DivisionByInexactZero,
    IncompatiblePrime,
    IndeterminateValuation,
    NotAUnit,
    NotPrime,
)

DEFAULT_PRECISION = 64

INFINITY = math.inf


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise NotPrime(f"{p!r} is not a prime")
    return p


@lru_cache(maxsize=4096)
def ppow(p: int, k: int) -> int:
    return p**k


def vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp(a, p: int):
    """Valuation of a rational number; ``math.inf`` for zero."""
    a = Fraction(a)
    if a == 0:
        return INFINITY
    return vp_int(a.numerator, p) - vp_int(a.denominator, p)


class PadicNumber:
    """An element of Q_p known to finite relative precision.

    Instances are immutable; build them with :func:`embed_rational`,
    :meth:`from_parts` or arithmetic on existing values.
    """

    __slots__ = ("p", "val", "unit", "prec", "exact")

    def __init__(self, p: int, val: int, unit: int, prec: int, exact: bool = False):
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "val", val)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "exact", exact)

    def __setattr__(self, name, value):
        raise AttributeError("PadicNumber is immutable")

    def __reduce__(self):
        return (PadicNumber, (self.p, self.val, self.unit, self.prec, self.exact))

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_parts(cls, p: int, val: int, unit: int, prec: int) -> PadicNumber:
        """Normalise ``unit * p**val + O(p**(val+prec))``; unit need not be a unit."""
        if prec <= 0:
            return cls.inexact_zero(p, val + prec)
        modulus = ppow(p, prec)
        unit %= modulus
        if unit == 0:
            return cls.inexact_zero(p, val + prec)
        shift = 0
        while unit % p == 0:
            unit //= p
            shift += 1
        return cls(p, val + shift, unit % ppow(p, prec - shift), prec - shift)

    @classmethod
    def inexact_zero(cls, p: int, absprec: int) -> PadicNumber:
        return cls(p, absprec, 0, 0, False)

    @classmethod
    def exact_zero(cls, p: int, marker: int = DEFAULT_PRECISION) -> PadicNumber:
        return cls(p, marker, 0, 0, True)

    # -- basic predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        """True for exact zeros and for zeros known only to finite precision."""
        return self.unit == 0

    def is_exact_zero(self) -> bool:
        return self.unit == 0 and self.exact

    def is_inexact_zero(self) -> bool:
        return self.unit == 0 and not self.exact

    @property
    def abs_prec(self):
        """Absolute precision: the value is known modulo ``p**abs_prec``."""
        if self.unit == 0:
            return INFINITY if self.exact else self.val
        return self.val + self.prec

    def valuation_lower_bound(self):
        if self.unit == 0:
            return INFINITY if self.exact else self.val
        return self.val

    def valuation(self):
        if self.unit == 0:
            if self.exact:
                return INFINITY
            raise IndeterminateValuation(f"valuation of O({self.p}^{self.val}) is unknown")
        return self.val

    def norm(self) -> Fraction:
        """The p-adic absolute value ``p**(-v)``."""
        v = self.valuation()
        if v == INFINITY:
            return Fraction(0)
        return Fraction(self.p) ** (-v)

    def __abs__(self) -> Fraction:
        return self.norm()

    def residue(self) -> int:
        """Reduction modulo p of a value with nonnegative valuation."""
        if self.unit == 0:
            if self.exact or self.val >= 1:
                return 0
            raise IndeterminateValuation("residue of a low-precision zero")
        if self.val < 0:
            raise ValueError("value is not p-integral")
        return self.unit % self.p if self.val == 0 else 0

    def to_fraction(self) -> Fraction:
        """The canonical rational representative ``unit * p**val``."""
        if self.unit == 0:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def lift_int(self) -> int:
        """Integer representative in ``[0, p**abs_prec)`` of a p-integral value."""
        if self.unit == 0:
            return 0
        if self.val < 0:
            raise ValueError("value is not p-integral")
        return self.unit * ppow(self.p, self.val)

    def signed_lift(self) -> int:
        """Representative in ``(-p**A/2, p**A/2]``, A the absolute precision."""
        n = self.lift_int()
        if self.unit == 0:
            return 0
        m = ppow(self.p, self.abs_prec)
        n %= m
        return n - m if 2 * n > m else n

    # -- precision management ------------------------------------------------
    def with_abs_prec(self, absprec) -> PadicNumber:
        """Reduce (never raise) the absolute precision to ``absprec``."""
        if absprec == INFINITY or absprec >= self.abs_prec:
            return self
        absprec = math.floor(absprec)
        if self.unit == 0:
            return PadicNumber.inexact_zero(self.p, absprec)
        return PadicNumber.from_parts(self.p, self.val, self.unit, absprec - self.val)

    def with_rel_prec(self, prec: int) -> PadicNumber:
        if self.unit == 0 or prec >= self.prec:
            return self
        return PadicNumber.from_parts(self.p, self.val, self.unit, prec)

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> PadicNumber:
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise IncompatiblePrime(f"cannot combine Q_{self.p} and Q_{other.p}")
            return other
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if other == 0:
                return PadicNumber.exact_zero(self.p)
            v = vp(other, self.p)
            want = max(self.prec, 1)
            ap = self.abs_prec
            if ap != INFINITY:
                want = max(want, ap - v)
            return embed_rational(other, self.p, max(want, 1))
        return NotImplemented

    def __add__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        x = self
        if x.unit == 0 and x.exact:
            return y
        if y.unit == 0 and y.exact:
            return x
        p = x.p
        A = min(x.abs_prec, y.abs_prec)
        v0 = min(x.valuation_lower_bound(), y.valuation_lower_bound())
        if v0 >= A:
            return PadicNumber.inexact_zero(p, A)
        s = 0
        if x.unit:
            s += x.unit * ppow(p, x.val - v0)
        if y.unit:
            s += y.unit * ppow(p, y.val - v0)
        return PadicNumber.from_parts(p, v0, s, A - v0)

    __radd__ = __add__

    def __neg__(self):
        if self.unit == 0:
            return self
        return PadicNumber(self.p, self.val, (-self.unit) % ppow(self.p, self.prec), self.prec)

    def __sub__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        return self + (-y)

    def __rsub__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        return y + (-self)

    def __mul__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        x = self
        p = x.p
        if (x.unit == 0 and x.exact) or (y.unit == 0 and y.exact):
            return PadicNumber.exact_zero(p)
        if x.unit == 0 or y.unit == 0:
            return PadicNumber.inexact_zero(p, x.valuation_lower_bound() + y.valuation_lower_bound())
        prec = min(x.prec, y.prec)
        return PadicNumber(p, x.val + y.val, x.unit * y.unit % ppow(p, prec), prec)

    __rmul__ = __mul__

    def inverse(self) -> PadicNumber:
        if self.unit == 0:
            raise DivisionByInexactZero("division by a p-adic zero")
        return PadicNumber(self.p, -self.val, pow(self.unit, -1, ppow(self.p, self.prec)), self.prec)

    def __truediv__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        if y.unit == 0:
            raise DivisionByInexactZero("division by a p-adic zero")
        x = self
        if x.unit == 0:
            if x.exact:
                return x
            return PadicNumber.inexact_zero(x.p, x.val - y.val)
        prec = min(x.prec, y.prec)
        m = ppow(x.p, prec)
        return PadicNumber(x.p, x.val - y.val, x.unit * pow(y.unit, -1, m) % m, prec)

    def __rtruediv__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        return y / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return embed_rational(1, self.p, max(self.prec, 1))
        if self.unit == 0:
            if self.exact:
                return self
            return PadicNumber.inexact_zero(self.p, self.val * n)
        return PadicNumber(self.p, self.val * n, pow(self.unit, n, ppow(self.p, self.prec)), self.prec)

    # -- comparison helpers --------------------------------------------------
    def agrees_with(self, other, absprec=None) -> bool:
        """True when ``self - other`` is zero to the available (or given) precision."""
        d = self - other
        if d.unit == 0:
            return absprec is None or d.abs_prec >= absprec
        return absprec is not None and d.val >= absprec

    def __repr__(self):
        if self.unit == 0:
            if self.exact:
                return f"0 (exact, Q_{self.p})"
            return f"O({self.p}^{self.val})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.val + self.prec})"

    def to_json(self) -> dict:
        if self.unit == 0:
            return {"v": None if self.exact else self.val, "unit": 0, "N": 0, "exact_zero": self.exact}
        return {"v": self.val, "unit": str(self.unit), "N": self.prec}

    @classmethod
    def from_json(cls, p: int, obj: dict) -> PadicNumber:
        if int(obj["unit"]) == 0:
            if obj.get("exact_zero") or obj["v"] is None:
                return cls.exact_zero(p)
            return cls.inexact_zero(p, int(obj["v"]))
        return cls(p, int(obj["v"]), int(obj["unit"]), int(obj["N"]))


def embed_rational(a, p: int, N: int = DEFAULT_PRECISION, require_integral: bool = False) -> PadicNumber:
    """Embed a rational number into Q_p with relative precision ``N``.

    With ``require_integral`` a denominator divisible by ``p`` raises
    :class:`DenominatorDivisibleByP`; otherwise negative valuations are fine.
    """
    a = Fraction(a)
    if N < 1:
        raise ValueError("precision must be at least 1")
    if a == 0:
        return PadicNumber.exact_zero(p, N)
    num, den = a.numerator, a.denominator
    if den % p == 0 and require_integral:
        raise DenominatorDivisibleByP(f"{p} divides the denominator of {a}")
    vn = vp_int(num, p)
    vd = vp_int(den, p)
    num //= ppow(p, vn)
    den //= ppow(p, vd)
    m = ppow(p, N)
    return PadicNumber(p, vn - vd, num * pow(den, -1, m) % m, N)


def padic(a, p: int, N: int = DEFAULT_PRECISION) -> PadicNumber:
    """Coerce an int, Fraction or PadicNumber to Q_p."""
    if isinstance(a, PadicNumber):
        if a.p != p:
            raise IncompatiblePrime(f"expected Q_{p}, got Q_{a.p}")
        return a
    return embed_rational(a, p, N)


def valuation(x: PadicNumber):
    return x.valuation()


def teichmuller_order(u: PadicNumber) -> int:
    """Least d >= 1 putting ``u**d`` in the principal units where exp/log invert.

    For odd p that is the order of ``u`` modulo p.  For p = 2 the condition
    ``|u**d - 1| < 1`` holds for every unit, but ``exp(log(u**d)) = u**d`` needs
    ``u**d = 1 mod 4``, so the answer is 1 or 2.
    """
    if u.unit == 0 or u.val != 0:
        raise NotAUnit(f"{u!r} is not a p-adic unit")
    p = u.p
    if p == 2:
        if u.prec < 2:
            raise NotAUnit("need at least two 2-adic digits to decide the order")
        return 1 if u.unit % 4 == 1 else 2
    r = u.unit % p
    d, x = 1, r
    while x != 1:
        x = x * r % p
        d += 1
    return d


def rational_reconstruction(x: PadicNumber, bound: int | None = None) -> Fraction | None:
    """Small-height rational agreeing with ``x`` to its absolute precision, if any."""
    if x.unit == 0:
        return Fraction(0)
    p = x.p
    shift = min(x.val, 0)
    A = x.abs_prec - shift
    m = ppow(p, A)
    n = (x.unit * ppow(p, x.val - shift)) % m
    if bound is None:
        bound = math.isqrt(m // 2)
    r0, r1, s0, s1 = m, n, 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(s1, p) != 1:
        return None
    return Fraction(r1, s1) * Fraction(p) ** shift
