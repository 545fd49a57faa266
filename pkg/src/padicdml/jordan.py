"""Analytic interpolation z -> (J^d)^z of powers of a Jordan matrix.

For a block ``J = lam*I + N`` of size m we have, at integers z,

    (J^d)^z = J^(d z) = (lam^d)^z * sum_i binom(d z, i) * lam^(-i) * N^i

and the right-hand side makes sense for p-adic z once ``lam^d`` is a
principal unit (``|lam^d - 1| < 1``, and ``lam^d = 1 mod 4`` when p = 2):
``(lam^d)^z = exp_p(z * log_p(lam^d))``.  The binomial factor is a
polynomial in z, so every entry is a certified power series.  Substituting
``z = 2p w`` pushes the exponent into the exp domain for every w in Z_p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NonUnitEigenvalue
from .linalg import JordanData, identity_p, matmul_p
from .padic import PadicNumber, embed_rational, teichmuller_order
from .series import PadicSeries, TailCertificate, compose, exp_p, exp_series, log_p

GUARD_DIGITS = 8


@dataclass
class JordanForm:
    """Block-diagonal J with blocks ``(eigenvalue, size)``; optional ``L = B J B^-1``."""

    blocks: list
    B: list | None = None
    Binv: list | None = None

    @classmethod
    def from_data(cls, data: JordanData) -> JordanForm:
        return cls([(lam, m) for lam, m, _ in data.blocks], data.B, data.Binv)

    @property
    def p(self) -> int:
        return self.blocks[0][0].p

    @property
    def size(self) -> int:
        return sum(m for _, m in self.blocks)

    def offsets(self):
        out, o = [], 0
        for _, m in self.blocks:
            out.append(o)
            o += m
        return out

    def matrix(self) -> list:
        n = self.size
        p = self.p
        zero = PadicNumber.exact_zero(p)
        M = [[zero] * n for _ in range(n)]
        for (lam, m), o in zip(self.blocks, self.offsets()):
            for i in range(m):
                M[o + i][o + i] = lam
                if i + 1 < m:
                    M[o + i][o + i + 1] = embed_rational(1, p, lam.prec)
        return M

    def power(self, k: int) -> list:
        """J^k by repeated squaring (k >= 0)."""
        p = self.p
        N = min(lam.prec for lam, _ in self.blocks)
        R = identity_p(self.size, p, N)
        base = self.matrix()
        while k:
            if k & 1:
                R = matmul_p(R, base)
            k >>= 1
            if k:
                base = matmul_p(base, base)
        return R


def choose_d(J: JordanForm) -> int:
    d = 1
    for lam, _ in J.blocks:
        if lam.is_zero() or lam.valuation() != 0:
            raise NonUnitEigenvalue(f"eigenvalue {lam!r} is not a unit")
        d = math.lcm(d, teichmuller_order(lam))
    return d


def _binomial_coeffs(d: int, i: int) -> list[Fraction]:
    """Coefficients in z of binom(d z, i)."""
    poly = [Fraction(1)]
    for j in range(i):
        # multiply by (d z - j)
        new = [Fraction(0)] * (len(poly) + 1)
        for k, c in enumerate(poly):
            new[k] += -j * c
            new[k + 1] += d * c
        poly = new
    f = math.factorial(i)
    return [c / f for c in poly]


def _eval_binomial(d: int, i: int, z: PadicNumber) -> PadicNumber:
    acc = embed_rational(1, z.p, max(z.prec, 1) + GUARD_DIGITS)
    for j in range(i):
        acc = acc * (z * d - j)
    return acc / math.factorial(i)


@dataclass
class AnalyticMatrixPower:
    """Entries of (J^d)^z, evaluable at p-adic z and expandable as series."""

    J: JordanForm
    d: int
    logs: list = field(default_factory=list)  # log_p(lam^d) per block

    def at(self, z) -> list:
        """(J^d)^z at a p-adic (or integer) z with ``v(z log(lam^d)) > 1/(p-1)``."""
        p = self.J.p
        n = self.J.size
        N = min(lam.prec for lam, _ in self.J.blocks)
        if isinstance(z, int):
            z = embed_rational(z, p, N + GUARD_DIGITS) if z else PadicNumber.exact_zero(p)
        zero = PadicNumber.exact_zero(p)
        M = [[zero] * n for _ in range(n)]
        for (lam, m), o, ell in zip(self.J.blocks, self.J.offsets(), self.logs):
            scal = exp_p(z * ell) if not z.is_exact_zero() else embed_rational(1, p, N + GUARD_DIGITS)
            inv = lam.inverse()
            for i in range(m):
                val = scal * _eval_binomial(self.d, i, z) * inv**i if i else scal
                for r in range(m - i):
                    M[o + r][o + r + i] = val.with_rel_prec(N) if not val.is_zero() else val
        return M

    def entry_series(self, block: int, i: int, D: int) -> PadicSeries:
        """Series in z of the block's i-th superdiagonal entry."""
        p = self.J.p
        lam, m = self.J.blocks[block]
        ell = self.logs[block]
        N = lam.prec
        if ell.is_zero():
            scal = PadicSeries.constant(p, 1, N)
        else:
            scal = compose(exp_series(p, D, N), PadicSeries(p, [PadicNumber.exact_zero(p), ell], TailCertificate.zero()), D)
        if i == 0:
            return scal
        binom = PadicSeries.polynomial(p, _binomial_coeffs(self.d, i), N)
        return (scal * binom).scalar_mul(lam.inverse() ** i).truncate(D)

    def series(self, D: int) -> list:
        """Full matrix of PadicSeries in z."""
        p = self.J.p
        n = self.J.size
        zero = PadicSeries(p, [PadicNumber.exact_zero(p)], TailCertificate.zero())
        M = [[zero] * n for _ in range(n)]
        for b, ((lam, m), o) in enumerate(zip(self.J.blocks, self.J.offsets())):
            for i in range(m):
                s = self.entry_series(b, i, D)
                for r in range(m - i):
                    M[o + r][o + r + i] = s
        return M


def analytic_power(J: JordanForm, d: int | None = None) -> AnalyticMatrixPower:
    if d is None:
        d = choose_d(J)
    logs = []
    p = J.p
    for lam, _ in J.blocks:
        if lam.is_zero() or lam.valuation() != 0:
            raise NonUnitEigenvalue(f"eigenvalue {lam!r} is not a unit")
        u = lam ** d
        if p == 2 and (u.unit % 4 != 1):
            raise NonUnitEigenvalue(f"lam^{d} is not 1 mod 4")
        if p != 2 and u.unit % p != 1:
            raise NonUnitEigenvalue(f"lam^{d} is not 1 mod {p}")
        logs.append(log_p(u))
    return AnalyticMatrixPower(J, d, logs)


def rescaled_power(a: AnalyticMatrixPower, ell: int, D: int) -> list:
    """Entries of ``J^ell (J^d)^(2p w)`` as series in w on the closed unit disk."""
    p = a.J.p
    n = a.J.size
    twop = embed_rational(2 * p, p)
    S = a.series(D)
    S = [[s.rescale(twop) for s in row] for row in S]
    Jl = a.J.power(ell)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = PadicSeries(p, [PadicNumber.exact_zero(p)], TailCertificate.zero())
            for k in range(n):
                if Jl[i][k].is_exact_zero() or S[k][j].is_polynomial and S[k][j].is_zero_to_precision():
                    continue
                acc = acc + S[k][j].scalar_mul(Jl[i][k])
            row.append(acc)
        out.append(row)
    return out


def evaluate_matrix(S: list, w) -> list:
    return [[s.evaluate(w) for s in row] for row in S]
