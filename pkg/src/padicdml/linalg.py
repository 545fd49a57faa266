"""Small dense linear algebra over Q (Fractions) and over Q_p.

The Jordan decomposition works prime by prime: the characteristic polynomial
is factored over Q; rational eigenvalues get exact Jordan chains, simple
irrational eigenvalues are Hensel-lifted from distinct roots mod p and get
eigenvectors from the adjugate of ``x*I - L``.  Repeated irrational
eigenvalues would need ramified or unramified extensions and are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import sympy

from .errors import DivisionByInexactZero, NonUnitEigenvalue, UnsupportedFieldExtension
from .padic import INFINITY, PadicNumber, embed_rational

Matrix = list  # list of rows


# -- exact rational matrices -------------------------------------------------

def to_fractions(M) -> Matrix:
    return [[Fraction(x) for x in row] for row in M]


def identity_q(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def matmul_q(A: Matrix, B: Matrix) -> Matrix:
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), Fraction(0)) for j in range(len(B[0]))] for i in range(len(A))]


def matvec_q(A: Matrix, v: Sequence) -> list:
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A]


def matpow_q(A: Matrix, n: int) -> Matrix:
    R = identity_q(len(A))
    B = A
    while n:
        if n & 1:
            R = matmul_q(R, B)
        n >>= 1
        if n:
            B = matmul_q(B, B)
    return R


def det_q(A: Matrix) -> Fraction:
    return Fraction(str(sympy.Matrix(A).det()))


def inverse_q(A: Matrix) -> Matrix:
    Mi = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in A]).inv()
    return [[Fraction(int(Mi[i, j].p), int(Mi[i, j].q)) for j in range(Mi.cols)] for i in range(Mi.rows)]


def _sym(A: Matrix) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in A])


def _from_sym_vec(v) -> list[Fraction]:
    return [Fraction(int(sympy.Rational(x).p), int(sympy.Rational(x).q)) for x in v]


# -- p-adic matrices -----------------------------------------------------------

def embed_matrix(A: Matrix, p: int, N: int) -> Matrix:
    return [[embed_rational(x, p, N) for x in row] for row in A]


def identity_p(n: int, p: int, N: int) -> Matrix:
    one, zero = embed_rational(1, p, N), PadicNumber.exact_zero(p)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def matmul_p(A: Matrix, B: Matrix) -> Matrix:
    p = A[0][0].p
    out = []
    for i in range(len(A)):
        row = []
        for j in range(len(B[0])):
            acc = PadicNumber.exact_zero(p)
            for k in range(len(B)):
                acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out


def matvec_p(A: Matrix, v: Sequence[PadicNumber]) -> list:
    p = v[0].p
    out = []
    for row in A:
        acc = PadicNumber.exact_zero(p)
        for a, x in zip(row, v):
            acc = acc + a * x
        out.append(acc)
    return out


def inverse_p(A: Matrix) -> Matrix:
    """Gauss-Jordan with pivots of minimal valuation."""
    n = len(A)
    p = A[0][0].p
    M = [list(row) + [embed_rational(1, p) if i == j else PadicNumber.exact_zero(p) for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not M[r][col].is_zero():
                if piv is None or M[r][col].valuation() < M[piv][col].valuation():
                    piv = r
        if piv is None:
            raise DivisionByInexactZero("matrix is singular to working precision")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inverse()
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and not M[r][col].is_exact_zero():
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def min_valuation(A: Matrix):
    return min((x.valuation_lower_bound() for row in A for x in row), default=INFINITY)


# -- Jordan decomposition over Q_p ------------------------------------------------

@dataclass
class JordanData:
    """``L = B J B^-1`` with J block diagonal, ones on the superdiagonal."""

    blocks: list  # (eigenvalue PadicNumber, size, exact rational eigenvalue or None)
    B: Matrix
    Binv: Matrix
    B_exact: Matrix | None  # rational basis when every eigenvalue is rational


def charpoly_factors(L: Matrix):
    """Irreducible factors of the characteristic polynomial over Q with multiplicity."""
    x = sympy.Symbol("x")
    cp = _sym(L).charpoly(x).as_expr()
    _, factors = sympy.factor_list(cp, x)
    out = []
    for q, m in factors:
        out.append((sympy.Poly(q, x), m))
    out.sort(key=lambda t: (t[0].degree(), [str(c) for c in t[0].all_coeffs()]))
    return out, x


def _jordan_chains_rational(L: Matrix, lam: Fraction, mult: int) -> list[list[list[Fraction]]]:
    """Exact Jordan chains for a rational eigenvalue; each chain is [v1, ..., vk] with (L-lam)v1 = 0."""
    n = len(L)
    Nm = _sym(L) - sympy.Rational(lam.numerator, lam.denominator) * sympy.eye(n)
    kers = [sympy.zeros(n, 0)]
    k = 0
    P = sympy.eye(n)
    while True:
        k += 1
        P = P * Nm
        K = sympy.Matrix.hstack(*P.nullspace()) if P.nullspace() else sympy.zeros(n, 0)
        kers.append(K)
        if K.cols >= mult:
            break
        if k > n:
            raise ValueError("generalized eigenspace did not stabilise")
    s = k
    chains_top: list = []  # (top vector, length)

    def span_rank(vs):
        return sympy.Matrix.hstack(*vs).rank() if vs else 0

    for level in range(s, 0, -1):
        basis = [kers[level - 1][:, i] for i in range(kers[level - 1].cols)]
        for top, length in chains_top:
            if length >= level:
                basis.append((Nm ** (length - level)) * top)
        r = span_rank(basis)
        K = kers[level]
        for i in range(K.cols):
            v = K[:, i]
            if span_rank(basis + [v]) > r:
                basis.append(v)
                r += 1
                chains_top.append((v, level))
    chains = []
    for top, length in chains_top:
        vecs = [(Nm ** (length - 1 - i)) * top for i in range(length)]
        # clear denominators, keep primitive integer vectors
        chain = [_from_sym_vec(list(v)) for v in vecs]
        chains.append(chain)
    chains.sort(key=lambda c: (-len(c), [tuple(v) for v in c]))
    return chains


def _roots_mod_p(q: sympy.Poly, p: int) -> list[int]:
    coeffs = [sympy.Rational(c) for c in q.all_coeffs()]
    ints = []
    for c in coeffs:
        if c.q % p == 0:
            return []
        ints.append(int(c.p) * pow(int(c.q), -1, p) % p)
    roots = []
    for r in range(p):
        acc = 0
        for c in ints:
            acc = (acc * r + c) % p
        if acc == 0:
            roots.append(r)
    return roots


def hensel_lift(q: sympy.Poly, r: int, p: int, N: int) -> PadicNumber:
    """Lift a simple root r of q mod p to a root in Z_p known to N digits."""
    coeffs = [Fraction(int(sympy.Rational(c).p), int(sympy.Rational(c).q)) for c in q.all_coeffs()]
    m = p ** (N + 2)
    ints = [c.numerator * pow(c.denominator, -1, m) % m for c in coeffs]
    dints = [(c * (len(ints) - 1 - i)) % m for i, c in enumerate(ints[:-1])]

    def ev(cs, x, mod):
        acc = 0
        for c in cs:
            acc = (acc * x + c) % mod
        return acc

    if ev(dints, r, p) == 0:
        raise UnsupportedFieldExtension(f"root {r} mod {p} is not simple")
    x = r
    k = 1
    while k < N + 2:
        k = min(2 * k, N + 2)
        mod = p**k
        x = (x - ev(ints, x, mod) * pow(ev(dints, x, mod), -1, mod)) % mod
    return PadicNumber.from_parts(p, 0, x, N)


def _adjugate_poly(L: Matrix, x: sympy.Symbol):
    n = len(L)
    return (x * sympy.eye(n) - _sym(L)).adjugate()


def _eval_sym_poly(expr, x, val: PadicNumber, N: int) -> PadicNumber:
    P = sympy.Poly(expr, x)
    acc = PadicNumber.exact_zero(val.p)
    for c in P.all_coeffs():
        c = sympy.Rational(c)
        acc = acc * val + embed_rational(Fraction(int(c.p), int(c.q)), val.p, N)
    return acc


def jordan_over_Qp(L: Matrix, p: int, N: int) -> JordanData:
    """Jordan decomposition of a rational matrix over Q_p.

    Raises UnsupportedFieldExtension when an eigenvalue is not in Q_p (or is a
    repeated irrational eigenvalue), NonUnitEigenvalue when an eigenvalue is
    not a p-adic unit.
    """
    n = len(L)
    factors, x = charpoly_factors(L)
    blocks = []
    chains: list[list[list[PadicNumber]]] = []
    exact_chains: list | None = []
    adj = None
    for q, mult in factors:
        if q.degree() == 1:
            a, b = q.all_coeffs()
            lam = Fraction(int(sympy.Rational(-b / a).p), int(sympy.Rational(-b / a).q))
            if lam == 0 or lam.numerator % p == 0 or lam.denominator % p == 0:
                raise NonUnitEigenvalue(f"eigenvalue {lam} is not a {p}-adic unit")
            lam_p = embed_rational(lam, p, N)
            for chain in _jordan_chains_rational(L, lam, mult):
                blocks.append((lam_p, len(chain), lam))
                chains.append([[embed_rational(c, p, N) for c in v] for v in chain])
                if exact_chains is not None:
                    exact_chains.append(chain)
            continue
        if mult > 1:
            raise UnsupportedFieldExtension(f"repeated irrational eigenvalues ({q.as_expr()})^{mult}")
        roots = _roots_mod_p(q, p)
        if len(roots) != q.degree():
            raise UnsupportedFieldExtension(f"{q.as_expr()} does not split into distinct linear factors mod {p}")
        if 0 in roots:
            raise NonUnitEigenvalue(f"an eigenvalue is divisible by {p}")
        if adj is None:
            adj = _adjugate_poly(L, x)
        exact_chains = None
        for r in roots:
            lam_p = hensel_lift(q, r, p, N)
            best = None
            for j in range(n):
                col = [_eval_sym_poly(adj[i, j], x, lam_p, N) for i in range(n)]
                mv = min((c.valuation() for c in col if not c.is_zero()), default=INFINITY)
                if mv != INFINITY and (best is None or mv < best[0]):
                    best = (mv, col)
            if best is None:
                raise UnsupportedFieldExtension("eigenvector lost to precision")
            blocks.append((lam_p, 1, None))
            chains.append([best[1]])
    # scale each chain as a whole (keeps the superdiagonal ones) to content 1
    cols, exact_cols = [], []
    for ci, chain in enumerate(chains):
        mv = min(c.valuation_lower_bound() for v in chain for c in v)
        scale = Fraction(p) ** (-mv)
        cols.extend([c * embed_rational(scale, p, N) for c in v] for v in chain)
        if exact_chains is not None:
            exact_cols.extend([c * scale for c in v] for v in exact_chains[ci])
    B = [[cols[j][i] for j in range(n)] for i in range(n)]
    Binv = inverse_p(B)
    B_exact = None
    if exact_chains is not None:
        B_exact = [[exact_cols[j][i] for j in range(n)] for i in range(n)]
    return JordanData(blocks, B, Binv, B_exact)
