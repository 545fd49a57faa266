"""Brute-force membership ``Phi^n(alpha) in V`` for 0 <= n < n_max.

Exact rational iteration is used while the orbit points stay below a bit
budget.  Past it the orbit is followed modulo several primes near 2^61:
a nonzero residue proves non-membership exactly, and a candidate member is
then confirmed exactly when the budget allows (for monomial maps also
through factored prime-power representations), otherwise it is reported as
``modular`` (agreement modulo every sieve prime).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .errors import BitGrowthExceeded
from .padic import is_prime
from .problems import LinearOrbitProblem, OrbitProblem, TorusOrbitProblem

BIT_LIMIT = 400_000
SIEVE_SIZE = 4


@dataclass
class BruteForceResult:
    bits: list
    confirmation: dict = field(default_factory=dict)  # member index -> "exact" | "modular"

    @property
    def members(self) -> list:
        return [n for n, b in enumerate(self.bits) if b]

    @property
    def all_exact(self) -> bool:
        return all(v == "exact" for v in self.confirmation.values())


def sieve_primes(avoid, k: int = SIEVE_SIZE) -> list[int]:
    """The k largest primes below 2^61 dividing none of ``avoid``."""
    out = []
    q = (1 << 61) - 1
    while len(out) < k:
        if is_prime(q) and all(a % q for a in avoid if a):
            out.append(q)
        q -= 2
    return out


def _bits(x: Fraction) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


def _mod(x: Fraction, q: int) -> int:
    return x.numerator * pow(x.denominator, -1, q) % q


def _denominators(problem) -> list[int]:
    out = [a.denominator for a in problem.alpha]
    for F in problem.variety:
        out.extend(F.denominators())
    if isinstance(problem, LinearOrbitProblem):
        out.extend(x.denominator for row in problem.L for x in row)
    if isinstance(problem, OrbitProblem):
        for f in problem.maps:
            out.extend(f.denominators())
    if isinstance(problem, TorusOrbitProblem):
        out.extend(abs(a.numerator) for a in problem.alpha)
    return out


def _in_variety_exact(variety, x) -> bool:
    return all(F.evaluate(x) == 0 for F in variety)


def _in_variety_mod(variety, xm, q) -> bool:
    return all(F.evaluate_mod(xm, q) == 0 for F in variety)


def brute_force_membership(problem, n_max: int, strict: bool = False) -> list[bool]:
    """Membership bits; ``strict`` raises BitGrowthExceeded instead of accepting modular evidence."""
    res = brute_force_detail(problem, n_max)
    if strict and not res.all_exact:
        bad = [n for n, v in res.confirmation.items() if v != "exact"]
        raise BitGrowthExceeded(f"members {bad[:5]} confirmed only modulo sieve primes")
    return res.bits


def brute_force_detail(problem, n_max: int, bit_limit: int = BIT_LIMIT) -> BruteForceResult:
    if isinstance(problem, LinearOrbitProblem):
        return _linear(problem, n_max, bit_limit)
    if isinstance(problem, TorusOrbitProblem):
        return _torus(problem, n_max, bit_limit)
    if isinstance(problem, OrbitProblem):
        return _polymap(problem, n_max, bit_limit)
    raise TypeError(f"unsupported problem type {type(problem).__name__}")


# -- linear maps ---------------------------------------------------------------

def linear_orbit_point(problem: LinearOrbitProblem, n: int) -> tuple:
    """Exact L^n alpha (n >= 0) by repeated squaring."""
    from .linalg import matpow_q, matvec_q

    return tuple(matvec_q(matpow_q([list(r) for r in problem.L], n), problem.alpha))


def _linear(problem: LinearOrbitProblem, n_max: int, bit_limit: int) -> BruteForceResult:
    V = problem.variety
    g = problem.g
    # integer form: x_n = y_n / s_n with y_{n+1} = Lz y_n, s_{n+1} = dL s_n
    dL = 1
    for row in problem.L:
        for x in row:
            dL = math.lcm(dL, x.denominator)
    Lz = [[int(x * dL) for x in row] for row in problem.L]
    da = 1
    for a in problem.alpha:
        da = math.lcm(da, a.denominator)
    y = [int(a * da) for a in problem.alpha]
    s = da
    bits, conf = [], {}
    primes = None
    ym = None
    for n in range(n_max):
        if primes is None:
            x = tuple(Fraction(v, s) for v in y)
            member = _in_variety_exact(V, x)
            if member:
                conf[n] = "exact"
            bits.append(member)
            if max(abs(v).bit_length() for v in y) + s.bit_length() > bit_limit:
                primes = sieve_primes(_denominators(problem))
                ym = {q: ([v % q for v in y], s % q) for q in primes}
            y = [sum(Lz[i][j] * y[j] for j in range(g)) for i in range(g)]
            s *= dL
            if primes is not None:
                ym = {q: ([v % q for v in y], s % q) for q in primes}
        else:
            member = True
            for q in primes:
                yq, sq = ym[q]
                inv = pow(sq, -1, q)
                if not _in_variety_mod(V, [v * inv % q for v in yq], q):
                    member = False
                    break
            if member:
                conf[n] = "modular"
                try:
                    pt = linear_orbit_point(problem, n)
                    if max(_bits(c) for c in pt) <= 4 * bit_limit:
                        if _in_variety_exact(V, pt):
                            conf[n] = "exact"
                        else:
                            member = False
                            del conf[n]
                except (OverflowError, MemoryError):
                    pass
            bits.append(member)
            for q in primes:
                yq, sq = ym[q]
                ym[q] = ([sum(Lz[i][j] * yq[j] for j in range(g)) % q for i in range(g)], sq * dL % q)
    return BruteForceResult(bits, conf)


# -- coordinatewise polynomial maps ----------------------------------------------

def orbit_prefix(problem: OrbitProblem, n: int, bit_limit: int = BIT_LIMIT):
    """Exact points Phi^k(alpha), k < n, stopping early past the bit budget."""
    x = problem.alpha
    out = []
    for _ in range(n):
        out.append(x)
        if max(_bits(c) for c in x) > bit_limit:
            break
        x = problem.step(x)
    return out


def _polymap(problem: OrbitProblem, n_max: int, bit_limit: int) -> BruteForceResult:
    V = problem.variety
    bits, conf = [], {}
    x = problem.alpha
    seen = {}
    n = 0
    primes = None
    while n < n_max:
        if x in seen:
            # preperiodic: the rest of the orbit repeats exactly
            start = seen[x]
            period = n - start
            while n < n_max:
                b = bits[start + (n - start) % period]
                bits.append(b)
                if b:
                    conf[n] = "exact"
                n += 1
            return BruteForceResult(bits, conf)
        seen[x] = n
        member = _in_variety_exact(V, x)
        bits.append(member)
        if member:
            conf[n] = "exact"
        n += 1
        if max(_bits(c) for c in x) > bit_limit // 4:
            break
        x = problem.step(x)
    if n >= n_max:
        return BruteForceResult(bits, conf)
    primes = sieve_primes(_denominators(problem))
    xs = {q: [_mod(c, q) for c in problem.step(x)] for q in primes}
    coeffs = {q: [[_mod(c, q) for c in f.univariate_coeffs()] for f in problem.maps] for q in primes}

    def step_mod(v, q):
        out = []
        for cs, t in zip(coeffs[q], v):
            acc = 0
            for c in reversed(cs):
                acc = (acc * t + c) % q
            out.append(acc)
        return out

    while n < n_max:
        member = all(_in_variety_mod(V, xs[q], q) for q in primes)
        bits.append(member)
        if member:
            conf[n] = "modular"
        n += 1
        for q in primes:
            xs[q] = step_mod(xs[q], q)
    return BruteForceResult(bits, conf)


# -- monomial maps ------------------------------------------------------------------

def _factor_rational(x: Fraction) -> tuple[int, dict]:
    sign = -1 if x < 0 else 1
    f: dict = {}
    for prime, e in sympy.factorint(abs(x.numerator)).items():
        f[int(prime)] = f.get(int(prime), 0) + e
    for prime, e in sympy.factorint(x.denominator).items():
        f[int(prime)] = f.get(int(prime), 0) - e
    return sign, {k: v for k, v in f.items() if v}


def _matmul_int(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def _torus_member_factored(problem: TorusOrbitProblem, An, fac) -> bool | None:
    """Exact decision from factored coordinates; None when more than two classes survive."""
    g = problem.g
    coords = []
    for i in range(g):
        sign = 1
        exps: dict = {}
        for j in range(g):
            s, f = fac[j]
            e = An[i][j]
            if s < 0 and e % 2:
                sign = -sign
            for prime, k in f.items():
                exps[prime] = exps.get(prime, 0) + k * e
        coords.append((sign, exps))
    for F in problem.variety:
        groups: dict = {}
        for e, c in F.terms.items():
            sign = 1
            exps: dict = {}
            for (s, ex), k in zip(coords, e):
                if k:
                    if s < 0 and k % 2:
                        sign = -sign
                    for prime, v in ex.items():
                        exps[prime] = exps.get(prime, 0) + v * k
            key = tuple(sorted((pr, v) for pr, v in exps.items() if v))
            groups[key] = groups.get(key, 0) + sign * c
        live = [(k, c) for k, c in groups.items() if c != 0]
        if not live:
            continue
        if len(live) == 1:
            return False
        if len(live) > 2:
            return None
        (k1, c1), (k2, c2) = live
        # c1 m1 + c2 m2 = 0  <=>  m1 / m2 = -c2 / c1
        sgn, target = _factor_rational(-c2 / c1)
        if sgn < 0:
            return False
        ratio = dict(k1)
        for pr, v in k2:
            ratio[pr] = ratio.get(pr, 0) - v
        ratio = {pr: v for pr, v in ratio.items() if v}
        if ratio != target:
            return False
    return True


def torus_orbit_point(problem: TorusOrbitProblem, An) -> tuple:
    return tuple(
        math.prod((problem.alpha[j] ** An[i][j] for j in range(problem.g)), start=Fraction(1))
        for i in range(problem.g)
    )


def _torus(problem: TorusOrbitProblem, n_max: int, bit_limit: int) -> BruteForceResult:
    V = problem.variety
    g = problem.g
    A = [list(r) for r in problem.A]
    An = [[int(i == j) for j in range(g)] for i in range(g)]
    primes = sieve_primes(_denominators(problem))
    amod = {q: [_mod(a, q) for a in problem.alpha] for q in primes}
    fac = [_factor_rational(a) for a in problem.alpha]
    abits = [_bits(a) for a in problem.alpha]
    bits, conf = [], {}
    for n in range(n_max):
        size = max(sum(abs(An[i][j]) * abits[j] for j in range(g)) for i in range(g))
        if size <= bit_limit:
            pt = torus_orbit_point(problem, An)
            member = _in_variety_exact(V, pt)
            if member:
                conf[n] = "exact"
        else:
            member = True
            for q in primes:
                xm = [
                    math.prod((pow(amod[q][j], An[i][j] % (q - 1), q) for j in range(g)), start=1) % q
                    for i in range(g)
                ]
                if not _in_variety_mod(V, xm, q):
                    member = False
                    break
            if member:
                exact = _torus_member_factored(problem, An, fac)
                if exact is None:
                    conf[n] = "modular"
                elif exact:
                    conf[n] = "exact"
                else:
                    member = False
        bits.append(member)
        An = _matmul_int(A, An)
    return BruteForceResult(bits, conf)
