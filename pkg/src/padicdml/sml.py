"""Return sets of linear and monomial orbits via p-adic interpolation.

For an invertible rational matrix L with a good prime p (eigenvalues are
p-adic units in Q_p, ``L = B J B^-1`` with B, B^-1 integral) the points
``L^(j + 2pd w) alpha`` are analytic in w on Z_p.  Each residue class j
mod 2pd either lies entirely in V or meets V in the finitely many integer
zeros of ``Theta_j(w) = F(L^j B (J^d)^(2pw) B^-1 alpha)``.  Monomial maps
are handled the same way on p-adic logarithms of the coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .decomposition import ReturnSetDecomposition, canonical
from .errors import (
    CompositionDiverges,
    DivisionByInexactZero,
    InsufficientPrecision,
    NoCertificate,
    NonUnitEigenvalue,
    NoPrimeFound,
    OutsideConvergenceDisk,
    OutsideExpDomain,
    PrecisionExhausted,
    UnsupportedFieldExtension,
)
from .invariance import orbit_in_variety
from .jordan import JordanForm, analytic_power, choose_d, rescaled_power
from .linalg import (
    det_q,
    embed_matrix,
    jordan_over_Qp,
    matpow_q,
    matvec_p,
    matvec_q,
    min_valuation,
)
from .newton import StrassmanBound, strassman, zeros_in_Zp
from .oracle import (
    BIT_LIMIT,
    _factor_rational,
    _in_variety_exact,
    _in_variety_mod,
    _mod,
    _torus_member_factored,
    brute_force_detail,
    sieve_primes,
    torus_orbit_point,
)
from .padic import PadicNumber, embed_rational
from .poly import Poly
from .problems import LinearOrbitProblem, TorusOrbitProblem
from .series import PadicSeries, TailCertificate, exp_p, log_p

DEFAULT_N = 64
DEFAULT_D = 24
P_MAX = 10_000
MAX_PRIMES = 3
FALLBACK_WINDOW = 10_000
EXACT_INDEX_LIMIT = 50_000

RETRYABLE = (
    InsufficientPrecision,
    PrecisionExhausted,
    NoCertificate,
    OutsideConvergenceDisk,
    OutsideExpDomain,
    CompositionDiverges,
    DivisionByInexactZero,
)


@dataclass
class PrimeChoice:
    p: int
    jordan: object  # JordanData
    rejected: dict = field(default_factory=dict)


# -- prime selection ---------------------------------------------------------------

def _prime_order(hint, P_max):
    if hint:
        yield int(hint)
    for q in sympy.primerange(2, P_max + 1):
        if q != hint:
            yield int(q)


def _avoid(problem) -> list[int]:
    out = [a.denominator for a in problem.alpha]
    for F in problem.variety:
        out.extend(F.denominators())
    if isinstance(problem, LinearOrbitProblem):
        out.extend(x.denominator for row in problem.L for x in row)
    else:
        out.extend(abs(a.numerator) for a in problem.alpha)
    return [a for a in out if a not in (0, 1)]


def _matrix_of(problem):
    if isinstance(problem, LinearOrbitProblem):
        return [list(r) for r in problem.L]
    return [[Fraction(x) for x in r] for r in problem.A]


def select_prime(problem, N: int = DEFAULT_N, P_max: int = P_MAX, skip=()) -> PrimeChoice:
    """Smallest admissible prime (the hint is tried first)."""
    avoid = _avoid(problem)
    M = _matrix_of(problem)
    rejected: dict = {}
    for p in _prime_order(problem.prime_hint, P_max):
        if p in skip:
            continue
        if any(a % p == 0 for a in avoid):
            rejected[p] = "p divides a denominator or a torus coordinate"
            continue
        try:
            data = jordan_over_Qp(M, p, N)
        except (UnsupportedFieldExtension, NonUnitEigenvalue) as exc:
            rejected[p] = str(exc)
            continue
        if min_valuation(data.B) < 0 or min_valuation(data.Binv) < 0:
            rejected[p] = "change of basis not integral"
            continue
        return PrimeChoice(p, data, rejected)
    shown = dict(list(rejected.items())[:12])
    raise NoPrimeFound(
        f"no admissible prime up to {P_max}",
        diagnostics={"rejected": {str(k): v for k, v in shown.items()}, "tried": len(rejected)},
    )


# -- membership at a single index --------------------------------------------------

def _linear_point_mod(problem: LinearOrbitProblem, n: int, q: int) -> list[int]:
    g = problem.g
    M = [[_mod(x, q) for x in row] for row in problem.L]
    R = [[int(i == j) for j in range(g)] for i in range(g)]
    while n:
        if n & 1:
            R = [[sum(R[i][k] * M[k][j] for k in range(g)) % q for j in range(g)] for i in range(g)]
        n >>= 1
        if n:
            M = [[sum(M[i][k] * M[k][j] for k in range(g)) % q for j in range(g)] for i in range(g)]
    a = [_mod(x, q) for x in problem.alpha]
    return [sum(R[i][j] * a[j] for j in range(g)) % q for i in range(g)]


def linear_member_at(problem: LinearOrbitProblem, n: int):
    """"exact", "modular" or False for ``L^n alpha in V``."""
    primes = sieve_primes(_avoid(problem))
    for q in primes:
        if not _in_variety_mod(problem.variety, _linear_point_mod(problem, n, q), q):
            return False
    if n <= EXACT_INDEX_LIMIT:
        pt = matvec_q(matpow_q([list(r) for r in problem.L], n), problem.alpha)
        return "exact" if _in_variety_exact(problem.variety, pt) else False
    return "modular"


def _intpow(A, n):
    g = len(A)
    R = [[int(i == j) for j in range(g)] for i in range(g)]
    M = [list(r) for r in A]
    while n:
        if n & 1:
            R = [[sum(R[i][k] * M[k][j] for k in range(g)) for j in range(g)] for i in range(g)]
        n >>= 1
        if n:
            M = [[sum(M[i][k] * M[k][j] for k in range(g)) for j in range(g)] for i in range(g)]
    return R


def _intpow_mod(A, n, m):
    g = len(A)
    R = [[int(i == j) % m for j in range(g)] for i in range(g)]
    M = [[x % m for x in r] for r in A]
    while n:
        if n & 1:
            R = [[sum(R[i][k] * M[k][j] for k in range(g)) % m for j in range(g)] for i in range(g)]
        n >>= 1
        if n:
            M = [[sum(M[i][k] * M[k][j] for k in range(g)) % m for j in range(g)] for i in range(g)]
    return R


def torus_member_at(problem: TorusOrbitProblem, n: int):
    """"exact", "modular" or False for ``alpha^(A^n) in V``."""
    g = problem.g
    primes = sieve_primes(_avoid(problem))
    for q in primes:
        E = _intpow_mod(problem.A, n, q - 1)
        a = [_mod(x, q) for x in problem.alpha]
        pt = [math.prod((pow(a[j], E[i][j], q) for j in range(g)), start=1) % q for i in range(g)]
        if not _in_variety_mod(problem.variety, pt, q):
            return False
    if n > EXACT_INDEX_LIMIT:
        return "modular"
    An = _intpow(problem.A, n)
    size = max(sum(abs(An[i][j]) * (abs(problem.alpha[j].numerator).bit_length() + problem.alpha[j].denominator.bit_length()) for j in range(g)) for i in range(g))
    if size <= BIT_LIMIT:
        return "exact" if _in_variety_exact(problem.variety, torus_orbit_point(problem, An)) else False
    if max(abs(x).bit_length() for r in An for x in r) > 10 * BIT_LIMIT:
        return "modular"
    verdict = _torus_member_factored(problem, An, [_factor_rational(a) for a in problem.alpha])
    if verdict is None:
        return "modular"
    return "exact" if verdict else False


# -- one residue class -------------------------------------------------------------

@dataclass
class _ClassOutcome:
    progression: bool = False
    members: dict = field(default_factory=dict)  # index -> "exact" | "modular"
    heuristic: list = field(default_factory=list)
    search_exponent: int | None = None  # integer zeros are certified below j + R p^A


def _examine_class(thetas, j, R, p, member_at) -> _ClassOutcome | None:
    """None means every Theta vanishes to precision; the caller decides."""
    out = _ClassOutcome()
    bounds = [strassman(t) for t in thetas]
    live = [(b.T, i) for i, b in enumerate(bounds) if isinstance(b, StrassmanBound)]
    if not live:
        return None
    T, idx = min(live)
    if T == 0:
        return out
    iso = zeros_in_Zp(thetas[idx])
    if iso.identically_zero:
        return None
    for z in iso.zeros:
        A = int(z.approx.abs_prec) if z.approx.abs_prec != math.inf else None
        k = z.approx.lift_int() if not z.approx.is_zero() else 0
        if A is not None:
            out.search_exponent = A if out.search_exponent is None else min(out.search_exponent, A)
        n = j + R * k
        verdict = member_at(n)
        if verdict:
            out.members[n] = verdict
    for c, depth, _ in iso.unresolved:
        n = j + R * c
        out.heuristic.append(f"class {j}: disk {c} + {p}^{depth} Z_{p} not separated")
        verdict = member_at(n)
        if verdict:
            out.members[n] = verdict
    return out


def _nonconstant_floor(rows) -> Fraction:
    """Lower bound on the valuation of every non-constant coefficient, tails included."""
    out = math.inf
    for s in rows:
        for c in s.coeffs[1:]:
            if not c.is_exact_zero():
                out = min(out, c.valuation_lower_bound())
        if not s.is_polynomial:
            out = min(out, s.tail.vB + (s.degree + 1) * s.tail.vrho)
    return out


def _dominant_constant(V, point, kappa, N) -> bool:
    """Some generator has ``v(F(point)) < kappa``: its Theta has no zero in Z_p.

    With integral data every non-constant coefficient of Theta has valuation at
    least kappa, so a constant term of smaller valuation strictly dominates.
    """
    for F in V:
        val = F.evaluate_padic(point, N)
        if not val.is_zero() and val.valuation() < kappa:
            return True
    return False


def _series_matvec(P, v, p):
    """Vector of series ``sum_k P[i][k] * v[k]`` with constant p-adic v."""
    out = []
    for row in P:
        acc = PadicSeries(p, [PadicNumber.exact_zero(p)], TailCertificate.zero())
        for s, c in zip(row, v):
            if c.is_exact_zero():
                continue
            acc = acc + s.scalar_mul(c)
        out.append(acc)
    return out


def _const_times_series(M, S, p):
    """Matrix product of a constant p-adic matrix and a series matrix."""
    n = len(M)
    cols = len(S[0])
    out = []
    for i in range(n):
        row = []
        for c in range(cols):
            acc = PadicSeries(p, [PadicNumber.exact_zero(p)], TailCertificate.zero())
            for k in range(len(S)):
                if M[i][k].is_exact_zero():
                    continue
                acc = acc + S[k][c].scalar_mul(M[i][k])
            row.append(acc)
        out.append(row)
    return out


def _assemble(outcomes, progressions, prefix, meta) -> ReturnSetDecomposition:
    members = dict(prefix)
    heuristic = []
    exps = []
    for o in outcomes:
        members.update(o.members)
        heuristic.extend(o.heuristic)
        if o.search_exponent is not None:
            exps.append(o.search_exponent)
    modular = sorted(n for n, v in members.items() if v == "modular")
    cert = "heuristic" if heuristic or modular else "rigorous"
    diagnostics = dict(meta.pop("diagnostics", {}))
    if heuristic:
        diagnostics["unresolved"] = heuristic[:10]
    if modular:
        diagnostics["modular_members"] = modular[:10]
    if exps:
        diagnostics["integer_zero_search"] = f"p-adic zeros resolved modulo {meta['prime']}^{min(exps)}"
    return canonical(progressions, list(members), certificate=cert, diagnostics=diagnostics, **meta)


# -- linear maps ----------------------------------------------------------------

def _linear_at_prime(problem: LinearOrbitProblem, V, p, data, N, D) -> ReturnSetDecomposition:
    g = problem.g
    J = JordanForm.from_data(data)
    d = choose_d(J)
    a = analytic_power(J, d)
    R = 2 * p * d
    P = _const_times_series(data.B, rescaled_power(a, 0, D), p)
    Jm = J.matrix()
    gamma = matvec_p(data.Binv, [embed_rational(x, p, N) if x else PadicNumber.exact_zero(p) for x in problem.alpha])
    Fms = [F.to_multiseries(p, N) for F in V]
    e = max(F.degree() for F in V)
    rec = math.comb(g + e, e)
    Lq = [list(r) for r in problem.L]
    Lp = embed_matrix(Lq, p, N)
    x_p = [embed_rational(x, p, N) if x else PadicNumber.exact_zero(p) for x in problem.alpha]
    outcomes, progressions = [], []
    kappa = _nonconstant_floor(s for row in P for s in row)
    LR = None
    for j in range(R):
        if not _dominant_constant(V, x_p, kappa, N):
            xs = _series_matvec(P, gamma, p)
            thetas = [Fm.substitute(xs, D) for Fm in Fms]
            res = _examine_class(thetas, j, R, p, lambda n: linear_member_at(problem, n))
            if res is None:
                # zero to precision: the class sequence satisfies a linear recurrence
                # of order <= rec, so rec exact zeros prove it vanishes identically
                LR = LR or matpow_q(Lq, R)
                y = matvec_q(matpow_q(Lq, j), problem.alpha)
                for k in range(rec):
                    if not _in_variety_exact(V, y):
                        raise InsufficientPrecision(f"class {j} vanishes to precision but not at index {j + R * k}")
                    y = matvec_q(LR, y)
                progressions.append((j, R))
            else:
                outcomes.append(res)
        gamma = matvec_p(Jm, gamma)
        x_p = matvec_p(Lp, x_p)
    meta = {"prime": p, "parameters": {"d": d, "M": R, "N0": 0, "N": N, "D": D, "strategy": "linear"}}
    return _assemble(outcomes, progressions, {}, meta)


def _stable_image(problem: LinearOrbitProblem):
    """Restriction of L to the image of L^g, with the start point pushed g steps."""
    g = problem.g
    L = [list(r) for r in problem.L]
    Lg = matpow_q(L, g)
    cols = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in Lg]).columnspace()
    start = matvec_q(Lg, problem.alpha)
    r = len(cols)
    if r == 0:
        return None, start
    W = sympy.Matrix.hstack(*cols)
    pinv = (W.T * W).inv() * W.T
    Ls = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in L])
    C = pinv * Ls * W
    y0 = pinv * sympy.Matrix([sympy.Rational(x.numerator, x.denominator) for x in start])

    def frac(v):
        v = sympy.Rational(v)
        return Fraction(int(v.p), int(v.q))

    ys = [Poly.var(r, k) for k in range(r)]
    coords = []
    for i in range(g):
        acc = Poly.const(r, 0)
        for k in range(r):
            if W[i, k] != 0:
                acc = acc + ys[k] * frac(W[i, k])
        coords.append(acc)
    Vr = tuple(F.substitute(coords) for F in problem.variety)
    reduced = LinearOrbitProblem.make(
        [[frac(C[i, k]) for k in range(r)] for i in range(r)],
        [frac(y0[k]) for k in range(r)],
        Vr,
        problem.prime_hint,
    )
    return reduced, start


def solve_linear(problem: LinearOrbitProblem, N: int = DEFAULT_N, D: int = DEFAULT_D, P_max: int = P_MAX,
                 max_primes: int = MAX_PRIMES, fallback_window: int = FALLBACK_WINDOW) -> ReturnSetDecomposition:
    V = [F for F in problem.variety if not F.is_zero()]
    if not V:
        return canonical([(0, 1)], [], certificate="rigorous", parameters={"M": 1})
    if det_q([list(r) for r in problem.L]) == 0:
        return _solve_singular(problem, N, D, P_max, max_primes, fallback_window)
    return _search(problem, V, _linear_at_prime, N, D, P_max, max_primes, fallback_window)


def _solve_singular(problem, N, D, P_max, max_primes, fallback_window):
    g = problem.g
    reduced, start = _stable_image(problem)
    prefix = {}
    x = list(problem.alpha)
    for n in range(g):
        if _in_variety_exact(problem.variety, x):
            prefix[n] = "exact"
        x = matvec_q([list(r) for r in problem.L], x)
    if reduced is None:
        progs = [(g, 1)] if _in_variety_exact(problem.variety, [Fraction(0)] * g) else []
        return canonical(progs, list(prefix), certificate="rigorous", parameters={"N0": g, "M": 1},
                         diagnostics={"stable_image_dim": 0})
    inner = solve_linear(reduced, N, D, P_max, max_primes, fallback_window)
    params = dict(inner.parameters)
    params["N0"] = params.get("N0", 0) + g
    diag = dict(inner.diagnostics)
    diag["stable_image_dim"] = reduced.g
    return canonical(
        [(s + g, m) for s, m in inner.progressions],
        [n + g for n in inner.exceptional] + list(prefix),
        certificate=inner.certificate,
        prime=inner.prime,
        parameters=params,
        diagnostics=diag,
    )


def _search(problem, V, at_prime, N, D, P_max, max_primes, fallback_window):
    attempts = []
    skip = set()
    fallback = None
    for _ in range(max_primes):
        try:
            choice = select_prime(problem, N, P_max, skip)
        except NoPrimeFound as exc:
            attempts.append({"error": str(exc), **exc.diagnostics})
            break
        p = choice.p
        skip.add(p)
        for scale in (1, 2):
            NN, DD = N * scale, D * scale
            try:
                data = choice.jordan if scale == 1 else jordan_over_Qp(_matrix_of(problem), p, NN)
                res = at_prime(problem, V, p, data, NN, DD)
            except RETRYABLE as exc:
                attempts.append({"prime": p, "N": NN, "error": f"{type(exc).__name__}: {exc}"})
                continue
            if res.certificate == "rigorous":
                return res
            fallback = fallback or res
            break
    if fallback is not None:
        fallback.diagnostics["attempts"] = attempts
        return fallback
    return brute_force_only(problem, fallback_window, attempts)


def brute_force_only(problem, window: int, attempts=()) -> ReturnSetDecomposition:
    """Decomposition read off brute force on ``[0, window)``; claims nothing beyond it."""
    bits = brute_force_detail(problem, window).bits
    W = len(bits)
    best = None
    for period in range(1, W // 4 + 1):
        # earliest start from which the bits look periodic with this period
        s = W - period
        while s > 0 and bits[s - 1] == bits[s - 1 + period]:
            s -= 1
        if s <= W // 2:
            best = (s, period)
            break
    if best is None:
        progs, exc = [], [n for n, b in enumerate(bits) if b]
    else:
        s, period = best
        progs = [(s + r, period) for r in range(period) if bits[s + r]]
        exc = [n for n in range(s) if bits[n]]
    return canonical(progs, exc, certificate="brute-force-only",
                     parameters={"n_max": window}, diagnostics={"attempts": list(attempts)})


# -- monomial maps --------------------------------------------------------------

def _teichmuller(u: PadicNumber, N: int) -> PadicNumber:
    p = u.p
    if p == 2:
        return embed_rational(1 if u.unit % 4 == 1 else -1, 2, N)
    return u ** (p ** (N + 1))


def _eventual_period_mod(A, m, limit=100_000):
    g = len(A)
    seen = {}
    cur = [[int(i == j) % m for j in range(g)] for i in range(g)]
    for n in range(limit):
        key = tuple(x for r in cur for x in r)
        if key in seen:
            return seen[key], n - seen[key]
        seen[key] = n
        cur = [[sum(A[i][k] * cur[k][j] for k in range(g)) % m for j in range(g)] for i in range(g)]
    raise PrecisionExhausted(f"exponent matrix powers mod {m} did not cycle within {limit} steps")


def _torus_at_prime(problem: TorusOrbitProblem, V, p, data, N, D) -> ReturnSetDecomposition:
    g = problem.g
    A = [list(r) for r in problem.A]
    J = JordanForm.from_data(data)
    d = choose_d(J)
    m = p - 1 if p != 2 else 2
    n0, per = _eventual_period_mod(A, m)
    dd = math.lcm(d, per)
    a = analytic_power(J, dd)
    R = 2 * p * dd
    alpha = [embed_rational(x, p, N) for x in problem.alpha]
    omega = [_teichmuller(u, N) for u in alpha]
    ell = [log_p(u / w) for u, w in zip(alpha, omega)]
    P = _const_times_series(data.B, rescaled_power(a, 0, D), p)
    v = _series_matvec(P, matvec_p(data.Binv, ell), p)
    Fms = [F.to_multiseries(p, N) for F in V]
    prefix = {}
    for n in range(n0):
        verdict = torus_member_at(problem, n)
        if verdict:
            prefix[n] = verdict
    # unit exponents only matter modulo the order of (Z/p^N)^*, a divisor of MOD
    MOD = p ** (N + 4) * m
    cache: dict = {}
    outcomes, progressions = [], []
    An = _intpow_mod(A, n0, MOD)
    kappa = _nonconstant_floor(v)
    for j in range(R):
        idx = n0 + j
        point = [math.prod((alpha[k] ** An[i][k] for k in range(g)), start=embed_rational(1, p, N)) for i in range(g)]
        if _dominant_constant(V, point, kappa, N):
            An = [[sum(A[i][k] * An[k][c] for k in range(g)) % MOD for c in range(g)] for i in range(g)]
            continue
        Mj = embed_matrix([[Fraction(x) for x in r] for r in An], p, N)
        E = [row[0] for row in _const_times_series(Mj, [[s] for s in v], p)]
        xs = []
        for i in range(g):
            c = embed_rational(1, p, N)
            for k in range(g):
                c = c * omega[k] ** (An[i][k] % m)
            xs.append(exp_p(E[i], N).scalar_mul(c))
        thetas = [Fm.substitute(xs, D) for Fm in Fms]
        res = _examine_class(thetas, idx, R, p, lambda n: torus_member_at(problem, n))
        if res is None:
            progressions.append((idx, R))
            res = _torus_identically_zero(problem, V, idx, R, cache)
        outcomes.append(res)
        An = [[sum(A[i][k] * An[k][c] for k in range(g)) % MOD for c in range(g)] for i in range(g)]
    meta = {"prime": p, "parameters": {"d": dd, "M": R, "N0": n0, "N": N, "D": D, "strategy": "torus"}}
    return _assemble(outcomes, progressions, prefix, meta)


def _point_bits(problem, An) -> int:
    return max(
        sum(abs(An[i][j]) * (abs(a.numerator).bit_length() + a.denominator.bit_length()) for j, a in enumerate(problem.alpha))
        for i in range(problem.g)
    )


def _invariant_tail_start(problem, V, limit: int):
    """Least n <= limit from which the orbit provably stays in V, or None."""
    A = [list(r) for r in problem.A]
    An = _intpow(A, 0)
    attempts = 0
    for n in range(limit + 1):
        if _point_bits(problem, An) > 4096:
            return None
        y = torus_orbit_point(problem, An)
        if _in_variety_exact(V, y):
            attempts += 1
            if orbit_in_variety(V, None, y, problem.g, torus_A=A):
                return n
            if attempts >= 3:
                return None
        An = [[sum(A[i][k] * An[k][c] for k in range(len(A))) for c in range(len(A))] for i in range(len(A))]
    return None


def _torus_identically_zero(problem, V, idx, R, cache) -> _ClassOutcome:
    """Outcome for a class whose Theta vanishes to precision; heuristic unless invariance is proven."""
    out = _ClassOutcome(progression=True)
    if "tail" not in cache:
        cache["tail"] = _invariant_tail_start(problem, V, idx)
    if cache["tail"] is not None and cache["tail"] <= idx:
        return out
    if R <= 64 and idx <= 64:
        AR = _intpow(problem.A, R)
        An = _intpow(problem.A, idx)
        if max(abs(x) for r in AR for x in r) <= 16 and _point_bits(problem, An) <= 4096:
            if orbit_in_variety(V, None, torus_orbit_point(problem, An), problem.g, torus_A=AR):
                return out
    for k in range(8):
        if not torus_member_at(problem, idx + R * k):
            raise InsufficientPrecision(f"class {idx} vanishes to precision but not at index {idx + R * k}")
    out.heuristic.append(f"class {idx}: vanishes to precision, invariance not proven")
    return out


def solve_torus(problem: TorusOrbitProblem, N: int = DEFAULT_N, D: int = DEFAULT_D, P_max: int = P_MAX,
                max_primes: int = MAX_PRIMES, fallback_window: int = 2000) -> ReturnSetDecomposition:
    V = [F for F in problem.variety if not F.is_zero()]
    if not V:
        return canonical([(0, 1)], [], certificate="rigorous", parameters={"M": 1})
    if all(abs(a) == 1 for a in problem.alpha):
        return _finite_torus_orbit(problem, V)
    return _search(problem, V, _torus_at_prime, N, D, P_max, max_primes, fallback_window)


def _finite_torus_orbit(problem: TorusOrbitProblem, V) -> ReturnSetDecomposition:
    """Sign vectors form a finite orbit: read the return set off its cycle."""
    seen: dict = {}
    x = problem.alpha
    bits = []
    while x not in seen:
        seen[x] = len(bits)
        bits.append(_in_variety_exact(V, x))
        x = tuple(math.prod((x[j] ** e for j, e in enumerate(row)), start=Fraction(1)) for row in problem.A)
    start = seen[x]
    period = len(bits) - start
    progs = [(n, period) for n in range(start, len(bits)) if bits[n]]
    exc = [n for n in range(start) if bits[n]]
    return canonical(progs, exc, certificate="rigorous", parameters={"M": period, "N0": start, "strategy": "finite-orbit"},
                     diagnostics={"finite_orbit": len(bits)})
