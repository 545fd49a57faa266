"""Return sets for coordinatewise polynomial maps.

Near an attracting periodic point beta of period M whose multipliers agree
(a homothety ``lam``), ``Psi = Phi^M`` is conjugate to ``y -> lam y`` by a
certified h.  Once the orbit is inside the domain of h,

    Phi^(N_j + M k)(alpha) = beta_j + h_j(lam^k u_j),

so membership in V for the class j means ``Theta_j(lam^k) = 0`` with
``Theta_j(z) = F(beta_j + h_j(z u_j))``.  Either Theta_j vanishes identically
or its zeros have finitely many valuations, which pins down k.  Near an
indifferent point the same chart is used with ``lam^k`` interpolated by
``exp(2p w log lam^d)`` on residue classes of k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .decomposition import ReturnSetDecomposition, canonical
from .errors import (
    AllStrategiesFailed,
    BasinNotReached,
    CompositionDiverges,
    CrossCheckFailed,
    DivisionByInexactZero,
    InsufficientPrecision,
    MultiplicativeRelationFound,
    NoCertificate,
    NonUnitEigenvalue,
    NoPeriodicPointFound,
    NotHomothety,
    OutsideConvergenceDisk,
    OutsideExpDomain,
    PrecisionExhausted,
    UnsupportedFieldExtension,
    UnsupportedRegime,
    ZeroMultiplier,
)
from .invariance import compose_step, orbit_in_variety
from .linearize import Conjugacy, LocalMap, linearize_attracting, linearize_indifferent
from .newton import IdenticallyZeroToPrec, candidate_orbit_indices, strassman, zeros_in_Zp
from .oracle import (
    BIT_LIMIT,
    _bits,
    _denominators,
    _in_variety_exact,
    _in_variety_mod,
    _mod,
    brute_force_detail,
    sieve_primes,
)
from .padic import INFINITY, PadicNumber, embed_rational, rational_reconstruction, teichmuller_order
from .poly import Poly
from .problems import OrbitProblem, variety_is_everything
from .series import MultiSeries, PadicSeries, TailCertificate, exp_p, log_p
from .sml import brute_force_only

ATTRACTING_PRIME_LIMIT = 100
TARGET_DIGITS = 40

FAILURES = (
    BasinNotReached,
    NoPeriodicPointFound,
    NotHomothety,
    ZeroMultiplier,
    UnsupportedRegime,
    NonUnitEigenvalue,
    MultiplicativeRelationFound,
    UnsupportedFieldExtension,
    InsufficientPrecision,
    PrecisionExhausted,
    NoCertificate,
    OutsideConvergenceDisk,
    OutsideExpDomain,
    CompositionDiverges,
    DivisionByInexactZero,
)


@dataclass
class PeriodicPointData:
    """A point fixed by ``Phi^M`` with its coordinate multipliers."""

    beta: list
    period: int
    multipliers: list
    classification: str  # attracting-homothety | indifferent-diagonal | unsupported
    prime: int
    first_close: int = 0  # first orbit index in the residue disk of beta

    def to_json(self) -> dict:
        return {
            "beta": [b.to_json() for b in self.beta],
            "period": self.period,
            "multipliers": [m.to_json() for m in self.multipliers],
            "classification": self.classification,
            "prime": self.prime,
        }


@dataclass
class Chart:
    """Linearizing chart for the residue class ``n = N_j mod M``."""

    j: int
    N_j: int
    beta: list
    conj: Conjugacy
    u: list  # h^-1(Phi^N_j(alpha) - beta)
    rational_beta: list | None = None


@dataclass
class AttractingSetup:
    pp: PeriodicPointData
    N0: int
    charts: list = field(default_factory=list)


# -- orbit bookkeeping ---------------------------------------------------------

class _Orbit:
    """Exact, modular and p-adic views of one orbit, extended on demand."""

    def __init__(self, problem: OrbitProblem):
        self.problem = problem
        self.exact = [problem.alpha]
        self.exact_done = False
        self.primes = None
        self.mod: dict = {}
        self.padic: dict = {}
        self.invariant_from = False  # unknown; then None (not found) or an index

    def exact_point(self, n: int):
        while len(self.exact) <= n and not self.exact_done:
            x = self.exact[-1]
            if max(_bits(c) for c in x) > BIT_LIMIT // 4:
                self.exact_done = True
                break
            self.exact.append(self.problem.step(x))
        return self.exact[n] if n < len(self.exact) else None

    def _mod_point(self, n: int, q: int):
        pts = self.mod.setdefault(q, [[_mod(a, q) for a in self.problem.alpha]])
        coeffs = [[_mod(c, q) for c in f.univariate_coeffs()] for f in self.problem.maps]
        while len(pts) <= n:
            out = []
            for cs, t in zip(coeffs, pts[-1]):
                acc = 0
                for c in reversed(cs):
                    acc = (acc * t + c) % q
                out.append(acc)
            pts.append(out)
        return pts[n]

    def member(self, n: int):
        """"exact", "modular" or False."""
        V = self.problem.variety
        x = self.exact_point(n)
        if x is not None:
            return "exact" if _in_variety_exact(V, x) else False
        if self.primes is None:
            self.primes = sieve_primes(_denominators(self.problem))
        for q in self.primes:
            if not _in_variety_mod(V, self._mod_point(n, q), q):
                return False
        return "modular"

    def padic_point(self, n: int, p: int, N: int) -> list:
        pts = self.padic.setdefault((p, N), [[embed_rational(a, p, N) if a else PadicNumber.exact_zero(p) for a in self.problem.alpha]])
        while len(pts) <= n:
            pts.append([f.evaluate_padic([x], N) for f, x in zip(self.problem.maps, pts[-1])])
        return pts[n]

    def preperiod(self, K: int):
        """(start, period) when an exact repeat shows up within K steps."""
        seen = {}
        for n in range(K + 1):
            x = self.exact_point(n)
            if x is None:
                return None
            if x in seen:
                return seen[x], n - seen[x]
            seen[x] = n
        return None


# -- periodic points --------------------------------------------------------------

def _iterate(f: Poly, M: int) -> Poly:
    acc = Poly.var(1, 0)
    for _ in range(M):
        acc = f.substitute([acc])
    return acc


def _hensel(coeffs: list, r: int, p: int, N: int) -> PadicNumber:
    """Lift a simple root r mod p of the polynomial with p-integral rational ``coeffs``."""
    cs = [embed_rational(c, p, N + 4) for c in coeffs]
    dcs = [c * k for k, c in enumerate(cs)][1:]

    def ev(poly, x):
        acc = PadicNumber.exact_zero(p)
        for c in reversed(poly):
            acc = acc * x + c
        return acc

    x = embed_rational(r, p, N + 4) if r else PadicNumber.inexact_zero(p, N + 4)
    for _ in range(2 * N.bit_length() + 4):
        fx = ev(cs, x)
        if fx.is_zero():
            break
        x = x - fx / ev(dcs, x)
    return x.with_abs_prec(N) if not x.is_zero() else PadicNumber.inexact_zero(p, N)


def periodic_points(f: Poly, M: int, p: int, N: int) -> list:
    """Simple roots in Z_p of ``f^M(t) - t`` as (beta, multiplier) pairs."""
    fM = _iterate(f, M)
    g = fM - Poly.var(1, 0)
    coeffs = g.univariate_coeffs()
    if all(c == 0 for c in coeffs):
        return []
    dcoeffs = [c * k for k, c in enumerate(coeffs)][1:]
    out = []
    for r in range(p):
        if sum(_mod(c, p) * pow(r, k, p) for k, c in enumerate(coeffs)) % p:
            continue
        if sum(_mod(c, p) * pow(r, k, p) for k, c in enumerate(dcoeffs)) % p == 0:
            continue  # multiple root mod p: skipped
        beta = _hensel(coeffs, r, p, N)
        mu = fM.derivative().evaluate_padic([beta], N)
        out.append((beta, mu))
    return out


def _admissible(problem: OrbitProblem, p: int) -> bool:
    return all(d % p for d in _denominators(problem) if d)


def _classify(mus) -> str:
    if all(not m.is_zero() and m.valuation() > 0 for m in mus):
        if all(m.agrees_with(mus[0]) for m in mus):
            return "attracting-homothety"
        return "unsupported"
    if all(not m.is_zero() and m.valuation() == 0 for m in mus):
        return "indifferent-diagonal"
    return "unsupported"


def find_periodic_point(problem: OrbitProblem, p: int, kind: str | None = None) -> PeriodicPointData:
    """Periodic point whose residue disk the orbit enters, smallest M first.

    ``kind`` restricts the classification ("attracting-homothety" or
    "indifferent-diagonal").  Ties break by the first index of entry, then by
    beta mod p.
    """
    b = problem.bounds
    N = b.N
    orbit = _Orbit(problem)
    g = problem.g
    for M in range(1, b.M_max + 1):
        per_coord = [periodic_points(f, M, p, N) for f in problem.maps]
        if any(not c for c in per_coord):
            continue
        for n in range(b.K_burn_in + 1):
            x = orbit.padic_point(n, p, N)
            choice = []
            for i in range(g):
                close = [(bt, mu) for bt, mu in per_coord[i] if (x[i] - bt).valuation_lower_bound() >= 1]
                close.sort(key=lambda t: t[0].lift_int() % p if not t[0].is_zero() else 0)
                if not close:
                    break
                choice.append(close[0])
            if len(choice) < g:
                continue
            mus = [mu for _, mu in choice]
            cls = _classify(mus)
            if kind is not None and cls != kind:
                break
            return PeriodicPointData([bt for bt, _ in choice], M, mus, cls, p, n)
    raise NoPeriodicPointFound(f"no periodic point of period <= {b.M_max} near the orbit at p = {p}")


# -- charts ------------------------------------------------------------------------

def _taylor_shift(poly: Poly, beta: PadicNumber, N: int) -> list:
    """Coefficients of ``poly(beta + y) - beta`` in y."""
    p = beta.p
    cs = [embed_rational(c, p, N) if c else PadicNumber.exact_zero(p) for c in poly.univariate_coeffs()]
    # synthetic division repeated: Horner shifts
    out = list(cs)
    n = len(out)
    for k in range(n):
        for i in range(n - 2, k - 1, -1):
            out[i] = out[i] + beta * out[i + 1]
    out[0] = out[0] - beta
    return out


def local_map(problem: OrbitProblem, M: int, beta: list, N: int) -> LocalMap:
    """The germ ``y -> Phi^M(beta + y) - beta`` as a LocalMap."""
    g = problem.g
    p = beta[0].p
    comps = []
    for i, f in enumerate(problem.maps):
        cs = _taylor_shift(_iterate(f, M), beta[i], N)
        coeffs = {}
        for k, c in enumerate(cs):
            if k == 0 or c.is_exact_zero():
                continue
            e = tuple(k if j == i else 0 for j in range(g))
            coeffs[e] = c
        coeffs[(0,) * g] = cs[0] if not cs[0].is_exact_zero() else PadicNumber.inexact_zero(p, N)
        comps.append(MultiSeries(p, g, coeffs, max(len(cs) - 1, 1), TailCertificate.zero()))
    return LocalMap.from_series(comps)


def _distance_val(x: list, beta: list):
    return min((xi - bi).valuation_lower_bound() for xi, bi in zip(x, beta))


def enter_basin(problem: OrbitProblem, pp: PeriodicPointData, conj: Conjugacy, margin=0, start: int = 0, step: int = 1) -> int:
    """Least ``n = start + step*t <= start + K_burn_in`` with ``Phi^n(alpha)`` inside the chart."""
    orbit = _Orbit(problem)
    N = problem.bounds.N
    for n in range(start, start + problem.bounds.K_burn_in + 1, step):
        x = orbit.padic_point(n, pp.prime, N)
        if _distance_val(x, pp.beta) > conj.radius_val + margin:
            return n
    raise BasinNotReached(f"orbit not within p^-{conj.radius_val + margin} of beta after {problem.bounds.K_burn_in} steps")


def _rational_beta(problem, M, beta) -> list | None:
    """Exact rational periodic point equal to beta, when there is one."""
    out = []
    for f, b in zip(problem.maps, beta):
        r = rational_reconstruction(b)
        if r is None:
            return None
        fM = _iterate(f, M)
        if fM.evaluate((r,)) != r:
            return None
        out.append(r)
    return out


def _margin(conj: Conjugacy, D: int) -> Fraction:
    # tail of h at |x| = p^-(c + m) is below p^-(c + (D+1) m)
    if conj.radius_val == -INFINITY:
        return Fraction(0)
    return Fraction(math.ceil(Fraction(TARGET_DIGITS) / (D + 1)))


def attracting_setup(problem: OrbitProblem, p: int) -> AttractingSetup:
    """Periodic point, burn-in and one chart per residue class mod M."""
    b = problem.bounds
    N, D = b.N, b.D
    pp = find_periodic_point(problem, p, "attracting-homothety")
    M = pp.period
    orbit = _Orbit(problem)
    charts = []
    N0 = None
    x_start = pp.first_close
    beta_j = pp.beta
    for j in range(M):
        m = local_map(problem, M, beta_j, N)
        conj = linearize_attracting(m, D)
        data = PeriodicPointData(beta_j, M, pp.multipliers, pp.classification, p)
        Nj = enter_basin(problem, data, conj, _margin(conj, D), start=x_start + j, step=M)
        if j == 0:
            N0 = Nj
        y = [xi - bi for xi, bi in zip(orbit.padic_point(Nj, p, N), beta_j)]
        u = conj.invert(y)
        charts.append(Chart(j, Nj, beta_j, conj, u, _rational_beta(problem, M, beta_j)))
        beta_j = [f.evaluate_padic([bi], N) for f, bi in zip(problem.maps, beta_j)]
    pp.first_close = x_start
    return AttractingSetup(pp, N0, charts)


def _chart_series(chart: Chart, scale: list, D: int) -> list:
    """Coordinates ``beta + h(s)`` for the series vector s."""
    H = [hi.substitute(scale, D) for hi in chart.conj.h]
    return [Hi + PadicSeries.constant(bi.p, bi) for Hi, bi in zip(H, chart.beta)]


def theta_attracting(problem: OrbitProblem, chart: Chart, F: Poly, D: int, N: int) -> PadicSeries:
    """``z -> F(beta + h(z u))`` as a certified series."""
    p = chart.beta[0].p
    zero = PadicNumber.exact_zero(p)
    lin = [PadicSeries(p, [zero, ui], TailCertificate.zero()) for ui in chart.u]
    X = _chart_series(chart, lin, D)
    theta = F.to_multiseries(p, N).substitute(X, D)
    if chart.rational_beta is not None and F.evaluate(chart.rational_beta) == 0:
        # beta lies on V exactly, so Theta(0) = 0 exactly
        theta = PadicSeries(p, [zero] + list(theta.coeffs[1:]), theta.tail)
    return theta


def attracting_identity_residual(problem: OrbitProblem, setup: AttractingSetup, j: int, k: int):
    """Valuation of ``Phi^(N_j + kM)(alpha) - beta_j - h_j(lam^k u_j)``."""
    chart = setup.charts[j]
    M = setup.pp.period
    N = problem.bounds.N
    p = setup.pp.prime
    orbit = _Orbit(problem)
    x = orbit.padic_point(chart.N_j + k * M, p, N)
    lam = setup.pp.multipliers[0]
    hv = chart.conj.evaluate([ui * lam**k for ui in chart.u])
    return min((xi - bi - hi).valuation_lower_bound() for xi, bi, hi in zip(x, chart.beta, hv))


# -- strategies ------------------------------------------------------------------

def _prefix(orbit: _Orbit, indices) -> dict:
    out = {}
    for n in indices:
        v = orbit.member(n)
        if v:
            out[n] = v
    return out


def _one_step_invariant(problem: OrbitProblem, V, orbit: _Orbit):
    """Earliest small orbit index from which an ideal invariant under one step proves membership."""
    if orbit.invariant_from is False:
        orbit.invariant_from = None
        tried = 0
        for s in range(problem.bounds.K_burn_in):
            y = orbit.exact_point(s)
            if y is None or max(_bits(c) for c in y) > 2048:
                break
            if not _in_variety_exact(V, y):
                continue
            if orbit_in_variety(V, list(problem.maps), y, problem.g):
                orbit.invariant_from = s
                break
            tried += 1
            if tried >= 3:
                break
    return orbit.invariant_from


def _invariant_class(problem: OrbitProblem, V, orbit: _Orbit, start: int, M: int) -> bool:
    s = _one_step_invariant(problem, V, orbit)
    if s is not None and s <= start:
        return True
    y0 = orbit.exact_point(start)
    if y0 is None or max(_bits(c) for c in y0) > 2048:
        return False
    if max(f.degree() for f in problem.maps) ** M > 64:
        return False
    return orbit_in_variety(V, compose_step(list(problem.maps), M), y0, problem.g)


def _finish(members: dict, progressions: list, heuristic: list, meta: dict) -> ReturnSetDecomposition:
    modular = sorted(n for n, v in members.items() if v == "modular")
    cert = meta.pop("certificate", "rigorous")
    if heuristic or modular:
        cert = "heuristic"
    diag = meta.pop("diagnostics", {})
    if heuristic:
        diag["heuristic"] = heuristic[:10]
    if modular:
        diag["modular_members"] = modular[:10]
    return canonical(progressions, list(members), certificate=cert, diagnostics=diag, **meta)


def _heuristic_progression(orbit: _Orbit, start: int, M: int, samples: int = 8) -> None:
    for k in range(samples):
        if not orbit.member(start + k * M):
            raise InsufficientPrecision(f"class from {start} vanishes to precision but not at index {start + k * M}")


def solve_attracting(problem: OrbitProblem, p: int | None = None) -> ReturnSetDecomposition:
    V = [F for F in problem.variety if not F.is_zero()]
    if not V:
        return canonical([(0, 1)], [], certificate="rigorous", parameters={"M": 1, "N0": 0})
    primes = [p] if p else _prime_candidates(problem)
    errors = {}
    for q in primes:
        if not _admissible(problem, q):
            continue
        try:
            return _solve_attracting_at(problem, V, q)
        except FAILURES as exc:
            errors[q] = f"{type(exc).__name__}: {exc}"
    raise AllStrategiesFailed("attracting strategy found no usable prime", diagnostics={"attracting": _summarise(errors)})


def _summarise(errors: dict) -> dict:
    """Failure reasons grouped by message, primes listed per reason."""
    grouped: dict = {}
    for q, msg in errors.items():
        grouped.setdefault(msg.replace(f"p = {q}", "p"), []).append(q)
    return {"primes_tried": len(errors), "reasons": [{"error": m, "primes": ps[:8]} for m, ps in list(grouped.items())[:5]]}


def _prime_candidates(problem: OrbitProblem) -> list:
    out = [problem.prime_hint] if problem.prime_hint else []
    out += [int(q) for q in sympy.primerange(2, min(problem.bounds.P_max, ATTRACTING_PRIME_LIMIT) + 1) if q != problem.prime_hint]
    return out


def _solve_attracting_at(problem: OrbitProblem, V, p: int) -> ReturnSetDecomposition:
    b = problem.bounds
    setup = attracting_setup(problem, p)
    M = setup.pp.period
    lam = setup.pp.multipliers[0]
    orbit = _Orbit(problem)
    members = _prefix(orbit, range(setup.N0))
    progressions, heuristic = [], []
    for chart in setup.charts:
        # indices of this class between N0 and N_j are checked directly
        members.update(_prefix(orbit, range(setup.N0 + chart.j, chart.N_j, M)))
        thetas = [theta_attracting(problem, chart, F, b.D, b.N) for F in V]
        bounds = [strassman(t) for t in thetas]
        live = [t for t, s in zip(thetas, bounds) if not isinstance(s, IdenticallyZeroToPrec)]
        if not live:
            progressions.append((chart.N_j, M))
            if not _invariant_class(problem, V, orbit, chart.N_j, M):
                _heuristic_progression(orbit, chart.N_j, M)
                heuristic.append(f"class {chart.j}: vanishes to precision, invariance not proven")
            continue
        ks = None
        for t in live:
            c = candidate_orbit_indices(t, lam)
            ks = c if ks is None else ks & c
        for k in sorted(ks):
            n = chart.N_j + M * k
            v = orbit.member(n)
            if v:
                members[n] = v
    meta = {
        "prime": p,
        "parameters": {"M": M, "N0": setup.N0, "N": b.N, "D": b.D, "strategy": "attracting"},
        "diagnostics": {"radius_val": [str(c.conj.radius_val) for c in setup.charts]},
    }
    return _finish(members, progressions, heuristic, meta)


def solve_indifferent(problem: OrbitProblem, p: int | None = None) -> ReturnSetDecomposition:
    V = [F for F in problem.variety if not F.is_zero()]
    if not V:
        return canonical([(0, 1)], [], certificate="rigorous", parameters={"M": 1, "N0": 0})
    primes = [p] if p else _prime_candidates(problem)
    errors = {}
    for q in primes:
        if q == 2 or not _admissible(problem, q):
            continue
        try:
            return _solve_indifferent_at(problem, V, q)
        except FAILURES as exc:
            errors[q] = f"{type(exc).__name__}: {exc}"
    raise AllStrategiesFailed("indifferent strategy found no usable prime", diagnostics={"indifferent": _summarise(errors)})


def _solve_indifferent_at(problem: OrbitProblem, V, p: int) -> ReturnSetDecomposition:
    b = problem.bounds
    N, D = b.N, b.D
    pp = find_periodic_point(problem, p, "indifferent-diagonal")
    M = pp.period
    orbit = _Orbit(problem)
    members = {}
    progressions, heuristic = [], []
    beta_j = pp.beta
    N0 = None
    d = 1
    for i, mu in enumerate(pp.multipliers):
        k = teichmuller_order(mu)
        if (mu**k - 1).is_zero():
            # the rescaled family is constant in w; leave such orbits to residue splitting
            raise MultiplicativeRelationFound(f"multiplier {i} is a root of unity of order {k}", witness=((k,), i))
        d = math.lcm(d, k)
    R = 2 * p * d
    twop = embed_rational(2 * p, p, N)
    zero = PadicNumber.exact_zero(p)
    for j in range(M):
        m = local_map(problem, M, beta_j, N)
        conj, _report = linearize_indifferent(m, b.E_max, D)
        data = PeriodicPointData(beta_j, M, pp.multipliers, pp.classification, p)
        Nj = enter_basin(problem, data, conj, 0, start=pp.first_close + j, step=M)
        if j == 0:
            N0 = Nj
            members.update(_prefix(orbit, range(N0)))
        members.update(_prefix(orbit, range(N0 + j, Nj, M)))
        y = [xi - bi for xi, bi in zip(orbit.padic_point(Nj, p, N), beta_j)]
        u = conj.invert(y)
        chart = Chart(j, Nj, beta_j, conj, u, _rational_beta(problem, M, beta_j))
        growth = [exp_p(PadicSeries(p, [zero, twop * log_p(mu**d)], TailCertificate.zero()), N) for mu in pp.multipliers]
        Fms = [F.to_multiseries(p, N) for F in V]
        for ell in range(R):
            scale = [gr.scalar_mul(ui * mu**ell) for gr, ui, mu in zip(growth, u, pp.multipliers)]
            X = _chart_series(chart, scale, D)
            thetas = [Fm.substitute(X, D) for Fm in Fms]
            bounds = [strassman(t) for t in thetas]
            live = [(s.T, i) for i, s in enumerate(bounds) if not isinstance(s, IdenticallyZeroToPrec)]
            start = Nj + M * ell
            if not live:
                progressions.append((start, M * R))
                _heuristic_progression(orbit, start, M * R, samples=4)
                continue
            T, i = min(live)
            if T == 0:
                continue
            iso = zeros_in_Zp(thetas[i])
            for z in iso.zeros:
                w = z.approx.lift_int() if not z.approx.is_zero() else 0
                n = start + M * R * w
                if n <= 10**7:
                    v = orbit.member(n)
                    if v:
                        members[n] = v
            for c, depth, _ in iso.unresolved:
                heuristic.append(f"class ({j}, {ell}): disk {c} + {p}^{depth} Z_{p} not separated")
        beta_j = [f.evaluate_padic([bi], N) for f, bi in zip(problem.maps, beta_j)]
    meta = {
        "prime": p,
        "certificate": "heuristic",
        "parameters": {"M": M * R, "N0": N0, "N": N, "D": D, "d": d, "strategy": "indifferent"},
        "diagnostics": {"note": "analytic radius not certified; checked against brute force"},
    }
    res = _finish(members, progressions, heuristic, meta)
    res.certificate = "heuristic"
    return res


def _solve_preperiodic(problem: OrbitProblem, V, start: int, period: int) -> ReturnSetDecomposition:
    orbit = _Orbit(problem)
    bits = [bool(_in_variety_exact(V, orbit.exact_point(n))) for n in range(start + period)]
    progs = [(n, period) for n in range(start, start + period) if bits[n]]
    exc = [n for n in range(start) if bits[n]]
    return canonical(progs, exc, certificate="rigorous",
                     parameters={"M": period, "N0": start, "strategy": "preperiodic"})


def solve(problem: OrbitProblem) -> ReturnSetDecomposition:
    """Try the strategies in order and cross-check the answer against brute force."""
    b = problem.bounds
    V = [F for F in problem.variety if not F.is_zero()]
    if variety_is_everything(problem.variety) or not V:
        res = canonical([(0, 1)], [], certificate="rigorous", parameters={"M": 1, "N0": 0})
        return _cross_check(problem, res)
    orbit = _Orbit(problem)
    pre = orbit.preperiod(b.K_burn_in)
    if pre is not None and problem.strategy in ("auto", "brute-force"):
        return _cross_check(problem, _solve_preperiodic(problem, V, *pre))
    order = {
        "auto": ["attracting", "indifferent", "brute-force"],
        "attracting": ["attracting"],
        "indifferent": ["indifferent"],
        "brute-force": ["brute-force"],
    }.get(problem.strategy)
    if order is None:
        raise ValueError(f"unknown strategy {problem.strategy!r}")
    diagnostics = {}
    for name in order:
        try:
            if name == "attracting":
                res = solve_attracting(problem, problem.prime_hint)
            elif name == "indifferent":
                res = solve_indifferent(problem, problem.prime_hint)
            else:
                res = brute_force_only(problem, b.n_max, [diagnostics] if diagnostics else [])
        except AllStrategiesFailed as exc:
            diagnostics.update(exc.diagnostics)
            continue
        except FAILURES as exc:
            diagnostics[name] = f"{type(exc).__name__}: {exc}"
            continue
        if diagnostics and name != "brute-force":
            res.diagnostics["earlier_strategies"] = diagnostics
        return _cross_check(problem, res)
    raise AllStrategiesFailed("no strategy produced a decomposition", diagnostics=diagnostics)


def _cross_check(problem: OrbitProblem, res: ReturnSetDecomposition) -> ReturnSetDecomposition:
    W = min(problem.bounds.n_max, 2000)
    bits = brute_force_detail(problem, W).bits
    mine = res.indicator(W)
    if mine != bits:
        bad = [n for n in range(W) if mine[n] != bits[n]]
        raise CrossCheckFailed(f"decomposition disagrees with brute force at indices {bad[:10]}")
    res.diagnostics["cross_check_window"] = W
    return res
