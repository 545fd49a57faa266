"""Newton polygons, Strassman bounds and zero isolation for p-adic series.

Segment slopes are reported as root valuations: a segment joining
``(i, v_i)`` to ``(j, v_j)`` has slope ``(v_i - v_j) / (j - i)`` and accounts
for ``j - i`` roots (with multiplicity, in C_p) of exactly that valuation.

Coefficients that are only known to be ``O(p^M)`` enter with the lower bound
``M``.  Interior points of that kind must lie strictly above the hull;
uncertainty at either end instead shrinks the valuation window in which the
reported segments are complete (:attr:`NewtonPolygon.window`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InsufficientPrecision, NoCertificate, NonSimpleRoot
from .padic import INFINITY, PadicNumber, embed_rational
from .series import PadicSeries, TailCertificate, compose


@dataclass(frozen=True)
class Segment:
    slope: Fraction  # valuation of the roots
    length: int

    def to_json(self):
        return {"slope": _fmt(self.slope), "length": self.length}


def _fmt(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of ``(n, v_p(c_n))``.

    ``window = (lo, hi)``: every root of valuation strictly between lo and hi
    is accounted for by ``segments`` and no segment outside the window is
    listed.  ``order_at_zero`` counts leading exact-zero coefficients.
    """

    vertices: list
    segments: list
    order_at_zero: int
    window: tuple = (-INFINITY, INFINITY)

    def slopes(self) -> list:
        return [s.slope for s in self.segments]

    def roots_with_valuation(self, r) -> int:
        lo, hi = self.window
        if not lo < r < hi:
            raise InsufficientPrecision(f"valuation {r} outside the certified window {self.window}")
        return sum(s.length for s in self.segments if s.slope == r)

    def to_json(self):
        lo, hi = self.window
        return {
            "segments": [s.to_json() for s in self.segments],
            "order_at_zero": self.order_at_zero,
            "window": [None if lo == -INFINITY else _fmt(lo), None if hi == INFINITY else _fmt(hi)],
        }


def lower_hull(points):
    """Andrew's monotone chain, lower part, exact rationals; collinear points dropped."""
    pts = sorted(points)
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] unless it makes a strict left turn
            if (x2 - x1) * (pt[1] - y1) - (y2 - y1) * (pt[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def polygon(f: PadicSeries) -> NewtonPolygon:
    known, uncertain = [], []
    lead_zeros = 0
    seen_nonzero = False
    for n, c in enumerate(f.coeffs):
        if c.is_exact_zero():
            if not seen_nonzero and not uncertain:
                lead_zeros += 1
            continue
        if c.is_inexact_zero():
            uncertain.append((n, Fraction(c.valuation_lower_bound())))
        else:
            seen_nonzero = True
            known.append((n, Fraction(c.valuation())))
    if not known:
        raise InsufficientPrecision("no coefficient with known valuation")
    if not f.is_polynomial and f.tail is None:
        raise NoCertificate("formal series: the polygon beyond the truncation is unknown")
    hull = lower_hull(known)
    a, b = hull[0][0], hull[-1][0]

    def line(k, n):
        (x1, y1), (x2, y2) = hull[k], hull[k + 1]
        return y1 + (y2 - y1) * (n - x1) / (x2 - x1)

    nseg = len(hull) - 1
    # interior uncertain points must sit strictly above the hull
    for n, M in uncertain:
        if a < n < b:
            k = max(i for i in range(nseg) if hull[i][0] <= n)
            if M <= line(k, n):
                raise InsufficientPrecision(f"coefficient {n} = O(p^{M}) may touch the hull")
    # leading uncertainty: extra roots of valuation >= hi
    hi = INFINITY
    va = hull[0][1]
    for n, M in uncertain:
        if n < a:
            hi = min(hi, (M - va) / (a - n))
    # trailing uncertainty and tail
    trailing = [(n, M) for n, M in uncertain if n > b]
    has_tail = not f.is_polynomial

    def undercut(xb, yb, s) -> bool:
        """Could something beyond the explicit points lie on/below the line through (xb, yb) of slope s?"""
        for n, M in trailing:
            if n > xb and M <= yb + s * (n - xb):
                return True
        if has_tail:
            t = f.tail
            if t.vrho < s:
                return True
            n = max(f.degree + 1, xb + 1)
            if t.vB + n * t.vrho <= yb + s * (n - xb):
                return True
        return False

    ok = 0
    for k in range(nseg):
        (x1, y1), (x2, y2) = hull[k], hull[k + 1]
        if undercut(x2, y2, (y2 - y1) / (x2 - x1)):
            break
        ok += 1
    xb, yb = hull[ok]
    smin = INFINITY
    for n, v in known + trailing:
        if n > xb:
            smin = min(smin, (v - yb) / (n - xb))
    if has_tail:
        t = f.tail
        n = max(f.degree + 1, xb + 1)
        smin = min(smin, (t.vB + n * t.vrho - yb) / (n - xb), t.vrho)
    lo = -smin if smin != INFINITY else -INFINITY
    segments = []
    for k in range(ok):
        (x1, y1), (x2, y2) = hull[k], hull[k + 1]
        r = (y1 - y2) / (x2 - x1)
        if lo < r < hi:
            segments.append(Segment(Fraction(r), x2 - x1))
    return NewtonPolygon(
        vertices=[(n, v) for n, v in hull],
        segments=segments,
        order_at_zero=lead_zeros,
        window=(lo, hi),
    )


# -- Strassman ---------------------------------------------------------------


@dataclass(frozen=True)
class StrassmanBound:
    """At most ``T`` zeros (with multiplicity) in the closed unit disk."""

    T: int
    vmin: Fraction


@dataclass(frozen=True)
class IdenticallyZeroToPrec:
    """Every coefficient vanishes to the stated absolute precision."""

    precision: Fraction | float


def strassman(f: PadicSeries):
    """Strassman bound on the closed unit disk ``v_p(z) >= 0``.

    Needs a polynomial or a tail with ``vrho > 0`` (coefficients tending to
    zero); the tail must also stay strictly above the minimal valuation.
    """
    if f.tail is None:
        raise NoCertificate("formal series")
    if not f.is_polynomial and f.tail.vrho <= 0:
        raise NoCertificate("tail certificate does not cover the closed unit disk")
    known = [(n, c.valuation()) for n, c in enumerate(f.coeffs) if not c.is_zero()]
    tail_floor = INFINITY if f.is_polynomial else f.tail.vB + (f.degree + 1) * f.tail.vrho
    inexact = [(n, c.valuation_lower_bound()) for n, c in enumerate(f.coeffs) if c.is_inexact_zero()]
    if not known:
        prec = min([M for _, M in inexact] + [tail_floor])
        return IdenticallyZeroToPrec(prec)
    vmin = min(v for _, v in known)
    T = max(n for n, v in known if v == vmin)
    for n, M in inexact:
        if M <= vmin and (n > T or M < vmin):
            raise InsufficientPrecision(f"coefficient {n} = O(p^{M}) may reach the minimal valuation")
    if tail_floor <= vmin:
        raise InsufficientPrecision("tail certificate too weak to locate the dominant coefficient")
    return StrassmanBound(T, Fraction(vmin))


def candidate_orbit_indices(f: PadicSeries, lam: PadicNumber) -> set:
    """All k >= 0 for which ``f(lam^k) = 0`` is possible, read off the polygon."""
    a = lam.valuation()
    if not 0 < a < INFINITY:
        raise ValueError("need 0 < |lambda|_p < 1")
    P = polygon(f)
    lo, hi = P.window
    if lo >= 0 or hi != INFINITY:
        raise InsufficientPrecision(f"polygon window {P.window} does not cover valuations in [0, inf)")
    out = set()
    for s in P.segments:
        if s.slope >= 0:
            k = Fraction(s.slope) / a
            if k.denominator == 1:
                out.add(int(k))
    return out


# -- zeros in Z_p ---------------------------------------------------------------


@dataclass
class ZpZero:
    """A simple zero of f in Z_p, known modulo ``p**precision``."""

    approx: PadicNumber
    center: int
    depth: int


@dataclass
class ZeroIsolation:
    zeros: list = field(default_factory=list)
    unresolved: list = field(default_factory=list)  # (center, depth, T) of disks left open
    identically_zero: bool = False


def _recentre(f: PadicSeries, c: int, depth: int) -> PadicSeries:
    """The series y -> f(c + p^depth * y)."""
    p = f.p
    g = PadicSeries(p, [embed_rational(c, p) if c else PadicNumber.exact_zero(p), embed_rational(p**depth, p)], TailCertificate.zero())
    return compose(f, g, f.degree)


def _newton_refine(g: PadicSeries, y: PadicNumber, steps: int = 60) -> PadicNumber:
    dg = g.derivative()
    for _ in range(steps):
        val = g.evaluate(y)
        if val.is_zero():
            break
        y_new = y - val / dg.evaluate(y)
        if y_new.agrees_with(y):
            y = y_new
            break
        y = y_new
    return y


def zeros_in_Zp(f: PadicSeries, max_depth: int = 12) -> ZeroIsolation:
    """Isolate the zeros of f in Z_p by splitting into residue disks.

    f must converge on the closed unit disk.  A disk whose Strassman bound is
    1 holds exactly one zero when ``v(c_0) >= v(c_1)`` (the zero is then in
    Q_p since it is unique); disks with bound 0 hold none.  Disks still
    carrying two or more zeros at ``max_depth`` are reported as unresolved.
    """
    p = f.p
    top = strassman(f)
    out = ZeroIsolation()
    if isinstance(top, IdenticallyZeroToPrec):
        out.identically_zero = True
        return out
    stack = [(r, 1) for r in range(p - 1, -1, -1)]
    while stack:
        c, depth = stack.pop()
        g = _recentre(f, c, depth)
        sb = strassman(g)
        if isinstance(sb, IdenticallyZeroToPrec):
            out.unresolved.append((c, depth, None))
            continue
        if sb.T == 0:
            continue
        if sb.T == 1:
            y0 = g.coeffs[0]
            y1 = g.coeffs[1]
            y = -(y0 / y1)
            if not y.is_exact_zero():
                y = _newton_refine(g, y)
            z = embed_rational(p**depth, p) * y + c
            out.zeros.append(ZpZero(z, c, depth))
            continue
        if depth >= max_depth:
            out.unresolved.append((c, depth, sb.T))
            continue
        step = p**depth
        for r in range(p - 1, -1, -1):
            stack.append((c + r * step, depth + 1))
    out.zeros.sort(key=lambda z: (z.depth, z.center))
    return out


def require_simple(iso: ZeroIsolation, p: int):
    if iso.unresolved:
        c, depth, T = iso.unresolved[0]
        raise NonSimpleRoot(f"{T} zeros remain in the disk {c} + {p}^{depth} Z_{p}", root_mod_p=c % p)
