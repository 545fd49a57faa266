"""Exact proofs that a whole forward orbit lies in a variety.

If an ideal ``I`` contains the generators of V, is mapped into itself by
pull-back along the step map ``Psi`` and vanishes at the starting point, then
every point ``Psi^k(y0)`` lies in ``V(I)``, a subset of V.  The ideal is
grown as ``I + Psi^*(I)`` until it stabilises (checked with Groebner bases
over Q) or a round limit is hit.
"""
from __future__ import annotations

from fractions import Fraction

import sympy

from .poly import Poly


def _sym_gens(g: int, torus: bool):
    xs = sympy.symbols(f"x0:{g}")
    zs = sympy.symbols(f"z0:{g}") if torus else ()
    return xs, zs


def _to_rational(x: Fraction):
    return sympy.Rational(x.numerator, x.denominator)


def orbit_in_variety(variety, step, y0, g: int, torus_A=None, max_rounds: int = 4) -> bool:
    """True when an invariant ideal inside V through ``y0`` is found.

    ``step`` is a list of g Poly in g variables (ignored for monomial maps,
    where ``torus_A`` gives the exponent matrix).  False means "not proven",
    never "false".
    """
    torus = torus_A is not None
    xs, zs = _sym_gens(g, torus)
    gens = list(xs) + list(zs)
    if torus:
        def mono(row, sign):
            out = sympy.Integer(1)
            for j, a in enumerate(row):
                a *= sign
                out *= xs[j] ** a if a >= 0 else zs[j] ** (-a)
            return out

        images = {xs[i]: mono(torus_A[i], 1) for i in range(g)}
        images.update({zs[i]: mono(torus_A[i], -1) for i in range(g)})
        relations = [xs[i] * zs[i] - 1 for i in range(g)]
        point = {xs[i]: _to_rational(y0[i]) for i in range(g)}
        point.update({zs[i]: 1 / _to_rational(y0[i]) for i in range(g)})
    else:
        images = {xs[i]: step[i].to_sympy(xs) for i in range(g)}
        relations = []
        point = {xs[i]: _to_rational(y0[i]) for i in range(g)}

    polys = [F.to_sympy(xs) for F in variety if not F.is_zero()]
    if not polys:
        return True
    if any(sympy.simplify(P.subs(point)) != 0 for P in polys):
        return False
    try:
        G = sympy.groebner(polys + relations, *gens, order="grevlex")
        for _ in range(max_rounds):
            pulled = [sympy.expand(P.xreplace(images)) for P in G.exprs]
            new = [q for q in pulled if G.reduce(q)[1] != 0]
            if not new:
                return True
            if any(sympy.simplify(q.subs(point)) != 0 for q in new):
                return False
            G = sympy.groebner(list(G.exprs) + new, *gens, order="grevlex")
            if G.exprs == [1] or (len(G.exprs) == 1 and G.exprs[0] == 1):
                return False
    except (sympy.polys.polyerrors.PolynomialError, ValueError):
        return False
    return False


def compose_step(maps: list, M: int) -> list:
    """Coordinatewise ``t -> f_i^M(t)`` as Poly in g variables."""
    g = len(maps)
    out = []
    for i, f in enumerate(maps):
        x = Poly.var(g, i)
        acc = x
        for _ in range(M):
            acc = f.substitute([acc])
        out.append(acc)
    return out
