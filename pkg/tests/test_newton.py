from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpus import newton_corpus, root_valuations
from padicdml.errors import InsufficientPrecision, NoCertificate
from padicdml.newton import (
    IdenticallyZeroToPrec,
    StrassmanBound,
    candidate_orbit_indices,
    lower_hull,
    polygon,
    strassman,
    zeros_in_Zp,
)
from padicdml.padic import PadicNumber, embed_rational
from padicdml.series import PadicSeries, TailCertificate


def poly(p, cs, N=40):
    return PadicSeries.polynomial(p, cs, N)


def segs(P):
    return [(s.slope, s.length) for s in P.segments]


# -- examples ---------------------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 5])
def test_square_root_of_p(p):
    assert segs(polygon(poly(p, [-p, 0, 1]))) == [(Fraction(1, 2), 2)]


def test_root_zero_and_minus_one_over_p():
    P = polygon(poly(3, [0, 1, 3]))
    assert P.order_at_zero == 1
    assert segs(P) == [(Fraction(-1), 1)]
    # one zero of valuation >= 0: the root 0
    assert P.order_at_zero + sum(l for s, l in segs(P) if s >= 0) == 1


def test_constant_has_no_segments():
    assert segs(polygon(poly(5, [1]))) == []


def test_strassman_examples():
    assert strassman(poly(3, [0, 1, 3])) == StrassmanBound(1, Fraction(0))
    assert strassman(poly(5, [1, 1, 1])).T == 2
    zero = PadicSeries(5, [PadicNumber.exact_zero(5)], TailCertificate.zero())
    assert isinstance(strassman(zero), IdenticallyZeroToPrec)


def test_strassman_needs_decaying_tail():
    f = PadicSeries(3, [embed_rational(1, 3)], TailCertificate(Fraction(0), Fraction(0)))
    with pytest.raises(NoCertificate):
        strassman(f)
    with pytest.raises(NoCertificate):
        strassman(PadicSeries(3, [embed_rational(1, 3)], None))


def test_strassman_refuses_to_guess():
    # c_1 = O(3^0) could still be a unit, so the dominant index is unknown
    f = PadicSeries(3, [embed_rational(3, 3, 10), PadicNumber.inexact_zero(3, 0), embed_rational(9, 3, 10)], TailCertificate.zero())
    with pytest.raises(InsufficientPrecision):
        strassman(f)


def test_candidate_indices_divisibility():
    p = 3
    lam = embed_rational(p, p, 30)
    f = poly(p, [p**7, -(p**2 + p**5), 1])  # roots p^2 and p^5
    assert candidate_orbit_indices(f, lam) == {2, 5}
    g = poly(p, [-(p**3), 1])
    assert candidate_orbit_indices(g, embed_rational(p * p, p, 30)) == set()


def test_candidate_indices_orbit_example():
    from padicdml.linearize import linearize_attracting
    from padicdml.orbit import Chart, enter_basin, find_periodic_point, local_map, theta_attracting
    from padicdml.oracle import brute_force_membership
    from padicdml.poly import parse_map, parse_poly
    from padicdml.problems import OrbitProblem

    problem = OrbitProblem.make(parse_map(["2*t + t^2"] * 2), [2, 2], [parse_poly("x0 - 8", 2)])
    pp = find_periodic_point(problem, 2, "attracting-homothety")
    conj = linearize_attracting(local_map(problem, 1, pp.beta, 64), 24)
    Nj = enter_basin(problem, pp, conj)
    x = [embed_rational(v, 2, 64) for v in [8, 8]]
    assert Nj == 1
    u = conj.invert([xi - bi for xi, bi in zip(x, pp.beta)])
    chart = Chart(0, Nj, pp.beta, conj, u, None)
    theta = theta_attracting(problem, chart, problem.variety[0], 24, 64)
    ks = candidate_orbit_indices(theta, pp.multipliers[0])
    returns = [n for n, b in enumerate(brute_force_membership(problem, 200)) if b]
    assert returns == [1]
    assert {Nj + k for k in ks} == {1}


def test_lower_hull_drops_collinear_points():
    pts = [(0, Fraction(2)), (1, Fraction(1)), (2, Fraction(0)), (3, Fraction(1))]
    assert lower_hull(pts) == [(0, 2), (2, 0), (3, 1)]


def test_zeros_in_Zp_finds_simple_roots():
    p = 5
    f = poly(p, [6, -5, 1])  # (x - 2)(x - 3)
    iso = zeros_in_Zp(f)
    got = sorted(z.approx.lift_int() % p**10 for z in iso.zeros)
    assert got == [2, 3]
    assert not iso.unresolved


def test_zeros_in_Zp_reports_double_roots():
    iso = zeros_in_Zp(poly(3, [1, -2, 1]), max_depth=4)  # (x - 1)^2
    assert not iso.zeros and iso.unresolved


def test_polygon_json():
    out = polygon(poly(3, [-3, 0, 1])).to_json()
    assert out["segments"] == [{"slope": "1/2", "length": 2}]


# -- properties -------------------------------------------------------------------

CORPUS = newton_corpus()


@pytest.mark.parametrize("p,coeffs", CORPUS[:20])
def test_segments_match_factorization(p, coeffs):
    P = polygon(poly(p, coeffs, 64))
    zeros, vals = root_valuations(coeffs, p)
    assert P.order_at_zero == zeros
    got = sorted(s.slope for s in P.segments for _ in range(s.length))
    assert got == vals


@pytest.mark.parametrize("p,coeffs", CORPUS[:20])
def test_strassman_sound(p, coeffs):
    zeros, vals = root_valuations(coeffs, p)
    in_disk = zeros + sum(1 for v in vals if v >= 0)
    assert in_disk <= strassman(poly(p, coeffs, 64)).T


@given(st.sampled_from([2, 3, 5, 7]), st.lists(st.integers(-10**4, 10**4), min_size=2, max_size=8))
def test_polygon_shape(p, cs):
    f = poly(p, cs, 64)
    if all(c == 0 for c in cs):
        return
    P = polygon(f)
    # hull slopes (minus the root valuations) strictly increase left to right
    hull = [-s for s in P.slopes()]
    assert all(a < b for a, b in zip(hull, hull[1:]))
    nz = [i for i, c in enumerate(cs) if c]
    assert sum(s.length for s in P.segments) == nz[-1] - nz[0]
    assert P.order_at_zero == nz[0]
