from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import primes
from padicdml.errors import OutsideConvergenceDisk, OutsideExpDomain, OutsideLogDomain
from padicdml.padic import PadicNumber, embed_rational
from padicdml.series import (
    PadicSeries,
    TailCertificate,
    compose,
    exp_p,
    exp_series,
    log1p_series,
    log_p,
)


def poly(p, cs, N=40):
    return PadicSeries.polynomial(p, cs, N)


def same(f: PadicSeries, cs, p, upto=None):
    upto = f.degree if upto is None else upto
    return all(f[n].agrees_with(embed_rational(cs[n] if n < len(cs) else 0, p, 40)) for n in range(upto + 1))


# -- examples ---------------------------------------------------------------------

def test_add_and_mul():
    a, b = poly(3, [1, 1]), poly(3, [1, -1])
    assert same(a + b, [2], 3)
    assert same(a * b, [1, 0, -1], 3)


def test_tail_of_product_adds_offsets():
    p, D = 3, 10
    f = PadicSeries(p, [embed_rational(p**n, p, 30) for n in range(D + 1)], TailCertificate(Fraction(0), Fraction(1)))
    g = PadicSeries(p, [embed_rational(p ** (n + 2), p, 30) for n in range(D + 1)], TailCertificate(Fraction(2), Fraction(1)))
    h = f * g
    assert h.tail == TailCertificate(Fraction(2), Fraction(1))
    # the full geometric product has c_n = (n + 1) p^(n + 2)
    true = [embed_rational((n + 1) * p ** (n + 2), p, 30) for n in range(D + 1, D + 20)]
    assert h.tail.check(true, D + 1)


def test_compose_square_with_shift():
    assert same(compose(poly(3, [0, 0, 1]), poly(3, [1, 1])), [1, 2, 1], 3)


def test_exp_log_round_trip_on_series():
    p, D = 3, 20
    e = exp_p(log_p(poly(p, [1, p], 64), 64), 64)
    assert e.degree >= D
    assert e[0].agrees_with(embed_rational(1, p), 40)
    assert e[1].agrees_with(embed_rational(p, p), 40)
    for n in range(2, D + 1):
        assert e[n].valuation_lower_bound() >= 30


def test_compose_tail_slope_with_pz():
    p = 3
    f = PadicSeries(p, [embed_rational(1, p, 30)] * 6, TailCertificate(Fraction(0), Fraction(1)))
    h = compose(f, poly(p, [0, p]))
    assert h.tail.vrho >= 2


def test_evaluate_polynomial():
    assert poly(5, [1, 1, 1]).evaluate(embed_rational(5, 5, 30)).agrees_with(embed_rational(31, 5, 30))


def test_evaluate_log_series_matches_log():
    p = 5
    L = log1p_series(p, 40, 40)
    z = embed_rational(p, p, 40)
    a = L.evaluate(z)
    b = log_p(embed_rational(1 + p, p, 40))
    assert a.agrees_with(b, min(a.abs_prec, b.abs_prec))
    assert a.abs_prec >= 20


def test_evaluate_outside_certificate():
    with pytest.raises(OutsideConvergenceDisk):
        log1p_series(5, 10, 20).evaluate(embed_rational(1, 5, 20))
    formal = PadicSeries(5, [embed_rational(1, 5)], None)
    with pytest.raises(OutsideConvergenceDisk):
        formal.evaluate(embed_rational(5, 5))


def test_exp_zero():
    assert exp_p(PadicNumber.exact_zero(7), 20).agrees_with(embed_rational(1, 7, 20))


def test_exp_five_against_double_precision_sum():
    p = 5
    x = exp_p(embed_rational(5, p, 12), 12)
    # independent summation with exact rationals, reduced at twice the precision
    s, term = Fraction(0), Fraction(1)
    for n in range(60):
        s += term
        term = term * 5 / (n + 1)
    assert x.agrees_with(embed_rational(s, p, 24), x.abs_prec)
    assert x.abs_prec >= 12


def test_exp_boundary_rejected():
    with pytest.raises(OutsideExpDomain):
        exp_p(embed_rational(2, 2, 20))
    with pytest.raises(OutsideExpDomain):
        exp_p(embed_rational(Fraction(1, 3), 3, 20))
    exp_p(embed_rational(4, 2, 20))
    exp_p(embed_rational(3, 3, 20))


def test_log_one_and_round_trip():
    assert log_p(embed_rational(1, 3, 20)).is_zero()
    u = embed_rational(4, 3, 30)
    back = exp_p(log_p(u))
    assert back.agrees_with(u, 25)


def test_log_outside_domain():
    with pytest.raises(OutsideLogDomain):
        log_p(embed_rational(2, 5, 20))


def test_certificates_validated_on_construction():
    for p in (2, 3, 5, 7):
        exp_series(p, 16, 30)
        log1p_series(p, 16, 30)


def test_json_round_trip():
    f = log1p_series(3, 8, 20)
    g = PadicSeries.from_json(3, f.to_json())
    assert g.tail == f.tail and all(a.agrees_with(b) for a, b in zip(f.coeffs, g.coeffs))


# -- properties ---------------------------------------------------------------------

def principal_units(p):
    lo = 2 if p == 2 else 1
    return st.builds(
        lambda k, a, b: Fraction(1) + Fraction(p**k * a, b),
        st.integers(lo, 6),
        st.integers(-10**4, 10**4),
        st.integers(1, 10**3).filter(lambda b: b % p),
    )


@st.composite
def unit_pairs(draw):
    p = draw(primes)
    return p, draw(principal_units(p)), draw(principal_units(p))


@given(unit_pairs())
def test_log_homomorphism(data):
    p, a, b = data
    N = 40
    u, v = embed_rational(a, p, N), embed_rational(b, p, N)
    d = log_p(u * v) - log_p(u) - log_p(v)
    assert d.is_zero()


@given(primes, st.integers(1, 10**4))
def test_exp_log_round_trip_number(p, a):
    lo = 2 if p == 2 else 1
    t = embed_rational(p**lo * a, p, 40)
    assert log_p(exp_p(t)).agrees_with(t, t.abs_prec - 2)


@st.composite
def poly_triples(draw):
    p = draw(primes)
    cs = st.lists(st.integers(-20, 20), min_size=1, max_size=4)
    return p, draw(cs), draw(cs), draw(cs)


@given(poly_triples())
def test_compose_associative(data):
    p, a, b, c = data
    f, g, h = poly(p, a), poly(p, b), poly(p, c)
    lhs = compose(compose(f, g), h)
    rhs = compose(f, compose(g, h))
    n = max(lhs.degree, rhs.degree)
    assert all(lhs[i].agrees_with(rhs[i]) for i in range(n + 1))


@given(primes, st.lists(st.integers(-30, 30), min_size=1, max_size=4))
def test_composed_certificate_is_sound(p, cs):
    # exp(p^2 * g(z)) for a polynomial g with g(0) = 0: the certificate of the
    # degree-D result must bound the coefficients of a higher-degree computation
    D = 8
    g = poly(p, [0] + [p * p * c for c in cs], 60)
    lo = compose(exp_series(p, D, 60), g, D)
    hi = compose(exp_series(p, D + 8, 60), g, D + 8)
    assert lo.tail.check([hi[n] for n in range(D + 1, D + 9)], D + 1)
