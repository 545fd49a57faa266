import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import primes, rationals
from padicdml.errors import DenominatorDivisibleByP, DivisionByInexactZero, IncompatiblePrime, IndeterminateValuation, NotAUnit
from padicdml.padic import INFINITY, PadicNumber, embed_rational, is_prime, rational_reconstruction, teichmuller_order, vp


def agrees_exact(x: PadicNumber, q: Fraction) -> bool:
    """x equals the rational q modulo p^(abs_prec of x)."""
    if q == 0:
        return x.is_zero()
    A = x.abs_prec
    if A == INFINITY:
        return False
    return (x - embed_rational(q, x.p, max(1, A - vp(q, x.p) + 2))).valuation_lower_bound() >= A


# -- examples ---------------------------------------------------------------------

def test_embed_nine_halves():
    x = embed_rational(Fraction(9, 2), 3, 5)
    assert x.valuation() == 2
    assert x.unit == 122 and 2 * 122 % 243 == 1
    assert x.prec == 5


def test_embed_zero_is_certified():
    z = embed_rational(0, 5, 10)
    assert z.is_exact_zero()
    assert z.valuation() == INFINITY


def test_embed_one():
    x = embed_rational(1, 2, 8)
    assert (x.valuation(), x.unit) == (0, 1)


def test_add_carry():
    x = embed_rational(1, 3, 5) + embed_rational(2, 3, 5)
    assert x.valuation() == 1
    assert x.abs_prec == 5
    assert agrees_exact(x, Fraction(3))


def test_mul_relative_precision():
    a = PadicNumber(5, 1, 2, 4)
    b = PadicNumber(5, 2, 3, 4)
    c = a * b
    assert (c.val, c.unit, c.prec) == (3, 6, 4)


def test_div_one_by_two():
    x = embed_rational(1, 3, 4) / embed_rational(2, 3, 4)
    assert (x.valuation(), x.unit) == (0, 41)
    assert 2 * 41 % 81 == 1


def test_valuation_and_abs():
    assert embed_rational(12, 2, 10).valuation() == 2
    assert abs(embed_rational(Fraction(1, 3), 3, 5)) == 3
    assert abs(embed_rational(3, 3, 5)) == Fraction(1, 3)


def test_inexact_zero_has_no_valuation():
    z = embed_rational(1, 5, 4) - embed_rational(1, 5, 4)
    assert z.is_inexact_zero()
    assert z.abs_prec == 4
    with pytest.raises(IndeterminateValuation):
        z.valuation()
    assert z.valuation_lower_bound() == 4


@pytest.mark.parametrize("u,p,d", [(2, 5, 4), (1, 5, 1), (6, 5, 1), (2, 7, 3), (3, 7, 6), (3, 2, 2), (5, 2, 1)])
def test_teichmuller_order(u, p, d):
    assert teichmuller_order(embed_rational(u, p, 10)) == d


def test_teichmuller_order_rejects_non_units():
    with pytest.raises(NotAUnit):
        teichmuller_order(embed_rational(5, 5, 10))


def test_errors():
    with pytest.raises(DenominatorDivisibleByP):
        embed_rational(Fraction(1, 3), 3, 5, require_integral=True)
    with pytest.raises(IncompatiblePrime):
        embed_rational(1, 3) + embed_rational(1, 5)
    with pytest.raises(DivisionByInexactZero):
        embed_rational(1, 3, 5) / PadicNumber.inexact_zero(3, 4)


def test_is_prime_small():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_rational_reconstruction():
    x = embed_rational(Fraction(-7, 11), 5, 30)
    assert rational_reconstruction(x) == Fraction(-7, 11)


def test_json_round_trip():
    x = embed_rational(Fraction(9, 2), 3, 5)
    assert PadicNumber.from_json(3, x.to_json()).agrees_with(x, 7)


# -- properties ---------------------------------------------------------------------

@given(primes, rationals(nonzero=True), rationals(nonzero=True), st.integers(4, 30))
def test_ultrametric(p, a, b, N):
    x, y = embed_rational(a, p, N), embed_rational(b, p, N)
    s = x + y
    bound = min(x.valuation(), y.valuation())
    assert s.valuation_lower_bound() >= bound
    if x.valuation() != y.valuation():
        assert s.valuation() == bound


_OPS = ["+", "-", "*", "/"]


@st.composite
def expression_trees(draw, depth=8):
    if depth == 0 or draw(st.booleans()):
        return draw(rationals(max_num=10**3, max_den=50, nonzero=True))
    op = draw(st.sampled_from(_OPS))
    return (op, draw(expression_trees(depth=depth - 1)), draw(expression_trees(depth=depth - 1)))


def _evaluate(tree, leaf):
    if not isinstance(tree, tuple):
        return leaf(tree)
    op, a, b = tree
    x, y = _evaluate(a, leaf), _evaluate(b, leaf)
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if (isinstance(y, Fraction) and y == 0) or (isinstance(y, PadicNumber) and y.is_zero()):
        raise ZeroDivisionError
    return x / y


@given(primes, expression_trees(), st.integers(8, 40))
def test_oracle_agreement_on_expression_trees(p, tree, N):
    try:
        exact = _evaluate(tree, lambda q: q)
        approx = _evaluate(tree, lambda q: embed_rational(q, p, N))
    except (ZeroDivisionError, DivisionByInexactZero):
        assume(False)
    assert agrees_exact(approx, exact)


@given(primes, rationals(nonzero=True), rationals(nonzero=True), st.integers(4, 30), st.integers(1, 20))
def test_precision_monotone(p, a, b, N, drop):
    hi = [embed_rational(a, p, N), embed_rational(b, p, N)]
    lo = [hi[0].with_rel_prec(max(1, N - drop)), hi[1]]
    for op in (lambda x, y: x + y, lambda x, y: x * y, lambda x, y: x / y, lambda x, y: x - y):
        assert op(*lo).abs_prec <= op(*hi).abs_prec


@given(primes, rationals(nonzero=True), st.integers(4, 30), st.integers(0, 12))
def test_power_matches_repeated_multiplication(p, a, N, n):
    x = embed_rational(a, p, N)
    acc = embed_rational(1, p, N)
    for _ in range(n):
        acc = acc * x
    assert (x**n).agrees_with(acc)
    assert agrees_exact(x**n, a**n)


@given(primes, st.integers(1, 10**6).filter(lambda n: math.gcd(n, 210) == 1))
def test_teichmuller_order_is_multiplicative_order(p, n):
    assume(n % p)
    d = teichmuller_order(embed_rational(n, p, 10))
    if p == 2:
        assert pow(n, d, 4) == 1
    else:
        assert pow(n, d, p) == 1 and all(pow(n, k, p) != 1 for k in range(1, d))
