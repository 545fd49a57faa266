import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from padicdml.errors import NonUnitEigenvalue, UnsupportedFieldExtension
from padicdml.jordan import JordanForm, analytic_power, choose_d, evaluate_matrix, rescaled_power
from padicdml.linalg import jordan_over_Qp, matmul_p, matpow_q
from padicdml.padic import embed_rational


def jf(p, blocks, N=40):
    return JordanForm([(embed_rational(lam, p, N), m) for lam, m in blocks])


def equal(A, B, prec=None):
    return all(a.agrees_with(b, prec) for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def rational_matrix(p, rows, N=40):
    return [[embed_rational(x, p, N) for x in row] for row in rows]


# -- examples ---------------------------------------------------------------------

@pytest.mark.parametrize("p,lams,d", [(5, [2], 4), (5, [1], 1), (7, [2, 3], 6), (2, [3], 2), (2, [5], 1)])
def test_choose_d(p, lams, d):
    assert choose_d(jf(p, [(x, 1) for x in lams])) == d


def test_choose_d_rejects_non_units():
    with pytest.raises(NonUnitEigenvalue):
        choose_d(jf(5, [(10, 1)]))


def test_unipotent_power_is_binomial():
    a = analytic_power(jf(3, [(1, 2)]), 1)
    assert equal(a.at(5), rational_matrix(3, [[1, 5], [0, 1]]))


def test_block_six_squared():
    a = analytic_power(jf(5, [(6, 2)]), 1)
    assert equal(a.at(2), rational_matrix(5, [[36, 12], [0, 36]]), 30)


def test_power_zero_is_identity():
    a = analytic_power(jf(7, [(2, 2), (3, 1)]))
    assert equal(a.at(0), rational_matrix(7, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]))


def test_rescaled_examples():
    a = analytic_power(jf(3, [(1, 2)]), 1)
    S = rescaled_power(a, 0, 10)
    assert equal(evaluate_matrix(S, embed_rational(0, 3)), rational_matrix(3, [[1, 0], [0, 1]]))
    S = rescaled_power(a, 2, 10)
    assert equal(evaluate_matrix(S, embed_rational(1, 3, 30)), rational_matrix(3, [[1, 8], [0, 1]]))


@pytest.mark.parametrize("p,lam", [(3, 4), (5, 6), (7, 8), (5, 2)])
def test_rescaled_tail_slope(p, lam):
    J = jf(p, [(lam, 2)])
    S = rescaled_power(analytic_power(J), 0, 16)
    for row in S:
        for s in row:
            if not s.is_polynomial:
                assert s.tail.vrho >= 2 - Fraction(1, p - 1)


def test_non_principal_power_rejected():
    with pytest.raises(NonUnitEigenvalue):
        analytic_power(jf(5, [(2, 1)]), 1)


def test_jordan_over_Qp_fibonacci():
    data = jordan_over_Qp([[Fraction(1), Fraction(1)], [Fraction(1), Fraction(0)]], 11, 30)
    lams = sorted(lam.lift_int() % 11 for lam, _, _ in data.blocks)
    assert lams == [4, 8]


def test_jordan_over_Qp_needs_roots_in_Qp():
    with pytest.raises(UnsupportedFieldExtension):
        jordan_over_Qp([[Fraction(1), Fraction(1)], [Fraction(1), Fraction(0)]], 7, 30)


def test_cli_style_consistency_for_all_blocks():
    J = jf(5, [(2, 3), (3, 1)])
    d = choose_d(J)
    Jd = J.power(d)
    acc = Jd
    for k in range(2, 8):
        acc = matmul_p(acc, Jd)
        assert equal(acc, J.power(d * k))


# -- properties -------------------------------------------------------------------

@st.composite
def jordan_forms(draw):
    p = draw(st.sampled_from([2, 3, 5, 7]))
    nblocks = draw(st.integers(1, 2))
    blocks = []
    for _ in range(nblocks):
        lam = draw(st.integers(1, 50).filter(lambda x: x % p))
        blocks.append((lam, draw(st.integers(1, 3))))
    return p, blocks


@given(jordan_forms(), st.integers(0, 20))
def test_integer_consistency(data, k):
    p, blocks = data
    J = jf(p, blocks, 64)
    a = analytic_power(J)
    assert equal(a.at(k), J.power(a.d * k))


@given(jordan_forms(), st.integers(1, 10**6), st.integers(1, 10**6))
def test_group_law(data, y, z):
    p, blocks = data
    J = jf(p, blocks, 40)
    a = analytic_power(J)
    # y, z in p Z_p keep every exponent inside the exp domain
    Y, Z = embed_rational(p * y, p, 40), embed_rational(p * z, p, 40)
    lhs = a.at(Y + Z)
    rhs = matmul_p(a.at(Y), a.at(Z))
    assert equal(lhs, rhs, 25)


@given(st.integers(0, 10**6))
def test_conjugation_covariance(seed):
    rng = random.Random(seed)
    p = 5
    # L = B diag(lams) B^-1 with rational eigenvalues prime to p
    lams = [rng.choice([1, 2, 3, 4, 6, 7]) for _ in range(2)]
    while True:
        B = [[Fraction(rng.randint(-3, 3)) for _ in range(2)] for _ in range(2)]
        det = B[0][0] * B[1][1] - B[0][1] * B[1][0]
        if det and det.numerator % p:
            break
    Binv = [[B[1][1] / det, -B[0][1] / det], [-B[1][0] / det, B[0][0] / det]]
    L = [[sum(B[i][k] * lams[k] * Binv[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    data = jordan_over_Qp(L, p, 40)
    J = JordanForm.from_data(data)
    a = analytic_power(J)
    for k in range(4):
        lhs = matmul_p(matmul_p(data.B, a.at(k)), data.Binv)
        assert equal(lhs, rational_matrix(p, matpow_q(L, a.d * k)), 25)
