import functools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import LINEAR_CORPUS, TORUS_CORPUS
from padicdml.decomposition import canonical
from padicdml.errors import NoPrimeFound
from padicdml.oracle import brute_force_detail, brute_force_membership
from padicdml.poly import parse_poly
from padicdml.problems import LinearOrbitProblem, TorusOrbitProblem
from padicdml.sml import brute_force_only, select_prime, solve_linear, solve_torus


def linear(L, alpha, variety, hint=None):
    g = len(alpha)
    return LinearOrbitProblem.make(L, alpha, [parse_poly(s, g, allow_t=False) for s in variety], hint)


def torus(A, alpha, variety, hint=None):
    g = len(alpha)
    return TorusOrbitProblem.make(A, alpha, [parse_poly(s, g, allow_t=False) for s in variety], hint)


def assert_canonical(res):
    progs = res.progressions
    for i, (s1, m1) in enumerate(progs):
        for s2, m2 in progs[i + 1:]:
            W = max(s1, s2) + m1 * m2 + 1
            a = set(range(s1, W, m1))
            b = set(range(s2, W, m2))
            assert not (a & b), (progs, "overlap")
    for n in res.exceptional:
        assert not any(n >= s and (n - s) % m == 0 for s, m in progs)


# -- prime selection ------------------------------------------------------------

def test_fibonacci_prime():
    choice = select_prime(linear([[1, 1], [1, 0]], [0, 1], ["x1"]))
    assert choice.p == 11
    assert {e.lift_int() % 11 for e, _, _ in choice.jordan.blocks} == {4, 8}


def test_identity_prime():
    assert select_prime(linear([[1, 0], [0, 1]], [1, 2], ["x0 - 1"])).p == 2


def test_rotation_prime():
    choice = select_prime(linear([[0, 1], [-1, 0]], [1, 0], ["x0"]))
    assert choice.p == 5
    assert {e.lift_int() % 5 for e, _, _ in choice.jordan.blocks} == {2, 3}


def test_denominators_avoided():
    choice = select_prime(linear([[Fraction(1, 2), 0], [0, 1]], [1, Fraction(1, 3)], ["x0"]))
    assert choice.p == 5
    assert 2 in choice.rejected and 3 in choice.rejected


def test_hint_tried_first():
    assert select_prime(linear([[1, 1], [1, 0]], [0, 1], ["x1"], hint=19)).p == 19


def test_no_prime_below_bound():
    # eigenvalues are cube roots of 2; z^3 - 2 does not split with distinct roots mod 2..7
    P = linear([[0, 0, 2], [1, 0, 0], [0, 1, 0]], [1, 0, 0], ["x0"])
    with pytest.raises(NoPrimeFound) as exc:
        select_prime(P, P_max=7)
    assert exc.value.diagnostics["tried"] == 4


# -- linear solver --------------------------------------------------------------

def test_period_two_example():
    res = solve_linear(linear([[0, 1], [1, 0]], [0, 2], ["x0"]))
    assert res.progressions == [(0, 2)] and res.exceptional == []
    assert res.certificate == "rigorous"


def test_fibonacci_example():
    # first coordinate of (0, 1), (1, 0), (1, 1), (2, 1), ...
    res = solve_linear(linear([[1, 1], [1, 0]], [0, 1], ["x0"]))
    assert res.progressions == [] and res.exceptional == [0]
    assert res.certificate == "rigorous" and res.prime == 11


def test_two_power_minus_two_example():
    res = solve_linear(linear([[3, -2], [1, 0]], [0, -1], ["x1"]))
    assert res.progressions == [] and res.exceptional == [1]


@pytest.mark.parametrize("case", LINEAR_CORPUS, ids=lambda c: c["name"])
def test_linear_corpus(case):
    P = linear(case["L"], case["alpha"], case["variety"])
    res = solve_linear(P)
    assert res.certificate == "rigorous"
    assert res.indicator(10_000) == brute_force_membership(P, 10_000)
    if case["expected"] is not None:
        progs, exc = case["expected"]
        assert res.progressions == progs and res.exceptional == exc
    assert_canonical(res)
    if res.progressions:
        M = res.parameters["M"]
        assert all(M % m == 0 for _, m in res.progressions)


def test_moduli_divide_residue_count():
    res = solve_linear(linear([[0, 1], [1, 0]], [0, 2], ["x0"]))
    p, d = res.prime, res.parameters["d"]
    assert res.parameters["M"] == 2 * p * d
    assert (2 * p * d) % res.progressions[0][1] == 0


def test_exceptional_confirmed_exactly():
    P = linear([[2, -4, 4], [1, 0, 0], [0, 1, 0]], [1, 0, 0], ["x2"])
    res = solve_linear(P)
    detail = brute_force_detail(P, 60)
    assert res.exceptional == [0, 1, 4, 6, 13, 52]
    assert all(detail.confirmation[n] == "exact" for n in res.exceptional)


def test_determinism():
    P = linear([[1, 1], [1, 0]], [1, 0], ["x0*x1"], hint=11)
    assert solve_linear(P).to_json() == solve_linear(P).to_json()


def test_empty_variety_is_everything():
    res = solve_linear(LinearOrbitProblem.make([[2]], [1], []))
    assert res.progressions == [(0, 1)]


def test_singular_matches_shifted_reduction():
    case = next(c for c in LINEAR_CORPUS if c["name"] == "singular")
    P = linear(case["L"], case["alpha"], case["variety"])
    res = solve_linear(P)
    assert res.indicator(2000) == brute_force_membership(P, 2000)
    assert res.parameters["N0"] >= 1


def test_nilpotent_orbit_reaches_zero():
    res = solve_linear(linear([[0, 1], [0, 0]], [3, 5], ["x0"]))
    # orbit: (3,5), (5,0), (0,0), (0,0), ...
    assert res.members_below(10) == list(range(2, 10))


def test_fallback_is_brute_force_only():
    P = linear([[0, 0, 2], [1, 0, 0], [0, 1, 0]], [1, 0, 0], ["x0 - 2"])
    res = solve_linear(P, P_max=7, fallback_window=300)
    assert res.certificate == "brute-force-only"
    assert res.parameters["n_max"] == 300
    assert res.indicator(300) == brute_force_membership(P, 300)
    assert res.diagnostics["attempts"]


SHIFT_L = [[0, 1, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]
SHIFT_ALPHA = [1, 0, -1, 0]


@functools.cache
def shift_base():
    return solve_linear(linear(SHIFT_L, SHIFT_ALPHA, ["x3"]))


@settings(max_examples=5)
@given(st.integers(0, 6))
def test_shift_property(s):
    # the return set of L^s alpha is the return set of alpha shifted by s
    L = SHIFT_L
    x = [Fraction(a) for a in SHIFT_ALPHA]
    for _ in range(s):
        x = [sum(Fraction(L[i][j]) * x[j] for j in range(4)) for i in range(4)]
    base = shift_base()
    shifted = solve_linear(linear(L, x, ["x3"]))
    want = [n - s for n in base.members_below(400 + s) if n >= s]
    assert shifted.members_below(400) == want


@settings(max_examples=20)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-4, 4), st.integers(-4, 4))
def test_random_recurrences_match_brute_force(c1, c2, a0, a1):
    if c2 == 0:
        c2 = 1
    P = linear([[c1, c2], [1, 0]], [a1, a0], ["x1"])
    res = solve_linear(P, fallback_window=2000)
    assert res.indicator(2000) == brute_force_membership(P, 2000)
    assert_canonical(res)


# -- torus solver ----------------------------------------------------------------

def test_square_to_81_example():
    res = solve_torus(torus([[2]], [3], ["x0 - 81"], hint=5))
    assert res.progressions == [] and res.exceptional == [2]
    assert res.prime == 5 and res.certificate == "rigorous"


def test_fixed_point_example():
    res = solve_torus(torus([[1, 1], [0, 1]], [1, 1], ["x0 - x1"]))
    assert res.progressions == [(0, 1)] and res.exceptional == []


def test_cube_never_five_example():
    res = solve_torus(torus([[3]], [2], ["x0 - 5"]))
    assert res.progressions == [] and res.exceptional == []
    assert res.certificate == "rigorous"


@pytest.mark.parametrize("case", TORUS_CORPUS, ids=lambda c: c["name"])
def test_torus_corpus(case):
    P = torus(case["A"], case["alpha"], case["variety"], case["prime"])
    res = solve_torus(P)
    assert res.certificate == "rigorous"
    detail = brute_force_detail(P, 2000)
    assert res.indicator(2000) == detail.bits
    assert all(detail.confirmation[n] == "exact" for n in res.exceptional)
    progs, exc = case["expected"]
    assert res.progressions == progs and res.exceptional == exc
    assert_canonical(res)


def test_torus_rejects_zero_coordinate():
    with pytest.raises(ValueError):
        torus([[2]], [0], ["x0"])


def test_torus_coordinates_avoid_prime():
    # p must not divide any coordinate: 2, 3 and 5 are rejected
    choice = select_prime(torus([[1, 1], [0, 1]], [6, 5], ["x0 - 5"]))
    assert choice.p == 7


# -- brute force ------------------------------------------------------------------

def test_brute_force_fibonacci():
    bits = brute_force_membership(linear([[1, 1], [1, 0]], [0, 1], ["x0"]), 100)
    assert [n for n, b in enumerate(bits) if b] == [0]


def test_brute_force_identity():
    assert all(brute_force_membership(linear([[1, 0], [0, 1]], [2, 3], ["x0 - 2"]), 50))


def test_brute_force_period_two():
    bits = brute_force_membership(linear([[0, 1], [1, 0]], [0, 2], ["x0"]), 20)
    assert bits == [n % 2 == 0 for n in range(20)]


def test_brute_force_only_reads_periodic_tail():
    res = brute_force_only(linear([[0, 1], [1, 0]], [0, 2], ["x0"]), 100)
    assert res.progressions == [(0, 2)]
    assert res.certificate == "brute-force-only"


def test_canonical_merges_and_absorbs():
    res = canonical([(0, 4), (2, 4)], [2, 5])
    assert res.progressions == [(0, 2)] and res.exceptional == [5]
    res = canonical([(3, 1), (0, 2)], [])
    assert res.progressions == [(2, 1)] and res.exceptional == [0]
