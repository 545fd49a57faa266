import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import padicdml.orbit as orbit_mod
from padicdml.decomposition import canonical
from padicdml.errors import AllStrategiesFailed, BasinNotReached, CrossCheckFailed, NoPeriodicPointFound
from padicdml.linearize import linearize_attracting
from padicdml.oracle import brute_force_membership
from padicdml.orbit import (
    PeriodicPointData,
    attracting_identity_residual,
    attracting_setup,
    enter_basin,
    find_periodic_point,
    local_map,
    solve,
    solve_attracting,
    solve_indifferent,
)
from padicdml.padic import PadicNumber, embed_rational
from padicdml.poly import parse_map, parse_poly
from padicdml.problems import Bounds, OrbitProblem


def problem(maps, alpha, variety, **kw):
    g = len(alpha)
    return OrbitProblem.make(parse_map(maps), alpha, [parse_poly(s, g) for s in variety], **kw)


DIAG = ["2*t + t^2", "2*t + t^2"]


# -- periodic points ---------------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 5])
def test_fixed_point_at_zero(p):
    pp = find_periodic_point(problem([f"{p}*t + t^2"], [p], ["x0"]), p)
    assert pp.beta[0].valuation_lower_bound() >= 60
    assert pp.period == 1
    assert pp.multipliers[0].agrees_with(embed_rational(p, p, 40))
    assert pp.classification == "attracting-homothety"


def test_square_map_unit_fixed_point():
    pp = find_periodic_point(problem(["t^2"], [8], ["x0 - 1"]), 7)
    assert pp.beta[0].agrees_with(embed_rational(1, 7, 40))
    assert pp.multipliers[0].agrees_with(embed_rational(2, 7, 40))
    assert pp.classification == "indifferent-diagonal"


def test_translation_has_no_periodic_point():
    with pytest.raises(NoPeriodicPointFound):
        find_periodic_point(problem(["t + 1"], [0], ["x0 - 3"]), 5)


def test_period_two_point():
    # 1 + 3t - 4t^2 swaps 0 and 1; the cycle multiplier is 3 * (-5)
    P = problem(["1 + 3*t - 4*t^2"], [3], ["x0"])
    pp = find_periodic_point(P, 3)
    assert pp.period == 2
    assert pp.multipliers[0].valuation() == 1
    assert pp.classification == "attracting-homothety"
    res = solve_attracting(P, 3)
    assert res.parameters["M"] == 2
    assert res.indicator(2000) == brute_force_membership(P, 2000)


# -- basin entry -------------------------------------------------------------------

def zero_point(P, p):
    N = P.bounds.N
    beta = [PadicNumber.exact_zero(p)] * P.g
    conj = linearize_attracting(local_map(P, 1, beta, N), P.bounds.D)
    pp = PeriodicPointData(beta, 1, [embed_rational(p, p, N)] * P.g, "attracting-homothety", p)
    return pp, conj


def test_enter_basin_first_strict_index():
    P = problem(["2*t + t^2"], [2], ["x0 - 8"])
    pp, conj = zero_point(P, 2)
    # |2|_2 = 1/2 equals the certified radius, so the orbit enters at the next step
    assert enter_basin(P, pp, conj) == 1
    assert attracting_setup(P, 2).N0 >= 1


def test_enter_basin_unit_orbit_never_arrives():
    P = problem(["2*t + t^2"], [1], ["x0 - 8"])
    pp, conj = zero_point(P, 2)
    with pytest.raises(BasinNotReached):
        enter_basin(P, pp, conj)


def test_enter_basin_at_the_fixed_point():
    P = problem(["2*t + t^2"], [0], ["x0"])
    pp, conj = zero_point(P, 2)
    assert enter_basin(P, pp, conj) == 0


# -- attracting strategy ----------------------------------------------------------

def test_diagonal_is_invariant():
    res = solve_attracting(problem(DIAG, [2, 2], ["x0 - x1"]), 2)
    assert res.progressions == [(0, 1)] and res.exceptional == []
    assert res.certificate == "rigorous"


def test_distinct_orbits_never_meet():
    res = solve_attracting(problem(DIAG, [2, 4], ["x0 - x1"]), 2)
    assert res.progressions == [] and res.exceptional == []
    assert res.certificate == "rigorous"


def test_single_hit():
    res = solve_attracting(problem(DIAG, [2, 2], ["x0 - 8"]), 2)
    assert res.progressions == [] and res.exceptional == [1]
    assert res.certificate == "rigorous"


@pytest.mark.parametrize("k", [1, 2, 3])
def test_attracting_identity(k):
    P = problem(DIAG, [2, 2], ["x0 - 8"])
    setup = attracting_setup(P, 2)
    assert attracting_identity_residual(P, setup, 0, k) >= 20


@settings(max_examples=12)
@given(st.sampled_from([2, 3, 5]), st.integers(2, 3), st.integers(1, 3), st.integers(-20, 20))
def test_random_attracting_maps_match_brute_force(p, i, a, c):
    P = problem([f"{p}*t + t^{i}"], [p * a], [f"x0 - ({c})"], bounds=Bounds(n_max=500))
    res = solve_attracting(P, p)
    assert res.certificate == "rigorous"
    assert res.indicator(500) == brute_force_membership(P, 500)


# -- indifferent strategy ---------------------------------------------------------

def test_linear_unit_multiplier():
    P = problem(["3*t"], [7], ["x0 - 1701"])
    res = solve_indifferent(P, 7)
    assert res.progressions == [] and res.exceptional == [5]
    assert res.certificate == "heuristic"
    assert res.parameters["strategy"] == "indifferent"


def test_square_map_agrees_with_brute_force():
    P = problem(["t^2"], [8], ["x0 - 1"])
    with pytest.raises(AllStrategiesFailed) as exc:
        solve_indifferent(P, 7)
    assert "BasinNotReached" in str(exc.value.diagnostics)
    res = solve(P)
    assert res.indicator(2000) == brute_force_membership(P, 2000)
    assert res.members_below(2000) == []


def test_root_of_unity_multiplier_rejected():
    P = problem(["-t"], [3], ["x0 - 5"])
    with pytest.raises(AllStrategiesFailed) as exc:
        solve_indifferent(P, 3)
    assert "MultiplicativeRelationFound" in str(exc.value.diagnostics)
    res = solve(P)
    assert res.parameters["strategy"] == "preperiodic"
    assert res.certificate == "rigorous"


# -- dispatcher ---------------------------------------------------------------------

def test_dispatcher_takes_attracting_path():
    res = solve(problem(DIAG, [2, 2], ["x0 - x1"]))
    assert res.parameters["strategy"] == "attracting"
    assert res.progressions == [(0, 1)]
    assert res.diagnostics["cross_check_window"] == 2000


def test_translation_is_brute_force_only():
    P = problem(["t + 1"], [0], ["x0 - 3"], bounds=Bounds(n_max=300))
    res = solve(P)
    assert res.certificate == "brute-force-only"
    assert res.exceptional == [3]
    assert res.parameters["n_max"] == 300


def test_preperiodic_orbit():
    res = solve(problem(["-t"], [2], ["x0 + 2"]))
    assert res.progressions == [(1, 2)]
    assert res.certificate == "rigorous"


def test_forced_strategy_failure():
    P = problem(["t + 1"], [0], ["x0 - 3"], strategy="attracting")
    with pytest.raises(AllStrategiesFailed) as exc:
        solve(P)
    assert "attracting" in exc.value.diagnostics


def test_empty_variety():
    res = solve(problem(DIAG, [2, 2], []))
    assert res.progressions == [(0, 1)]


def test_cross_check_catches_wrong_answer(monkeypatch):
    def wrong(problem, p=None):
        return canonical([], [7], certificate="rigorous")

    monkeypatch.setattr(orbit_mod, "solve_attracting", wrong)
    with pytest.raises(CrossCheckFailed):
        solve(problem(DIAG, [2, 2], ["x0 - x1"]))


def test_determinism():
    P = problem(DIAG, [2, 4], ["x0 - x1"])
    assert solve(P).to_json() == solve(P).to_json()
