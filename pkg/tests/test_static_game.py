import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from anongame.model import AttackAction, GameParams, org_utility
from anongame.static_game import (
    DegenerateGameWarning,
    Equilibrium,
    EquilibriumKind,
    EquilibriumNotFound,
    attacker_expectations,
    attacker_indifference_roots,
    build_tensor,
    enumerate_equilibria,
    expected_utilities,
    indifference_gaps,
    no_attack_pure_equilibrium,
    org_dominant_strategy,
    org_expectations,
    solve_equilibrium,
    solve_p_analytic,
    solve_p_numeric,
    solve_q_given_p,
)

import _oracles
from strategies import game_params

B, H, N = AttackAction.BACKGROUND, AttackAction.HOMOGENEITY, AttackAction.NO_ATTACK
DEFAULT = GameParams()


def at(value, **kw):
    return GameParams(**kw).with_value(value)


# ---- tensor -----------------------------------------------------------------

def test_tensor_matches_reference_table():
    for value in (10.0, 20.0, 50.0, 100.0):
        params = at(value)
        tensor = build_tensor(params)
        ref = _oracles.table_for(params)
        for (k1, k2, a), triple in tensor.cells():
            assert triple == pytest.approx(ref[(k1, k2, a.short)], abs=1e-12)


def test_tensor_examples():
    t = build_tensor(at(20.0))
    assert t.entry(3, 7, N)[2] == 0.0
    # exact breach (1 - (1 - 0.6/3.7)^2) rather than its 7-digit rounding
    exact = float((1 - (1 - Fraction(6, 37)) ** 2) * 20 - Fraction(31, 5))
    assert t.entry(3, 3, H)[2] == pytest.approx(exact, abs=1e-12)
    assert t.entry(3, 3, H)[2] == pytest.approx(-0.239446, abs=2e-6)
    for a in (B, H, N):
        assert t.entry(3, 7, a)[0] == t.entry(7, 3, a)[1]
        assert t.entry(3, 7, a)[2] == t.entry(7, 3, a)[2]
    assert not t.array.flags.writeable


# ---- pure results -----------------------------------------------------------

def test_no_attack_examples():
    eq10 = no_attack_pure_equilibrium(at(10.0))
    assert eq10.kind is EquilibriumKind.PURE_NO_ATTACK and eq10.org_p == 0.0
    eq20 = no_attack_pure_equilibrium(at(20.0))
    assert eq20.org_p == 1.0 and eq20.q_N == 1.0
    assert no_attack_pure_equilibrium(at(50.0)) is None
    # utilities behind the switch
    p10 = at(10.0)
    assert org_utility(3, 3, N, None, p10) == pytest.approx(10.194, abs=1e-3)
    assert org_utility(7, 7, N, None, p10) == pytest.approx(10.786, abs=1e-3)


def test_no_attack_tie_goes_to_low_level():
    # v_size = 1 removes costs; gamma = 0 removes trust; equal rewards tie
    p = GameParams(gamma=0.0, v_size=1.0, attacker_reward=1.0, reward_low=5.0,
                   reward_high=5.0)
    assert no_attack_pure_equilibrium(p).org_p == 1.0


def test_dominant_strategy_examples():
    p = GameParams(gamma=0.0, v_size=1.0, reward_low=10.0, reward_high=10.0)
    assert org_dominant_strategy(p) == 7
    assert org_dominant_strategy(at(100.0)) == 7
    assert org_dominant_strategy(GameParams(reward_high=0.0)) is None


# ---- mixing probabilities -----------------------------------------------------

def test_analytic_degenerate_case():
    p = GameParams(p_background=0.5, p_homog_same=0.5, p_homog_diff=0.5,
                   cost_attack_background=6.0, cost_attack_homog=6.0,
                   enforce_ordering=False)
    with pytest.warns(DegenerateGameWarning):
        assert solve_p_analytic(p) == []
    with pytest.warns(DegenerateGameWarning):
        assert solve_p_numeric(p) == 0.5


def test_numeric_root_at_default_value():
    tensor = build_tensor(DEFAULT)
    p = solve_p_numeric(DEFAULT)
    assert p is not None and 0.0 <= p <= 1.0
    e = attacker_expectations(tensor, p)
    assert abs(e[B] - e[H]) <= 1e-10


def test_numeric_no_crossing():
    p = GameParams(p_background=0.95, p_homog_same=0.25, p_homog_diff=0.2,
                   cost_attack_background=6.3, cost_attack_homog=6.2,
                   attacker_reward=100.0)
    tensor = build_tensor(p)
    grid = [attacker_expectations(tensor, x) for x in np.linspace(0, 1, 101)]
    assert all(e[B] > e[H] for e in grid)
    assert solve_p_numeric(p) is None


def test_q_given_p_degenerate():
    p = GameParams(p_background=0.4, p_homog_same=0.4, p_homog_diff=0.4,
                   enforce_ordering=False)
    with pytest.warns(DegenerateGameWarning):
        assert solve_q_given_p(0.3, build_tensor(p)) is None


def test_q_given_p_indifference():
    tensor = build_tensor(DEFAULT)
    p = solve_p_numeric(DEFAULT)
    q = solve_q_given_p(p, tensor)
    e = org_expectations(tensor, p, (q, 1 - q, 0.0))
    assert abs(e[0] - e[1]) <= 1e-9


def test_q_at_p_zero_matches_closed_form():
    for value in (50.0, 70.0, 100.0):
        params = at(value)
        tensor = build_tensor(params)
        ref = _oracles.q_at_p0(_oracles.table_for(params), params.levels)
        q = solve_q_given_p(0.0, tensor)
        if 0.0 <= ref <= 1.0:
            assert q == pytest.approx(ref, abs=1e-12)
        else:
            assert q is None


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(game_params(), st.floats(0.01, 0.4))
def test_analytic_matches_numeric_with_single_homogeneity_prob(params, ph):
    assume(params.p_background > ph + 1e-3)
    p = params.replace(p_homog_same=ph, p_homog_diff=ph, enforce_ordering=False)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGameWarning)
        analytic = solve_p_analytic(p)
        numeric = attacker_indifference_roots(build_tensor(p))
    assume(numeric)
    for r in numeric:
        assert min(abs(r - a) for a in analytic) <= 1e-6


# ---- full solve ----------------------------------------------------------------

@pytest.mark.parametrize("value, p, qN", [(10.0, 0.0, 1.0), (20.0, 1.0, 1.0)])
def test_solver_pure_columns(value, p, qN):
    eq = solve_equilibrium(at(value))
    assert (eq.org_p, eq.q_B, eq.q_H, eq.q_N) == (p, 0.0, 0.0, qN)


def test_solver_mixed_at_fifty():
    eq = solve_equilibrium(DEFAULT)
    assert eq.kind is EquilibriumKind.MIXED and eq.q_N == 0.0
    assert eq.regret <= 1e-6
    assert eq.expected_org_utility < DEFAULT.reward_low
    ref = _oracles.regret(_oracles.table_for(DEFAULT), DEFAULT.levels, eq.org_p, eq.org_p,
                          eq.attacker_dist)
    assert ref <= 1e-9


def test_expected_utilities_examples():
    tensor = build_tensor(DEFAULT)
    pure = Equilibrium(EquilibriumKind.PURE_DOMINANT, 1.0, (0.0, 1.0, 0.0), 0, 0, 0)
    assert expected_utilities(pure, tensor) == pytest.approx(
        (tensor.entry(3, 3, H)[0], tensor.entry(3, 3, H)[2]), abs=1e-12)
    idle = Equilibrium(EquilibriumKind.PURE_NO_ATTACK, 0.3, (0.0, 0.0, 1.0), 0, 0, 0)
    assert expected_utilities(idle, tensor)[1] == 0.0
    eq = solve_equilibrium(DEFAULT)
    ref = _oracles.expected(_oracles.table_for(DEFAULT), DEFAULT.levels, eq.org_p,
                            eq.org_p, eq.attacker_dist)
    assert expected_utilities(eq, tensor) == pytest.approx(ref, abs=1e-10)


def test_not_found_carries_best_candidate():
    with pytest.raises(EquilibriumNotFound) as info:
        solve_equilibrium(DEFAULT, tol=-1.0)
    assert info.value.best is not None


def test_enumeration_lists_the_solver_choice():
    eqs = enumerate_equilibria(DEFAULT)
    first = solve_equilibrium(DEFAULT)
    assert eqs and np.allclose(eqs[0].strategy_vector(), first.strategy_vector())


@settings(max_examples=150, deadline=None)
@given(game_params())
def test_solver_always_certifies(params):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGameWarning)
        eq = solve_equilibrium(params)
    assert eq.regret <= 1e-6
    assert 0.0 <= eq.org_p <= 1.0
    assert abs(sum(eq.attacker_dist) - 1.0) <= 1e-12
    assert min(eq.attacker_dist) >= 0.0
    ref = _oracles.regret(_oracles.table_for(params), params.levels, eq.org_p, eq.org_p,
                          eq.attacker_dist)
    assert ref <= 1e-6 + 1e-9 * max(1.0, params.attacker_reward, params.reward_low,
                                    params.reward_high)
    if eq.kind is EquilibriumKind.PURE_NO_ATTACK:
        assert eq.q_N == 1.0 and eq.org_p in (0.0, 1.0)
    tensor = build_tensor(params)
    if eq.q_N == 0.0:
        assert eq.expected_attacker_utility >= -1e-9
    if eq.q_N == 1.0:
        assert attacker_expectations(tensor, eq.org_p)[:2].max() <= 1e-9
    if eq.kind is EquilibriumKind.MIXED:
        scale = max(1.0, np.abs(tensor.array).max())
        att_gap, org_gap = indifference_gaps(eq, tensor)
        assert att_gap <= 1e-9 * scale and org_gap <= 1e-9 * scale


@pytest.mark.parametrize("value", [30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0])
def test_random_deviations_never_pay(value):
    params = at(value)
    eq = solve_equilibrium(params)
    table = _oracles.table_for(params)
    rng = np.random.default_rng(int(value))
    u_org, u_att = eq.expected_org_utility, eq.expected_attacker_utility
    for _ in range(100):
        p_dev = rng.random()
        dev_org, _ = _oracles.expected(table, params.levels, p_dev, eq.org_p, eq.attacker_dist)
        q_dev = tuple(rng.dirichlet(np.ones(3)))
        _, dev_att = _oracles.expected(table, params.levels, eq.org_p, eq.org_p, q_dev)
        assert dev_org <= u_org + 1e-9
        assert dev_att <= u_att + 1e-9
