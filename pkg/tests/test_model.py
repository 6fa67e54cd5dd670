import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from anongame.model import (
    ACTIONS,
    AttackAction,
    GameParams,
    InvalidParameterError,
    anonymization_cost,
    attack_success_prob,
    attacker_utility,
    breach_joint,
    breach_joint_expanded,
    breach_single,
    min_profit_factor,
    no_attack_utility,
    org_utility,
    trust_value,
)

from _oracles import cost as ref_cost, joint_breach as ref_joint
from strategies import game_params

B, H, N = AttackAction.BACKGROUND, AttackAction.HOMOGENEITY, AttackAction.NO_ATTACK
DEFAULT = GameParams()


# ---- examples -------------------------------------------------------------

def test_action_set():
    assert len(set(ACTIONS)) == 3
    assert AttackAction.parse("h") is H
    assert AttackAction.parse("NO_ATTACK") is N
    with pytest.raises(InvalidParameterError):
        AttackAction.parse("X")


def test_cost_examples():
    assert anonymization_cost(3, 1.0) == 0.0
    assert anonymization_cost(3, 10.0, 10.0) == pytest.approx(6.0, abs=1e-12)
    assert anonymization_cost(7, 2.0) == pytest.approx(ref_cost(7, 2.0), abs=1e-12)
    assert anonymization_cost(7, 2.0) == pytest.approx(4.21442, abs=1e-5)


def test_cost_rejects_bad_domain():
    for args in ((0, 2.0), (3, 0.5), (3, 2.0, 1.0)):
        with pytest.raises(InvalidParameterError):
            anonymization_cost(*args)


def test_trust_examples():
    assert trust_value(0.0, 7) == 0.0
    assert trust_value(1.0, 3) == 3.0
    assert trust_value(0.5, 7) == 3.5
    with pytest.raises(InvalidParameterError):
        trust_value(1.5, 3)


def test_success_probabilities():
    assert attack_success_prob(H, 3, 3, DEFAULT) == 0.6
    assert attack_success_prob(N, 3, 7, DEFAULT) == 0.0
    assert attack_success_prob(H, 3, 7, DEFAULT) == 0.2
    with pytest.raises(InvalidParameterError):
        attack_success_prob(B, 4, 7, DEFAULT)


def test_breach_single_examples():
    assert breach_single(0.0, 0.9, 3) == 0.0
    exact = Fraction(1, 2) / (Fraction(9, 10) * 3 + 1)
    assert breach_single(0.5, 0.9, 3) == pytest.approx(float(exact), abs=1e-15)
    assert breach_single(0.5, 0.9, 7) == pytest.approx(0.0684931, abs=1e-7)


def test_breach_joint_examples():
    assert breach_joint(N, 3, 7, DEFAULT) == 0.0
    third = Fraction(37, 10)
    exact_b = 1 - (1 - Fraction(1, 2) / third) ** 2
    exact_h = 1 - (1 - Fraction(3, 5) / third) ** 2
    assert breach_joint(B, 3, 3, DEFAULT) == pytest.approx(float(exact_b), abs=1e-15)
    assert breach_joint(H, 3, 3, DEFAULT) == pytest.approx(float(exact_h), abs=1e-15)
    assert breach_joint(B, 3, 3, DEFAULT) == pytest.approx(0.2520087, abs=1e-7)
    assert breach_joint(H, 3, 3, DEFAULT) == pytest.approx(0.2980277, abs=1e-7)


def test_org_utility_examples():
    assert org_utility(3, 3, N, 18.0, DEFAULT) == pytest.approx(18 - ref_cost(3, 2) + 3, abs=1e-12)
    assert org_utility(3, 3, N, 18.0, DEFAULT) == pytest.approx(19.1938, abs=1e-4)
    assert org_utility(7, 7, N, 16.0, DEFAULT) == pytest.approx(18.7855, abs=1e-4)
    assert org_utility(3, 3, B, 9.0, DEFAULT) == pytest.approx(7.92574, abs=1e-5)
    # default reward comes from the level
    assert org_utility(3, 7, N, None, DEFAULT) == no_attack_utility(3, DEFAULT)


def test_attacker_utility_examples():
    assert attacker_utility(3, 7, N, DEFAULT) == 0.0
    p20 = DEFAULT.with_value(20.0)
    p30 = DEFAULT.with_value(30.0)
    assert attacker_utility(3, 3, B, p20) == pytest.approx(-1.95983, abs=1e-5)
    assert attacker_utility(3, 3, H, p30) == pytest.approx(2.74083, abs=1e-5)


def test_min_profit_factor_examples():
    assert min_profit_factor(3, 3, DEFAULT, p_max=0.0) == 1.0
    assert min_profit_factor(3, 3, DEFAULT) == pytest.approx(0.7019722, abs=1e-7)
    # (1 - 0.6/7.3)^2 = (67/73)^2 exactly
    assert min_profit_factor(7, 7, DEFAULT) == pytest.approx(float(Fraction(67, 73) ** 2), abs=1e-15)


def test_params_validation():
    with pytest.raises(InvalidParameterError):
        GameParams(k_low=7, k_high=3)
    with pytest.raises(InvalidParameterError):
        GameParams(p_background=0.1, p_homog_diff=0.2)
    with pytest.raises(InvalidParameterError):
        GameParams(cost_attack_background=5.0, cost_attack_homog=6.0)
    with pytest.raises(InvalidParameterError):
        GameParams(alpha=0.0)
    # ordering checks can be dropped, domain checks cannot
    GameParams(p_background=0.1, p_homog_diff=0.2, enforce_ordering=False)
    with pytest.raises(InvalidParameterError):
        GameParams(p_background=1.2, enforce_ordering=False)


def test_with_value_scales_rewards():
    p = DEFAULT.with_value(20.0)
    assert (p.attacker_reward, p.reward_low, p.reward_high) == (20.0, 18.0, 16.0)


# ---- properties -----------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.05, 5.0), st.integers(1, 50))
def test_breach_single_decreasing_in_k_and_alpha(p, alpha, k):
    assert breach_single(p, alpha, k + 1) < breach_single(p, alpha, k)
    assert breach_single(p, alpha * 1.5, k) < breach_single(p, alpha, k)
    assert 0.0 <= breach_single(p, alpha, k) <= p


@settings(max_examples=200, deadline=None)
@given(game_params())
def test_breach_joint_forms_and_symmetry(params):
    for a in ACTIONS:
        for k1 in params.levels:
            for k2 in params.levels:
                f = breach_joint(a, k1, k2, params)
                assert abs(f - breach_joint_expanded(a, k1, k2, params)) <= 1e-12
                assert f == breach_joint(a, k2, k1, params)
                assert 0.0 <= f <= 1.0
                ref = ref_joint(a.short, k1, k2, params.alpha, params.p_background,
                                params.p_homog_same, params.p_homog_diff)
                assert abs(f - ref) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(game_params())
def test_utility_properties(params):
    for k1 in params.levels:
        assert attacker_utility(k1, params.k_high, N, params) == 0.0
        same = {org_utility(k1, k2, N, None, params) for k2 in params.levels}
        assert len(same) == 1
        top = no_attack_utility(k1, params)
        for k2 in params.levels:
            for a in ACTIONS:
                assert org_utility(k1, k2, a, None, params) <= top + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 40), st.floats(1.0, 1e6), st.sampled_from([2.0, math.e, 10.0]))
def test_cost_linear_in_k(k, v, base):
    assert anonymization_cost(k, v, base) == pytest.approx(
        k * anonymization_cost(1, v, base), rel=1e-12, abs=1e-12)
    assert anonymization_cost(k + 1, v, base) >= anonymization_cost(k, v, base)
