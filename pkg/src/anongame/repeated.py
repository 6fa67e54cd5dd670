"""Repeated sharing: trust dynamics and seeded round-by-round simulation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contracts import long_term_offer, make_type, two_type_optimal
from .model import (
    AttackAction,
    GameParams,
    InvalidParameterError,
    anonymization_cost,
    breach_joint,
    org_utility,
    _check_prob,
)
from .static_game import Equilibrium, EquilibriumNotFound, solve_equilibrium

REWARD_RULES = ("proportional", "dynamic", "contract")


def trust_update(gamma_prev: float, attack_blocked: bool) -> float:
    _check_prob("gamma", gamma_prev)
    return (gamma_prev + 1.0) / 2.0 if attack_blocked else gamma_prev / 2.0


def trust_trajectory(gamma0: float, outcomes) -> list[float]:
    """Trust after each round; ``outcomes[t]`` is True when round t was blocked."""
    out = []
    g = gamma0
    _check_prob("gamma0", g)
    for blocked in outcomes:
        g = trust_update(g, bool(blocked))
        out.append(g)
    return out


def dynamic_org_utility(k_i: int, k_j: int, action: AttackAction, R_t: float,
                        gamma_t: float, params: GameParams) -> float:
    """Round utility where the reward is the dataset value scaled by 1/k."""
    return org_utility(k_i, k_j, action, R_t / k_i, params.replace(gamma=gamma_t))


@dataclass(frozen=True)
class RoundRecord:
    step: int
    gamma_played: float
    gamma: float
    equilibrium: Equilibrium
    levels: tuple[int, int]
    attack_action: AttackAction
    attack_succeeded: bool
    org_realized_utility: tuple[float, float]
    attacker_realized_utility: float
    value: float
    rewards: tuple[float, float]
    thetas: tuple[float, float]
    org_collector_utility: tuple[float, float]
    org_net_outcome: tuple[float, float]

    @property
    def collector_utility(self) -> float:
        return self.org_collector_utility[0] + self.org_collector_utility[1]

    @property
    def blocked(self) -> bool:
        return not self.attack_succeeded


@dataclass
class SimulationTrace:
    rounds: list = field(default_factory=list)
    seed: int = 0
    horizon: int = 0

    @property
    def cumulative_collector_utility(self) -> float:
        return float(sum(r.collector_utility for r in self.rounds))

    @property
    def gammas(self) -> list[float]:
        return [r.gamma for r in self.rounds]


class SimulationAborted(RuntimeError):
    """A round could not be solved; ``trace`` holds the rounds completed so far."""

    def __init__(self, message, trace, cause=None):
        super().__init__(message)
        self.trace = trace
        self.cause = cause


def round_params(params: GameParams, gamma: float, value: float, rule: str,
                 low_ratio: float = 0.9, high_ratio: float = 0.8) -> GameParams:
    """Game played in one round given trust ``gamma`` and dataset value ``value``."""
    if rule == "proportional":
        return params.replace(gamma=gamma).with_value(value, low_ratio, high_ratio)
    if rule == "dynamic":
        return params.replace(gamma=gamma, attacker_reward=value,
                              reward_low=value / params.k_low,
                              reward_high=value / params.k_high)
    if rule == "contract":
        low = make_type(params.k_low, gamma, params.v_size, params.log_base, value)
        high = make_type(params.k_high, gamma, params.v_size, params.log_base, value)
        menu = two_type_optimal(low, high)
        r_low, r_high = (max(0.0, r) for r in menu.rewards)
        return params.replace(gamma=gamma, attacker_reward=value,
                              reward_low=r_low, reward_high=r_high)
    raise InvalidParameterError(f"unknown reward rule {rule!r}; use one of {REWARD_RULES}")


def simulate(params: GameParams, horizon: int, gamma0: float = 0.1, value_series=None,
             seed: int = 0, reward_rule: str = "proportional", attack_override=None,
             outcomes=None, low_ratio: float = 0.9, high_ratio: float = 0.8) -> SimulationTrace:
    """Play ``horizon`` rounds, re-solving the static game each round.

    Round ``t`` is played with the trust left by round ``t-1`` (``gamma0`` for
    the first round). Per round, four uniforms are drawn from one seeded
    generator in fixed order: org 1 level, org 2 level, attacker action,
    breach. A round counts as blocked when nobody attacks or the attack fails.

    ``attack_override`` forces the attacker's action every round.
    ``outcomes`` scripts the breach result per round (True means blocked);
    a scripted breach against an idle attacker switches it to its most
    likely attack, or background knowledge if it never attacks.
    """
    if horizon < 0:
        raise InvalidParameterError("horizon must be nonnegative")
    _check_prob("gamma0", gamma0)
    if value_series is None:
        value_series = [params.attacker_reward] * horizon
    value_series = [float(v) for v in value_series]
    if len(value_series) != horizon:
        raise InvalidParameterError("value_series length must equal horizon")
    if outcomes is not None and len(outcomes) != horizon:
        raise InvalidParameterError("outcomes length must equal horizon")
    if reward_rule not in REWARD_RULES:
        raise InvalidParameterError(f"unknown reward rule {reward_rule!r}")
    if attack_override is not None and not isinstance(attack_override, AttackAction):
        attack_override = AttackAction.parse(str(attack_override))

    rng = np.random.default_rng(seed)
    trace = SimulationTrace(seed=seed, horizon=horizon)
    gamma = gamma0
    for t in range(horizon):
        v = value_series[t]
        game = round_params(params, gamma, v, reward_rule, low_ratio, high_ratio)
        try:
            eq = solve_equilibrium(game)
        except EquilibriumNotFound as exc:
            raise SimulationAborted(f"round {t + 1}: {exc}", trace, exc) from exc

        u1, u2, ua, ub = rng.random(4)
        k1 = game.k_low if u1 < eq.org_p else game.k_high
        k2 = game.k_low if u2 < eq.org_p else game.k_high
        cum = np.cumsum(eq.attacker_dist)
        action = AttackAction(min(int(np.searchsorted(cum, ua, side="right")), 2))
        if attack_override is not None:
            action = attack_override

        if outcomes is not None:
            succeeded = not bool(outcomes[t])
            if succeeded and action is AttackAction.NO_ATTACK:
                q = eq.attacker_dist
                action = (AttackAction.HOMOGENEITY if q[1] > q[0]
                          else AttackAction.BACKGROUND)
        else:
            succeeded = (action is not AttackAction.NO_ATTACK
                         and ub < breach_joint(action, k1, k2, game))

        rewards = (game.reward_for(k1), game.reward_for(k2))
        thetas = (1.0 / k1, 1.0 / k2)
        realized = []
        net = []
        for k, r, th in zip((k1, k2), rewards, thetas):
            base = -anonymization_cost(k, game.v_size, game.log_base) + gamma * k
            realized.append((0.0 if succeeded else r) + base)
            # contract-side net outcome, the quantity IR constrains
            net.append(th * r + base)
        att = 0.0
        if action is not AttackAction.NO_ATTACK:
            att = (game.attacker_reward if succeeded else 0.0) - game.attack_cost(action)
        coll = tuple(th * (v - r) for th, r in zip(thetas, rewards))

        new_gamma = trust_update(gamma, not succeeded)
        trace.rounds.append(RoundRecord(
            step=t + 1, gamma_played=gamma, gamma=new_gamma, equilibrium=eq,
            levels=(k1, k2), attack_action=action, attack_succeeded=succeeded,
            org_realized_utility=tuple(realized), attacker_realized_utility=att,
            value=v, rewards=rewards, thetas=thetas, org_collector_utility=coll,
            org_net_outcome=tuple(net)))
        gamma = new_gamma
    return trace


def binding_steps(trace: SimulationTrace, org: int = 0, tol: float = 1e-9) -> set[int]:
    """1-based rounds where organization ``org`` earned exactly zero net outcome."""
    return {r.step for r in trace.rounds if abs(r.org_net_outcome[org]) <= tol}


@dataclass(frozen=True)
class CollectorAccounting:
    baseline: float
    with_offer: float
    missed_gain: float
    total_minimum: float
    fraction: float

    @property
    def improvement(self) -> float:
        return self.with_offer - self.baseline


def collector_accounting(trace: SimulationTrace, org: int = 0, fraction: float = 0.5,
                         tol: float = 1e-9):
    """Collector totals for one organization with and without a long-term offer.

    Without the offer the organization sits out its binding rounds, so the
    collector loses those rounds' gain. With it the organization shares every
    round and the collector pays the guaranteed minimums. Returns ``(offer,
    accounting)``; ``offer`` is ``None`` when the binding set is empty.
    """
    steps = binding_steps(trace, org, tol)
    theta = [r.thetas[org] for r in trace.rounds]
    v = [r.value for r in trace.rounds]
    r_ = [r.rewards[org] for r in trace.rounds]
    offer = long_term_offer(theta, v, r_, steps, fraction)
    per_round = [r.org_collector_utility[org] for r in trace.rounds]
    baseline = float(sum(u for r, u in zip(trace.rounds, per_round) if r.step not in steps))
    if offer is None:
        return None, CollectorAccounting(baseline, baseline, 0.0, 0.0, fraction)
    with_offer = baseline + offer.missed_gain - offer.total_minimum
    return offer, CollectorAccounting(baseline, with_offer, offer.missed_gain,
                                      offer.total_minimum, fraction)
