"""Utility primitives for the anonymization game.

Two organizations share k-anonymized datasets with a common data collector
while an attacker picks between a background-knowledge attack, a homogeneity
attack, or staying idle. Every function here is a pure function of its
arguments; money values are plain floats with no unit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace


class InvalidParameterError(ValueError):
    """Raised when a model argument falls outside its domain."""


class AttackAction(enum.IntEnum):
    BACKGROUND = 0
    HOMOGENEITY = 1
    NO_ATTACK = 2

    @property
    def short(self) -> str:
        return "BHN"[self.value]

    @classmethod
    def parse(cls, text: str) -> "AttackAction":
        key = text.strip().upper()
        for action in cls:
            if key in (action.short, action.name):
                return action
        raise InvalidParameterError(f"unknown attack action {text!r}")


ACTIONS = tuple(AttackAction)


def _check_prob(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise InvalidParameterError(f"{name} must be a probability, got {value}")


@dataclass(frozen=True)
class GameParams:
    """All scalar parameters of the two-organization game.

    Defaults are the calibrated simulation setting with a dataset value of 50
    (attacker reward 50, rewards 0.9 and 0.8 of the value). Setting
    ``enforce_ordering=False`` keeps the domain checks but drops the ordering
    assumptions between attack probabilities and costs, which degenerate test
    games need.
    """

    k_low: int = 3
    k_high: int = 7
    alpha: float = 0.9
    gamma: float = 1.0
    p_background: float = 0.5
    p_homog_same: float = 0.6
    p_homog_diff: float = 0.2
    cost_attack_background: float = 7.0
    cost_attack_homog: float = 6.2
    attacker_reward: float = 50.0
    reward_low: float = 45.0
    reward_high: float = 40.0
    v_size: float = 2.0
    log_base: float = 10.0
    enforce_ordering: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if int(self.k_low) != self.k_low or int(self.k_high) != self.k_high:
            raise InvalidParameterError("anonymization levels must be integers")
        if not 1 <= self.k_low < self.k_high:
            raise InvalidParameterError(
                f"need 1 <= k_low < k_high, got {self.k_low}, {self.k_high}")
        if not self.alpha > 0:
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha}")
        _check_prob("gamma", self.gamma)
        _check_prob("p_background", self.p_background)
        _check_prob("p_homog_same", self.p_homog_same)
        _check_prob("p_homog_diff", self.p_homog_diff)
        if self.cost_attack_background < 0 or self.cost_attack_homog < 0:
            raise InvalidParameterError("attack costs must be nonnegative")
        if self.enforce_ordering:
            if not (self.p_background > self.p_homog_diff > 0):
                raise InvalidParameterError("need p_background > p_homog_diff > 0")
            if not self.p_homog_same > self.p_homog_diff:
                raise InvalidParameterError("need p_homog_same > p_homog_diff")
            if not (self.cost_attack_background > self.cost_attack_homog > 0):
                raise InvalidParameterError(
                    "need cost_attack_background > cost_attack_homog > 0")
        if not self.v_size >= 1:
            raise InvalidParameterError(f"v_size must be >= 1, got {self.v_size}")
        if not self.log_base > 1:
            raise InvalidParameterError(f"log_base must be > 1, got {self.log_base}")

    @property
    def levels(self) -> tuple[int, int]:
        return (self.k_low, self.k_high)

    @property
    def p_max(self) -> float:
        return max(self.p_background, self.p_homog_same, self.p_homog_diff)

    def reward_for(self, k: int) -> float:
        _check_level(k, self)
        return self.reward_low if k == self.k_low else self.reward_high

    def attack_cost(self, action: AttackAction) -> float:
        if action is AttackAction.BACKGROUND:
            return self.cost_attack_background
        if action is AttackAction.HOMOGENEITY:
            return self.cost_attack_homog
        return 0.0

    def with_value(self, value: float, low_ratio: float = 0.9,
                   high_ratio: float = 0.8) -> "GameParams":
        """Set attacker reward to ``value`` and rewards to fixed fractions of it."""
        return replace(self, attacker_reward=value,
                       reward_low=low_ratio * value,
                       reward_high=high_ratio * value)

    def replace(self, **changes) -> "GameParams":
        return replace(self, **changes)


def _check_level(k: int, params: GameParams) -> None:
    if k not in (params.k_low, params.k_high):
        raise InvalidParameterError(
            f"k={k} is not one of the available levels {params.levels}")


def anonymization_cost(k: int, v_size: float, log_base: float = 10.0) -> float:
    """Monetary cost of reaching level ``k``: log of the |V|^(2k) search effort."""
    if k < 1 or int(k) != k:
        raise InvalidParameterError(f"k must be a positive integer, got {k}")
    if not v_size >= 1:
        raise InvalidParameterError(f"v_size must be >= 1, got {v_size}")
    if not log_base > 1:
        raise InvalidParameterError(f"log_base must be > 1, got {log_base}")
    # expanded form avoids overflow of v_size**(2k)
    return 2.0 * k * math.log(v_size) / math.log(log_base)


def trust_value(gamma: float, k: int) -> float:
    _check_prob("gamma", gamma)
    return gamma * k


def attack_success_prob(action: AttackAction, k_i: int, k_j: int,
                        params: GameParams) -> float:
    _check_level(k_i, params)
    _check_level(k_j, params)
    if action is AttackAction.BACKGROUND:
        return params.p_background
    if action is AttackAction.HOMOGENEITY:
        return params.p_homog_same if k_i == k_j else params.p_homog_diff
    return 0.0


def breach_single(p_attack: float, alpha: float, k: int) -> float:
    """Chance that an attack with success rate ``p_attack`` breaches a level-``k`` dataset."""
    _check_prob("p_attack", p_attack)
    if not alpha > 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    if k < 1:
        raise InvalidParameterError(f"k must be positive, got {k}")
    return p_attack / (alpha * k + 1.0)


def breach_joint(action: AttackAction, k_1: int, k_2: int,
                 params: GameParams) -> float:
    """Probability that at least one of the two linked datasets is breached."""
    p = attack_success_prob(action, k_1, k_2, params)
    b1 = breach_single(p, params.alpha, k_1)
    b2 = breach_single(p, params.alpha, k_2)
    return 1.0 - (1.0 - b1) * (1.0 - b2)


def breach_joint_expanded(action: AttackAction, k_1: int, k_2: int,
                          params: GameParams) -> float:
    """Same quantity as :func:`breach_joint` written as b1 + b2 - b1*b2."""
    p = attack_success_prob(action, k_1, k_2, params)
    b1 = breach_single(p, params.alpha, k_1)
    b2 = breach_single(p, params.alpha, k_2)
    return b1 + b2 - b1 * b2


def org_utility(k_i: int, k_j: int, action: AttackAction,
                reward: float | None, params: GameParams) -> float:
    """Utility of an organization at level ``k_i`` facing a partner at ``k_j``.

    ``reward`` overrides the level-based reward in ``params`` when given.
    """
    if reward is None:
        reward = params.reward_for(k_i)
    keep = 1.0 - breach_joint(action, k_i, k_j, params)
    return (reward * keep
            - anonymization_cost(k_i, params.v_size, params.log_base)
            + trust_value(params.gamma, k_i))


def no_attack_utility(k: int, params: GameParams, reward: float | None = None) -> float:
    if reward is None:
        reward = params.reward_for(k)
    return (reward - anonymization_cost(k, params.v_size, params.log_base)
            + trust_value(params.gamma, k))


def attacker_utility(k_1: int, k_2: int, action: AttackAction,
                     params: GameParams) -> float:
    if action is AttackAction.NO_ATTACK:
        _check_level(k_1, params)
        _check_level(k_2, params)
        return 0.0
    return (breach_joint(action, k_1, k_2, params) * params.attacker_reward
            - params.attack_cost(action))


def min_profit_factor(k_i: int, k_j: int, params: GameParams,
                      p_max: float | None = None) -> float:
    """Worst-case retained fraction of the reward, using the strongest attack.

    ``p_max`` defaults to the largest success probability in ``params``.
    """
    _check_level(k_i, params)
    _check_level(k_j, params)
    p = params.p_max if p_max is None else p_max
    _check_prob("p_max", p)
    return ((1.0 - p / (params.alpha * k_i + 1.0))
            * (1.0 - p / (params.alpha * k_j + 1.0)))
