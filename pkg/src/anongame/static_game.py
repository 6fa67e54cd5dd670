"""Two organizations versus one attacker: payoff table and Nash equilibria.

Only symmetric organization strategies are reported: both organizations pick
``k_low`` with the same probability ``p``. The attacker mixes over
(background, homogeneity, no attack) with ``(q_B, q_H, q_N)``.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import (
    ACTIONS,
    AttackAction,
    GameParams,
    anonymization_cost,
    attacker_utility,
    min_profit_factor,
    no_attack_utility,
    org_utility,
)

log = logging.getLogger(__name__)

REGRET_TOL = 1e-6
INDIFFERENCE_TOL = 1e-10
DEGENERACY_TOL = 1e-12

B, H, N = AttackAction.BACKGROUND, AttackAction.HOMOGENEITY, AttackAction.NO_ATTACK


class DegenerateGameWarning(UserWarning):
    """An indifference condition holds identically or has a vanishing denominator."""


class EquilibriumNotFound(RuntimeError):
    """No candidate passed certification.

    ``best`` holds the lowest-regret candidate that was tried (or ``None``).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class PayoffTensor:
    """Utilities of (org 1, org 2, attacker) over every joint action.

    ``array[x, y, a]`` holds the triple for org 1 at ``levels[x]``, org 2 at
    ``levels[y]`` and attack action ``a``.
    """

    array: np.ndarray
    levels: tuple[int, int]

    def index(self, k: int) -> int:
        return self.levels.index(k)

    def entry(self, k_1: int, k_2: int, action: AttackAction) -> tuple[float, float, float]:
        u = self.array[self.index(k_1), self.index(k_2), int(action)]
        return float(u[0]), float(u[1]), float(u[2])

    def cells(self):
        for x, k_1 in enumerate(self.levels):
            for y, k_2 in enumerate(self.levels):
                for action in ACTIONS:
                    yield (k_1, k_2, action), tuple(self.array[x, y, int(action)])


def build_tensor(params: GameParams) -> PayoffTensor:
    arr = np.empty((2, 2, 3, 3))
    levels = params.levels
    for x, k_1 in enumerate(levels):
        for y, k_2 in enumerate(levels):
            for action in ACTIONS:
                arr[x, y, int(action)] = (
                    org_utility(k_1, k_2, action, None, params),
                    org_utility(k_2, k_1, action, None, params),
                    attacker_utility(k_1, k_2, action, params),
                )
    arr.setflags(write=False)
    return PayoffTensor(arr, levels)


class EquilibriumKind(enum.Enum):
    PURE_NO_ATTACK = "PureNoAttack"
    PURE_DOMINANT = "PureDominant"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Equilibrium:
    kind: EquilibriumKind
    org_p: float
    attacker_dist: tuple[float, float, float]
    expected_org_utility: float
    expected_attacker_utility: float
    regret: float
    support: str = ""
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def q_B(self) -> float:
        return self.attacker_dist[0]

    @property
    def q_H(self) -> float:
        return self.attacker_dist[1]

    @property
    def q_N(self) -> float:
        return self.attacker_dist[2]

    def strategy_vector(self) -> np.ndarray:
        return np.array([self.org_p, *self.attacker_dist])


# --------------------------------------------------------------------------
# expectations under symmetric organization play

def _mix(p: float) -> np.ndarray:
    return np.array([p, 1.0 - p])


def attacker_expectations(tensor: PayoffTensor, p: float) -> np.ndarray:
    """Attacker's expected utility of each action when both orgs play ``p``."""
    s = _mix(p)
    return np.einsum("xya,x,y->a", tensor.array[..., 2], s, s)


def org_expectations(tensor: PayoffTensor, p: float, q) -> np.ndarray:
    """Org 1's expected utility of (k_low, k_high) against org 2 at ``p`` and attacker ``q``."""
    return np.einsum("xya,y,a->x", tensor.array[..., 0], _mix(p), np.asarray(q, float))


def _org_gap_per_action(tensor: PayoffTensor, p: float) -> np.ndarray:
    # org 1's preference for k_low under each pure attack action
    e = np.einsum("xya,y->xa", tensor.array[..., 0], _mix(p))
    return e[0] - e[1]


def expected_utilities(eq: Equilibrium, tensor: PayoffTensor) -> tuple[float, float]:
    """(org 1, attacker) expected utilities of the profile in ``eq``."""
    s = _mix(eq.org_p)
    q = np.asarray(eq.attacker_dist, float)
    org = np.einsum("xya,x,y,a->", tensor.array[..., 0], s, s, q)
    att = np.einsum("xya,x,y,a->", tensor.array[..., 2], s, s, q)
    return float(org), float(att)


def indifference_gaps(eq: Equilibrium, tensor: PayoffTensor) -> tuple[float, float]:
    """Spread of expected payoffs across each player's support.

    Returns ``(attacker_gap, org_gap)``; a player with a single action in its
    support has gap 0.
    """
    ea = attacker_expectations(tensor, eq.org_p)
    used = [ea[a] for a in range(3) if eq.attacker_dist[a] > 0]
    att_gap = float(max(used) - min(used)) if len(used) > 1 else 0.0
    org_gap = 0.0
    if 0.0 < eq.org_p < 1.0:
        e = org_expectations(tensor, eq.org_p, eq.attacker_dist)
        org_gap = float(abs(e[0] - e[1]))
    return att_gap, org_gap


# --------------------------------------------------------------------------
# pure strategy results

def no_attack_pure_equilibrium(params: GameParams) -> Equilibrium | None:
    """Equilibrium where idling strictly dominates every attack, if it exists."""
    tensor = build_tensor(params)
    attack_cells = tensor.array[:, :, :2, 2]
    if not np.all(attack_cells < 0):
        return None
    u_low = no_attack_utility(params.k_low, params)
    u_high = no_attack_utility(params.k_high, params)
    org_p = 1.0 if u_low >= u_high else 0.0
    return _certified(tensor, EquilibriumKind.PURE_NO_ATTACK, org_p, (0.0, 0.0, 1.0), "N")


def org_dominant_strategy(params: GameParams) -> int | None:
    """Level recommended by the minimum-profit-factor dominance test.

    Returns ``None`` when the reward of either level is too small for the
    worst-case retained reward to dominate the cost and trust terms.
    """
    scores = {}
    for k in params.levels:
        delta = min_profit_factor(k, k, params)
        c = anonymization_cost(k, params.v_size, params.log_base)
        t = params.gamma * k
        r = params.reward_for(k)
        if not delta * r > t - c:
            return None
        scores[k] = delta * r - c + t
    # ties go to the lower level
    return params.k_low if scores[params.k_low] >= scores[params.k_high] else params.k_high


def pure_equilibria(tensor: PayoffTensor, tol: float = 0.0) -> list[tuple[int, int, AttackAction]]:
    """All pure profiles where no player gains more than ``tol`` by deviating."""
    U = tensor.array
    found = []
    for x in range(2):
        for y in range(2):
            for a in range(3):
                if (U[1 - x, y, a, 0] - U[x, y, a, 0] <= tol
                        and U[x, 1 - y, a, 1] - U[x, y, a, 1] <= tol
                        and U[x, y, :, 2].max() - U[x, y, a, 2] <= tol):
                    found.append((tensor.levels[x], tensor.levels[y], ACTIONS[a]))
    return found


# --------------------------------------------------------------------------
# mixing probabilities

def quadratic_coefficients(params: GameParams, p_homog: float | None = None):
    """Coefficients ``(a2, a1, a0)`` of the attacker's B-versus-H indifference.

    Exact when a single homogeneity success probability applies to every
    pair of levels; ``p_homog`` picks it (default ``p_homog_same``).
    """
    ph = params.p_homog_same if p_homog is None else p_homog
    pb = params.p_background
    lo = 1.0 / (params.alpha * params.k_low + 1.0)
    hi = 1.0 / (params.alpha * params.k_high + 1.0)
    d1 = pb - ph
    d2 = pb * pb - ph * ph
    R = params.attacker_reward
    dc = params.cost_attack_background - params.cost_attack_homog
    a2 = (2 * d2 * lo * hi - d2 * hi * hi - d2 * lo * lo) * R
    a1 = 2 * R * (d1 * lo - d1 * hi + d2 * hi * hi - d2 * lo * hi)
    a0 = (2 * d1 * hi - d2 * hi * hi) * R - dc
    return a2, a1, a0


def solve_p_analytic(params: GameParams, p_homog: float | None = None) -> list[float]:
    """Roots in [0, 1] of the closed-form indifference quadratic, ascending."""
    a2, a1, a0 = quadratic_coefficients(params, p_homog)
    scale = max(abs(a2), abs(a1), abs(a0), 1.0)
    if abs(a2) < 1e-14 * scale:
        if abs(a1) < 1e-14 * scale:
            if abs(a0) < 1e-14 * scale:
                warnings.warn("indifference holds for every p", DegenerateGameWarning,
                              stacklevel=2)
            return []
        roots = [-a0 / a1]
    else:
        disc = a1 * a1 - 4 * a2 * a0
        if disc < 0:
            return []
        sq = math.sqrt(disc)
        # numerically stable pair
        t = -0.5 * (a1 + math.copysign(sq, a1))
        roots = [t / a2, a0 / t] if t != 0 else [-a1 / (2 * a2)]
    eps = 1e-12
    out = sorted(min(max(r, 0.0), 1.0) for r in roots if -eps <= r <= 1 + eps)
    dedup = []
    for r in out:
        if not dedup or abs(r - dedup[-1]) > 1e-12:
            dedup.append(r)
    return dedup


def _bisect(g, lo, hi, g_lo, tol=INDIFFERENCE_TOL):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if abs(g_mid) <= tol * 1e-2 or hi - lo < 1e-16:
            return mid
        if (g_mid < 0) == (g_lo < 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _roots_of_quadratic_fn(g, tol=INDIFFERENCE_TOL) -> list[float] | None:
    """Roots in [0, 1] of a function known to be a polynomial of degree <= 2.

    Returns ``None`` when ``g`` vanishes identically.
    """
    g0, gh, g1 = g(0.0), g(0.5), g(1.0)
    # interpolate to find the turning point, then bisect each monotone piece
    a2 = 2 * g0 - 4 * gh + 2 * g1
    a1 = -3 * g0 + 4 * gh - g1
    scale = max(abs(g0), abs(gh), abs(g1))
    if scale < DEGENERACY_TOL:
        return None
    cuts = [0.0]
    if abs(a2) > 1e-14 * scale:
        vertex = -a1 / (2 * a2)
        if 0.0 < vertex < 1.0:
            cuts.append(vertex)
    cuts.append(1.0)
    roots = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        g_lo, g_hi = g(lo), g(hi)
        if abs(g_lo) <= tol:
            r = lo
        elif abs(g_hi) <= tol:
            r = hi
        elif (g_lo < 0) != (g_hi < 0):
            r = _bisect(g, lo, hi, g_lo, tol)
        else:
            continue
        if not roots or abs(r - roots[-1]) > 1e-9:
            roots.append(r)
    return roots


def attacker_indifference_roots(tensor: PayoffTensor, a: AttackAction = B,
                                b: AttackAction = H) -> list[float] | None:
    """All p in [0, 1] where actions ``a`` and ``b`` pay the attacker equally."""
    g = lambda p: float(attacker_expectations(tensor, p)[a] - attacker_expectations(tensor, p)[b])
    return _roots_of_quadratic_fn(g)


def solve_p_numeric(params: GameParams) -> float | None:
    """Smallest p making the attacker indifferent between B and H.

    Works on the full payoff table, so same-level and mixed-level homogeneity
    probabilities are both respected. Returns 0.5 with a warning when the two
    attacks are interchangeable, and ``None`` when no crossing exists.
    """
    roots = attacker_indifference_roots(build_tensor(params))
    if roots is None:
        warnings.warn("B and H are interchangeable for the attacker", DegenerateGameWarning,
                      stacklevel=2)
        return 0.5
    return roots[0] if roots else None


def _pair_weight(tensor: PayoffTensor, p: float, a: AttackAction, b: AttackAction) -> float | None:
    """Weight on ``a`` (rest on ``b``) that leaves org 1 indifferent between levels."""
    d = _org_gap_per_action(tensor, p)
    den = d[b] - d[a]
    if abs(den) < DEGENERACY_TOL:
        warnings.warn("organization indifference has a vanishing denominator",
                      DegenerateGameWarning, stacklevel=3)
        return None
    t = d[b] / den
    if t < -1e-9 or t > 1 + 1e-9:
        return None
    return min(max(t, 0.0), 1.0)


def solve_q_given_p(p: float, tensor: PayoffTensor) -> float | None:
    """Probability of B (rest on H) making org 1 indifferent when org 2 plays ``p``."""
    return _pair_weight(tensor, p, B, H)


# --------------------------------------------------------------------------
# full solve

def _certified(tensor, kind, org_p, dist, support, **diag) -> Equilibrium:
    from .oracle import verify

    dist = tuple(float(x) for x in dist)
    probe = Equilibrium(kind, float(org_p), dist, 0.0, 0.0, 0.0, support)
    org_u, att_u = expected_utilities(probe, tensor)
    report = verify(probe, tensor)
    return Equilibrium(kind, float(org_p), dist, org_u, att_u, report.regret, support, diag)


def _candidates(params: GameParams, tensor: PayoffTensor):
    """Yield symmetric candidate profiles in the fixed search order."""
    eq = no_attack_pure_equilibrium(params)
    if eq is not None:
        yield eq

    # symmetric pure profiles
    for k_1, k_2, action in pure_equilibria(tensor, tol=1e-12):
        if k_1 != k_2:
            continue
        kind = (EquilibriumKind.PURE_NO_ATTACK if action is N
                else EquilibriumKind.PURE_DOMINANT)
        dist = [0.0, 0.0, 0.0]
        dist[action] = 1.0
        yield _certified(tensor, kind, 1.0 if k_1 == params.k_low else 0.0, dist,
                         action.short)

    # attacker mixes B and H
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGameWarning)
        roots = attacker_indifference_roots(tensor, B, H) or []
        analytic = solve_p_analytic(params)
    for p in roots:
        if p in (0.0, 1.0):
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateGameWarning)
            q = solve_q_given_p(p, tensor)
        if q is None:
            continue
        yield _certified(tensor, EquilibriumKind.MIXED, p, (q, 1.0 - q, 0.0), "BH",
                         numeric_roots=roots, analytic_roots=analytic)

    # attacker plays one attack; organizations mix
    for a in (B, H):
        d = _org_gap_per_action(tensor, 0.0), _org_gap_per_action(tensor, 1.0)
        d0, d1 = d[0][a], d[1][a]
        if abs(d1 - d0) < DEGENERACY_TOL:
            continue
        p = d0 / (d0 - d1)  # org gap is affine in p
        if not 0.0 < p < 1.0:
            continue
        dist = [0.0, 0.0, 0.0]
        dist[a] = 1.0
        yield _certified(tensor, EquilibriumKind.MIXED, p, dist, a.short)

    # attacker mixes one attack with staying idle
    for a in (B, H):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateGameWarning)
            roots_n = attacker_indifference_roots(tensor, a, N) or []
        for p in roots_n:
            if p in (0.0, 1.0):
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateGameWarning)
                t = _pair_weight(tensor, p, a, N)
            if t is None:
                continue
            dist = [0.0, 0.0, 0.0]
            dist[a] = t
            dist[N] = 1.0 - t
            yield _certified(tensor, EquilibriumKind.MIXED, p, dist, a.short + "N")


def enumerate_equilibria(params: GameParams, tol: float = REGRET_TOL) -> list[Equilibrium]:
    """Every certified symmetric candidate, in search order (diagnostics listing)."""
    tensor = build_tensor(params)
    out = []
    for eq in _candidates(params, tensor):
        if eq.regret <= tol and not any(_same(eq, e) for e in out):
            out.append(eq)
    return out


def _same(a: Equilibrium, b: Equilibrium) -> bool:
    return np.allclose(a.strategy_vector(), b.strategy_vector(), atol=1e-9)


def solve_equilibrium(params: GameParams, tol: float = REGRET_TOL) -> Equilibrium:
    """First symmetric equilibrium in the fixed search order.

    Order: strict no-attack profile, symmetric pure profiles, attacker mixing
    B/H, attacker pure with organizations mixing, attacker mixing an attack
    with idling. Every candidate is certified by the oracle; the first whose
    regret is within ``tol`` is returned.
    """
    tensor = build_tensor(params)
    best = None
    for eq in _candidates(params, tensor):
        if eq.regret <= tol:
            if eq.kind is EquilibriumKind.MIXED and eq.support == "BH":
                _cross_check(eq)
            return eq
        if best is None or eq.regret < best.regret:
            best = eq
    raise EquilibriumNotFound(
        f"no symmetric equilibrium within regret {tol:g}"
        + ("" if best is None else f"; best candidate regret {best.regret:.3g}"),
        best=best)


def _cross_check(eq: Equilibrium) -> None:
    analytic = eq.diagnostics.get("analytic_roots") or []
    if analytic and min(abs(r - eq.org_p) for r in analytic) > 1e-6:
        log.debug("closed-form roots %s differ from numeric p=%.9g", analytic, eq.org_p)
