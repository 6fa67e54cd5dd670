"""Reward design by the data collector.

Each organization type is its anonymization level ``k`` with ``theta = 1/k``.
The collector maximizes ``sum(theta_i * (v_i - r_i))`` subject to individual
rationality (IR) and incentive compatibility (IC).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .model import InvalidParameterError, anonymization_cost, trust_value

IC_MODES = ("adjacent", "full")


@dataclass(frozen=True)
class OrgType:
    k: int
    theta: float
    cost: float
    trust: float
    valuation: float

    @property
    def net_cost(self) -> float:
        return self.cost - self.trust

    def net_utility(self, reward: float) -> float:
        # reward / k rather than theta * reward keeps break-even rewards exact
        return reward / self.k - self.cost + self.trust


def make_type(k: int, gamma: float, v_size: float, log_base: float = 10.0,
              valuation: float = 0.0) -> OrgType:
    if k < 1 or int(k) != k:
        raise InvalidParameterError(f"k must be a positive integer, got {k}")
    return OrgType(int(k), 1.0 / k, anonymization_cost(k, v_size, log_base),
                   trust_value(gamma, k), float(valuation))


@dataclass(frozen=True)
class ContractEntry:
    type: OrgType
    reward: float
    org_net_utility: float


@dataclass(frozen=True)
class ContractMenu:
    entries: tuple[ContractEntry, ...]
    principal_utility: float
    feasible: bool = True
    minimums: tuple[float, ...] | None = None

    @property
    def rewards(self) -> np.ndarray:
        return np.array([e.reward for e in self.entries])

    def ir_ok(self, tol: float = 1e-9) -> bool:
        mins = self.minimums or (0.0,) * len(self.entries)
        return all(e.org_net_utility >= m - tol for e, m in zip(self.entries, mins))

    def ic_ok(self, tol: float = 1e-9) -> bool:
        return not ic_violations(verify_menu(self), tol)


def _menu(types, rewards, feasible=True, minimums=None) -> ContractMenu:
    entries = tuple(ContractEntry(t, float(r), t.net_utility(float(r)))
                    for t, r in zip(types, rewards))
    principal = sum(t.theta * (t.valuation - r) for t, r in zip(types, rewards))
    return ContractMenu(entries, float(principal), feasible,
                        None if minimums is None else tuple(minimums))


def two_type_optimal(low: OrgType, high: OrgType) -> ContractMenu:
    """Closed-form menu for two types sharing the same dataset.

    The higher level's IR binds; the lower level gets the larger of its own
    break-even reward and the higher level's reward.
    """
    if not low.k < high.k:
        raise InvalidParameterError("low.k must be smaller than high.k")
    r_high = high.net_cost * high.k
    r_low = max(low.net_cost * low.k, r_high)
    return _menu((low, high), (r_low, r_high))


def n_type_optimal(types, ic: str = "adjacent", minimums=None,
                   nonnegative: bool = True) -> ContractMenu:
    """Optimal rewards for any number of types by linear programming.

    ``ic="adjacent"`` encodes incentive compatibility through the monotone
    reward ordering between neighbouring types (higher theta, weakly higher
    reward). ``ic="full"`` imposes every pairwise IC inequality instead; that
    system is infeasible whenever the net cost ``c - T`` grows with ``k``, and
    the returned menu then has ``feasible=False``.

    ``minimums`` raises each IR floor from 0 to the given per-type value.
    """
    if ic not in IC_MODES:
        raise ValueError(f"ic must be one of {IC_MODES}")
    types = list(types)
    if not types:
        raise InvalidParameterError("need at least one type")
    if len({t.k for t in types}) != len(types):
        raise InvalidParameterError("type levels must be distinct")
    n = len(types)
    mins = [0.0] * n if minimums is None else [float(m) for m in minimums]

    theta = np.array([t.theta for t in types])
    net = np.array([t.net_cost for t in types])
    ks = np.array([t.k for t in types], dtype=float)
    # rows are scaled by k so every coefficient is +-1 and vertices are exact
    rows, rhs = [], []
    for i in range(n):
        # r_i / k_i - net_i >= m_i
        row = np.zeros(n)
        row[i] = -1.0
        rows.append(row)
        rhs.append(-(net[i] + mins[i]) * ks[i])
    if ic == "full":
        for i in range(n):
            for j in range(n):
                if i != j:
                    # r_j / k_i - net_j <= r_i / k_i - net_i
                    row = np.zeros(n)
                    row[j] = 1.0
                    row[i] = -1.0
                    rows.append(row)
                    rhs.append((net[j] - net[i]) * ks[i])
    else:
        order = sorted(range(n), key=lambda i: types[i].k)
        for a, b in zip(order[:-1], order[1:]):
            # r_b <= r_a for k_a < k_b
            row = np.zeros(n)
            row[b] = 1.0
            row[a] = -1.0
            rows.append(row)
            rhs.append(0.0)

    A, b = np.array(rows), np.array(rhs)
    bounds = [(0.0 if nonnegative else None, None)] * n
    res = linprog(theta, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0:
        return _menu(types, [math.nan] * n, feasible=False, minimums=minimums)
    return _menu(types, _polish(res.x, A, b, bounds), minimums=minimums)


def _polish(x, A, b, bounds, tol=1e-7):
    """Re-solve a basis of active constraints so rewards carry no LP round-off."""
    n = len(x)
    cand_rows, cand_rhs = [], []
    for j, (lo, _) in enumerate(bounds):
        if lo is not None and abs(x[j] - lo) <= tol:
            e = np.zeros(n)
            e[j] = -1.0
            cand_rows.append(e)
            cand_rhs.append(-lo)
    for i in range(len(b)):
        if abs(A[i] @ x - b[i]) <= tol:
            cand_rows.append(A[i])
            cand_rhs.append(b[i])
    basis, basis_rhs = [], []
    for row, r in zip(cand_rows, cand_rhs):
        if np.linalg.matrix_rank(np.array(basis + [row])) > len(basis):
            basis.append(row)
            basis_rhs.append(r)
        if len(basis) == n:
            break
    if len(basis) < n:
        return x
    sol = np.linalg.solve(np.array(basis), np.array(basis_rhs))
    if np.all(A @ sol <= b + 1e-9) and np.allclose(sol, x, atol=1e-5):
        return sol
    return x


def verify_menu(menu: ContractMenu) -> np.ndarray:
    """Cross-utility matrix: entry (i, j) is type i's net utility under contract j."""
    n = len(menu.entries)
    out = np.empty((n, n))
    for i, ei in enumerate(menu.entries):
        for j, ej in enumerate(menu.entries):
            out[i, j] = ej.reward / ei.type.k - ej.type.cost + ej.type.trust
    return out


def ic_violations(matrix: np.ndarray, tol: float = 1e-9) -> list[tuple[int, int]]:
    """Pairs (i, j) where type i strictly prefers contract j to its own."""
    n = matrix.shape[0]
    return [(i, j) for i in range(n) for j in range(n)
            if i != j and matrix[i, j] > matrix[i, i] + tol]


@dataclass(frozen=True)
class LongTermOffer:
    per_step_minimum: float
    horizon: int
    binding_steps: frozenset
    missed_gain: float
    fraction: float

    @property
    def total_minimum(self) -> float:
        return self.per_step_minimum * len(self.binding_steps)

    @property
    def collector_gain(self) -> float:
        return self.missed_gain - self.total_minimum


def long_term_offer(theta_series, v_series, r_series, binding_steps,
                    fraction: float = 0.5) -> LongTermOffer | None:
    """Guaranteed per-step net outcome for an organization on a long contract.

    ``binding_steps`` are 1-based indices of steps where the organization's IR
    held with equality. The collector hands ``fraction`` of the gain it would
    otherwise miss on those steps back as equal per-step minimums. Returns
    ``None`` when there is nothing to incentivize.
    """
    if not 0.0 < fraction < 1.0:
        raise InvalidParameterError("fraction must lie strictly between 0 and 1")
    T = len(theta_series)
    if len(v_series) != T or len(r_series) != T:
        raise InvalidParameterError("series must have equal length")
    steps = frozenset(int(t) for t in binding_steps)
    if any(t < 1 or t > T for t in steps):
        raise InvalidParameterError(f"binding steps must lie in 1..{T}")
    if not steps:
        return None
    missed = float(sum(theta_series[t - 1] * (v_series[t - 1] - r_series[t - 1])
                       for t in sorted(steps)))
    if missed <= 0:
        return None
    return LongTermOffer(fraction * missed / len(steps), T, steps, missed, fraction)
