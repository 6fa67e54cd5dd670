"""Brute-force checks of equilibria.

Nothing here reuses the solver's expectation helpers: regrets are computed
straight from the payoff table by explicit summation over joint actions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .model import ACTIONS
from .static_game import Equilibrium, PayoffTensor


@dataclass(frozen=True)
class RegretReport:
    max_regret_org: float
    max_regret_attacker: float
    best_deviation: tuple[str, str]

    @property
    def regret(self) -> float:
        return max(self.max_regret_org, self.max_regret_attacker)


def _profile_report(U, s1, s2, q, levels) -> RegretReport:
    e1 = [0.0, 0.0]
    e2 = [0.0, 0.0]
    ea = [0.0, 0.0, 0.0]
    for x, y, a in itertools.product(range(2), range(2), range(3)):
        e1[x] += s2[y] * q[a] * U[x, y, a, 0]
        e2[y] += s1[x] * q[a] * U[x, y, a, 1]
        ea[a] += s1[x] * s2[y] * U[x, y, a, 2]
    gains = []
    for player, e, s in (("org1", e1, s1), ("org2", e2, s2)):
        current = s[0] * e[0] + s[1] * e[1]
        for x in range(2):
            gains.append((e[x] - current, player, f"k={levels[x]}"))
    current = q[0] * ea[0] + q[1] * ea[1] + q[2] * ea[2]
    for a in range(3):
        gains.append((ea[a] - current, "attacker", ACTIONS[a].short))
    org = max(0.0, max(g for g, who, _ in gains if who != "attacker"))
    att = max(0.0, max(g for g, who, _ in gains if who == "attacker"))
    top = max(gains, key=lambda g: g[0])
    return RegretReport(org, att, (top[1], top[2]))


def verify(eq: Equilibrium, tensor: PayoffTensor) -> RegretReport:
    """Exact best-response gains of every player against ``eq``."""
    s = (eq.org_p, 1.0 - eq.org_p)
    return _profile_report(tensor.array, s, s, eq.attacker_dist, tensor.levels)


def verify_profile(tensor: PayoffTensor, p1: float, p2: float, q) -> RegretReport:
    """Like :func:`verify` but organizations may play different mixes."""
    return _profile_report(tensor.array, (p1, 1.0 - p1), (p2, 1.0 - p2),
                           tuple(q), tensor.levels)


class GridCandidate(NamedTuple):
    p: float
    q_B: float
    q_H: float
    q_N: float
    regret: float
    p2: float | None = None


def count_profiles(resolution: int, symmetric: bool = True) -> int:
    n = resolution + 1
    simplex = n * (n + 1) // 2
    return (n if symmetric else n * n) * simplex


def grid_search(tensor: PayoffTensor, resolution: int, limit: int | None = 10,
                symmetric: bool = True, use_numba: bool | None = None) -> list[GridCandidate]:
    """Lowest-regret profiles on a uniform grid, best first.

    ``p`` takes ``resolution + 1`` evenly spaced values in [0, 1] and the
    attacker's mix ranges over the simplex points with denominators
    ``resolution``. Ties are broken by grid position, so output is
    deterministic. With ``symmetric=False`` the two organizations get
    independent grids; that mode is meant for small resolutions.
    """
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    total = count_profiles(resolution, symmetric)
    if limit is None:
        if total > 2_000_000:
            raise ValueError(f"{total} profiles is too many to return; pass a limit")
        limit = total
    limit = min(limit, total)
    if symmetric:
        regrets, flat = _kernels.grid_topk(tensor.array, resolution, limit, use_numba)
        out = []
        for r, idx in zip(regrets, flat):
            if idx < 0:
                continue
            p, qb, qh, qn = _kernels.decode_index(idx, resolution)
            out.append(GridCandidate(p, qb, qh, qn, float(r)))
        return out
    return _asymmetric_grid(tensor, resolution, limit, use_numba)


def _asymmetric_grid(tensor, resolution, limit, use_numba):
    n = resolution + 1
    grid = np.arange(n) / resolution
    simplex = np.array([(i, j) for i in range(n) for j in range(n - i)])
    q = np.column_stack([simplex[:, 0], simplex[:, 1],
                         resolution - simplex[:, 0] - simplex[:, 1]]) / resolution
    rows = []
    for a, p1 in enumerate(grid):
        for b, p2 in enumerate(grid):
            r = _kernels.profile_regrets(tensor.array, np.full(len(q), p1),
                                         np.full(len(q), p2), q, use_numba)
            order = np.argsort(r, kind="stable")[:limit]
            for t in order:
                rows.append((float(r[t]), (a * n + b) * len(q) + int(t), p1, p2, q[t]))
    rows.sort(key=lambda row: (row[0], row[1]))
    return [GridCandidate(float(p1), float(qq[0]), float(qq[1]), float(qq[2]), r, float(p2))
            for r, _, p1, p2, qq in rows[:limit]]
