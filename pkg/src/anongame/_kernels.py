"""Hot loops of the brute-force oracle.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy version
with identical arithmetic. ``ANONGAME_DISABLE_NUMBA=1`` (or a missing numba
install) selects the numpy path at import time.

Payoff arrays have shape ``(2, 2, 3, 3)`` indexed as
``[level of org 1, level of org 2, attack action, player]`` with players
ordered (org 1, org 2, attacker).
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba ships with the test env
    numba = None

_DISABLED = os.environ.get("ANONGAME_DISABLE_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on")
HAS_NUMBA = numba is not None and not _DISABLED


def _njit(*args, **kwargs):
    if numba is None:
        return lambda fn: fn
    return numba.njit(*args, **kwargs)


# --------------------------------------------------------------------------
# per-row precomputation shared by both paths

def _row_coefficients(U, p):
    """Attacker payoffs per action and org preference for k_low per action."""
    s0 = p
    s1 = 1.0 - p
    ea = np.empty(3)
    d1 = np.empty(3)
    d2 = np.empty(3)
    for a in range(3):
        ea[a] = (s0 * s0 * U[0, 0, a, 2] + s0 * s1 * U[0, 1, a, 2]
                 + s1 * s0 * U[1, 0, a, 2] + s1 * s1 * U[1, 1, a, 2])
        d1[a] = (s0 * U[0, 0, a, 0] + s1 * U[0, 1, a, 0]
                 - s0 * U[1, 0, a, 0] - s1 * U[1, 1, a, 0])
        d2[a] = (s0 * U[0, 0, a, 1] + s1 * U[1, 0, a, 1]
                 - s0 * U[0, 1, a, 1] - s1 * U[1, 1, a, 1])
    return ea, d1, d2


_row_coefficients_nb = _njit(cache=True)(_row_coefficients)


# --------------------------------------------------------------------------
# symmetric grid search

@_njit(cache=True)
def _grid_topk_numba(U, resolution, limit):
    n = resolution + 1
    best_r = np.full(limit, np.inf)
    best_i = np.full(limit, -1, dtype=np.int64)
    worst = np.inf
    inv = 1.0 / resolution
    buf = np.empty(n)
    for pi in range(n):
        p = pi * inv
        ea, d1, d2 = _row_coefficients_nb(U, p)
        top = max(ea[0], max(ea[1], ea[2]))
        for i in range(n):
            qb = i * inv
            m = n - i
            # branch-free pass first so the loop vectorizes
            for j in range(m):
                qh = j * inv
                qn = (resolution - i - j) * inv
                ra = top - (qb * ea[0] + qh * ea[1] + qn * ea[2])
                d = qb * d1[0] + qh * d1[1] + qn * d1[2]
                ro = max((1.0 - p) * d, -p * d)
                d = qb * d2[0] + qh * d2[1] + qn * d2[2]
                ro = max(ro, max((1.0 - p) * d, -p * d))
                buf[j] = max(ra, ro)
            for j in range(m):
                r = buf[j]
                if r < worst:
                    idx = (pi * n + i) * n + j
                    # ties keep scan order, which is index order
                    k = limit - 1
                    while k > 0 and best_r[k - 1] > r:
                        best_r[k] = best_r[k - 1]
                        best_i[k] = best_i[k - 1]
                        k -= 1
                    best_r[k] = r
                    best_i[k] = idx
                    worst = best_r[limit - 1]
    return best_r, best_i


def _grid_topk_numpy(U, resolution, limit):
    n = resolution + 1
    inv = 1.0 / resolution
    i_idx = np.repeat(np.arange(n), n - np.arange(n))
    j_idx = np.concatenate([np.arange(n - i) for i in range(n)])
    qb = i_idx * inv
    qh = j_idx * inv
    qn = (resolution - i_idx - j_idx) * inv
    cand_r = []
    cand_i = []
    for pi in range(n):
        p = pi * inv
        ea, d1, d2 = _row_coefficients(U, p)
        top = max(ea[0], max(ea[1], ea[2]))
        ra = top - (qb * ea[0] + qh * ea[1] + qn * ea[2])
        d = qb * d1[0] + qh * d1[1] + qn * d1[2]
        ro = np.maximum((1.0 - p) * d, -p * d)
        d = qb * d2[0] + qh * d2[1] + qn * d2[2]
        ro = np.maximum(ro, np.maximum((1.0 - p) * d, -p * d))
        r = np.maximum(ra, ro)
        m = min(limit, r.size)
        part = np.argpartition(r, m - 1)[:m] if m < r.size else np.arange(r.size)
        cand_r.append(r[part])
        cand_i.append((pi * n + i_idx[part]) * n + j_idx[part])
    r = np.concatenate(cand_r)
    idx = np.concatenate(cand_i).astype(np.int64)
    order = np.lexsort((idx, r))[:limit]
    best_r = np.full(limit, np.inf)
    best_i = np.full(limit, -1, dtype=np.int64)
    best_r[:order.size] = r[order]
    best_i[:order.size] = idx[order]
    return best_r, best_i


def grid_topk(U, resolution, limit, use_numba=None):
    """Lowest-regret symmetric profiles on the grid.

    Returns ``(regrets, flat_indices)`` sorted by regret then index, where the
    flat index encodes ``(p_index, qB_index, qH_index)`` in base
    ``resolution + 1``.
    """
    U = np.ascontiguousarray(U, dtype=np.float64)
    if use_numba is None:
        use_numba = HAS_NUMBA
    if use_numba:
        return _grid_topk_numba(U, int(resolution), int(limit))
    return _grid_topk_numpy(U, int(resolution), int(limit))


def decode_index(flat, resolution):
    n = resolution + 1
    pi, rest = divmod(int(flat), n * n)
    i, j = divmod(rest, n)
    inv = 1.0 / resolution
    return pi * inv, i * inv, j * inv, (resolution - i - j) * inv


# --------------------------------------------------------------------------
# batched regret of arbitrary (possibly asymmetric) profiles

def _profile_regrets(U, p1, p2, q):
    n = p1.shape[0]
    out = np.empty(n)
    for t in range(n):
        s1 = np.array([p1[t], 1.0 - p1[t]])
        s2 = np.array([p2[t], 1.0 - p2[t]])
        e1 = np.zeros(2)
        e2 = np.zeros(2)
        ea = np.zeros(3)
        for x in range(2):
            for y in range(2):
                for a in range(3):
                    e1[x] += s2[y] * q[t, a] * U[x, y, a, 0]
                    e2[y] += s1[x] * q[t, a] * U[x, y, a, 1]
                    ea[a] += s1[x] * s2[y] * U[x, y, a, 2]
        r1 = max(e1[0], e1[1]) - (s1[0] * e1[0] + s1[1] * e1[1])
        r2 = max(e2[0], e2[1]) - (s2[0] * e2[0] + s2[1] * e2[1])
        ra = max(ea[0], max(ea[1], ea[2])) - (
            q[t, 0] * ea[0] + q[t, 1] * ea[1] + q[t, 2] * ea[2])
        out[t] = max(r1, max(r2, ra))
    return out


_profile_regrets_nb = _njit(cache=True)(_profile_regrets)


def _profile_regrets_numpy(U, p1, p2, q):
    s1 = np.stack([p1, 1.0 - p1], axis=1)
    s2 = np.stack([p2, 1.0 - p2], axis=1)
    e1 = np.einsum("xya,ty,ta->tx", U[..., 0], s2, q)
    e2 = np.einsum("xya,tx,ta->ty", U[..., 1], s1, q)
    ea = np.einsum("xya,tx,ty->ta", U[..., 2], s1, s2)
    r1 = e1.max(axis=1) - (s1 * e1).sum(axis=1)
    r2 = e2.max(axis=1) - (s2 * e2).sum(axis=1)
    ra = ea.max(axis=1) - (q * ea).sum(axis=1)
    return np.maximum(np.maximum(r1, r2), ra)


def profile_regrets(U, p1, p2, q, use_numba=None):
    """Regret (max unilateral pure-deviation gain) of each profile in a batch."""
    U = np.ascontiguousarray(U, dtype=np.float64)
    p1 = np.ascontiguousarray(p1, dtype=np.float64)
    p2 = np.ascontiguousarray(p2, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64).reshape(-1, 3)
    if use_numba is None:
        use_numba = HAS_NUMBA
    if use_numba:
        return _profile_regrets_nb(U, p1, p2, q)
    return _profile_regrets_numpy(U, p1, p2, q)
