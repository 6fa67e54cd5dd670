"""Reference computations written independently of the package.

Payoffs are rebuilt from first principles, probabilities are kept as exact
fractions where the inputs allow it, and expectations are summed in a
different order from the package.
"""

import math
from fractions import Fraction

LEVEL_ACTIONS = ("B", "H", "N")


def cost(k, v_size, base=10.0):
    return 2 * k * math.log10(v_size) / math.log10(base)


def success(action, k1, k2, pB, pHs, pHd):
    if action == "B":
        return pB
    if action == "H":
        return pHs if k1 == k2 else pHd
    return 0


def joint_breach(action, k1, k2, alpha, pB, pHs, pHd):
    p = success(action, k1, k2, pB, pHs, pHd)
    b1 = p / (alpha * k1 + 1)
    b2 = p / (alpha * k2 + 1)
    return 1 - (1 - b1) * (1 - b2)


def payoff_table(kL=3, kH=7, alpha=0.9, gamma=1.0, pB=0.5, pHs=0.6, pHd=0.2,
                 cB=7.0, cH=6.2, Ra=50.0, rL=45.0, rH=40.0, v_size=2.0, base=10.0):
    """Map (k1, k2, action) -> (u_org1, u_org2, u_attacker)."""
    reward = {kL: rL, kH: rH}
    acost = {"B": cB, "H": cH, "N": 0.0}
    out = {}
    for k1 in (kL, kH):
        for k2 in (kL, kH):
            for a in LEVEL_ACTIONS:
                bj = joint_breach(a, k1, k2, alpha, pB, pHs, pHd)
                u1 = reward[k1] * (1 - bj) - cost(k1, v_size, base) + gamma * k1
                u2 = reward[k2] * (1 - bj) - cost(k2, v_size, base) + gamma * k2
                ua = 0.0 if a == "N" else bj * Ra - acost[a]
                out[(k1, k2, a)] = (float(u1), float(u2), float(ua))
    return out


def table_for(params):
    return payoff_table(params.k_low, params.k_high, params.alpha, params.gamma,
                        params.p_background, params.p_homog_same, params.p_homog_diff,
                        params.cost_attack_background, params.cost_attack_homog,
                        params.attacker_reward, params.reward_low, params.reward_high,
                        params.v_size, params.log_base)


def regret(table, levels, p1, p2, q):
    """Largest unilateral pure-deviation gain, summed in reverse order."""
    kL, kH = levels
    s1 = {kL: p1, kH: 1 - p1}
    s2 = {kL: p2, kH: 1 - p2}
    qa = dict(zip(LEVEL_ACTIONS, q))
    e1 = {k: sum(s2[y] * qa[a] * table[(k, y, a)][0]
                 for a in reversed(LEVEL_ACTIONS) for y in (kH, kL)) for k in levels}
    e2 = {k: sum(s1[x] * qa[a] * table[(x, k, a)][1]
                 for a in reversed(LEVEL_ACTIONS) for x in (kH, kL)) for k in levels}
    ea = {a: sum(s1[x] * s2[y] * table[(x, y, a)][2]
                 for y in (kH, kL) for x in (kH, kL)) for a in LEVEL_ACTIONS}
    g1 = max(e1.values()) - sum(s1[k] * e1[k] for k in levels)
    g2 = max(e2.values()) - sum(s2[k] * e2[k] for k in levels)
    ga = max(ea.values()) - sum(qa[a] * ea[a] for a in LEVEL_ACTIONS)
    return max(g1, g2, ga, 0.0)


def expected(table, levels, p1, p2, q):
    kL, kH = levels
    s1 = {kL: p1, kH: 1 - p1}
    s2 = {kL: p2, kH: 1 - p2}
    qa = dict(zip(LEVEL_ACTIONS, q))
    u1 = ua = 0.0
    for a in LEVEL_ACTIONS:
        for x in levels:
            for y in levels:
                w = s1[x] * s2[y] * qa[a]
                u1 += w * table[(x, y, a)][0]
                ua += w * table[(x, y, a)][2]
    return u1, ua


def q_at_p0(table, levels):
    """Attacker B-weight making the organization indifferent when the partner plays k_H."""
    kL, kH = levels
    u = lambda x, a: table[(x, kH, a)][0]
    return (u(kH, "H") - u(kL, "H")) / (u(kL, "B") - u(kL, "H") - u(kH, "B") + u(kH, "H"))


def trust_path(gamma0, outcomes):
    g = Fraction(gamma0)
    out = []
    for blocked in outcomes:
        g = (g + 1) / 2 if blocked else g / 2
        out.append(g)
    return out


def cross_utility(ks, rewards, gamma, v_size, base=10.0):
    n = len(ks)
    return [[rewards[j] / ks[i] - cost(ks[j], v_size, base) + gamma * ks[j]
             for j in range(n)] for i in range(n)]
