import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from greedy_mbrl.environments import RandomMdpSpec, make_random_mdp
from greedy_mbrl.mdp import RewardDistribution, TabularMdp


def single_state_mdp(rewards=(1.0,), horizon=3):
    P = np.ones((1, len(rewards), 1))
    return TabularMdp(P, [[RewardDistribution.deterministic(r) for r in rewards]], horizon)


def brute_force_optimal_value(mdp, start=None):
    """Max of V^pi_1(start) over every deterministic policy on the cells reachable from start.

    Pure-python forward evaluation; independent of the library's DP code.
    """
    S, A, H = mdp.shape
    start = mdp.start_state if start is None else start
    P = mdp.transitions.tolist()
    r = mdp.mean_rewards.tolist()
    reachable = [{start}]
    for _ in range(H - 1):
        nxt = set()
        for s in reachable[-1]:
            for a in range(A):
                nxt |= {s2 for s2 in range(S) if P[s][a][s2] > 0}
        reachable.append(nxt)
    cells = [(h, s) for h in range(H) for s in sorted(reachable[h])]
    best = -np.inf
    for choice in itertools.product(range(A), repeat=len(cells)):
        pi = dict(zip(cells, choice))
        dist = {start: 1.0}
        total = 0.0
        for h in range(H):
            new = {}
            for s, w in dist.items():
                a = pi[(h, s)]
                total += w * r[s][a]
                for s2 in range(S):
                    if P[s][a][s2] > 0:
                        new[s2] = new.get(s2, 0.0) + w * P[s][a][s2]
            dist = new
        best = max(best, total)
    return best


def expectimax(mdp, h, s):
    """Exhaustive search over action histories (no memoisation)."""
    S, A, H = mdp.shape
    if h == H:
        return 0.0
    best = -np.inf
    for a in range(A):
        value = mdp.mean_rewards[s, a]
        for s2 in range(S):
            p = mdp.transitions[s, a, s2]
            if p > 0:
                value += p * expectimax(mdp, h + 1, s2)
        best = max(best, value)
    return best


def lp_inner_max(p, eps, V):
    """max P'^T V s.t. P' in the simplex, ||P' - p||_1 <= eps (variables P', u)."""
    S = len(p)
    if p.sum() == 0:
        return float(V.max())
    c = np.concatenate([-V, np.zeros(S)])
    eye = np.eye(S)
    A_ub = np.block([[eye, -eye], [-eye, -eye], [np.zeros((1, S)), np.ones((1, S))]])
    b_ub = np.concatenate([p, -p, [eps]])
    A_eq = np.concatenate([np.ones(S), np.zeros(S)])[None]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=[(0, None)] * (2 * S),
                  method="highs")
    assert res.success
    return -res.fun


@pytest.fixture
def random_mdp():
    return make_random_mdp(RandomMdpSpec(S=4, A=3, H=3, branching=3, seed=11, reward_kind="bernoulli"))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
