import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import lp_inner_max
from greedy_mbrl.empirical import EmpiricalModel
from greedy_mbrl.environments import ChainSpec, RandomMdpSpec, make_chain, make_random_mdp
from greedy_mbrl.greedy import (
    BonusParams,
    GreedyAgent,
    euler_lower_q,
    euler_upper_q,
    eulergp_q,
    l1_inner_max,
    ucrl2gp_q,
    value_update_bound_terms,
)
from greedy_mbrl.harness import child_rng
from greedy_mbrl.mdp import Step, evaluate_policy, value_iteration


def test_l1_zero_radius():
    p, V = np.array([0.2, 0.3, 0.5]), np.array([1.0, 3.0, 2.0])
    value, dist = l1_inner_max(p, 0.0, V)
    assert value == (p * V).sum()
    np.testing.assert_array_equal(dist, p)


def test_l1_full_radius():
    p, V = np.array([0.2, 0.3, 0.5]), np.array([1.0, 3.0, 2.0])
    value, dist = l1_inner_max(p, 2.5, V)
    assert value == pytest.approx(3.0, abs=1e-12)
    np.testing.assert_array_equal(dist, [0, 1, 0])


def test_l1_two_state_example_against_grid():
    p, V, eps = np.array([0.5, 0.5]), np.array([1.0, 0.0]), 0.4
    grid = np.linspace(0, 1, 10001)
    feasible = np.abs(grid - 0.5) + np.abs(1 - grid - 0.5) <= eps + 1e-12
    grid_best = (grid * 1.0)[feasible].max()
    value, dist = l1_inner_max(p, eps, V)
    assert grid_best == pytest.approx(0.7, abs=1e-4)
    assert value == pytest.approx(grid_best, abs=1e-4)
    assert value == pytest.approx(lp_inner_max(p, eps, V), abs=1e-9)
    np.testing.assert_allclose(dist, [0.7, 0.3])


def test_l1_unvisited_row_is_whole_simplex():
    value, dist = l1_inner_max(np.zeros(3), 0.1, np.array([0.0, 2.0, 1.0]))
    assert float(value) == 2.0
    assert dist.tolist() == [0, 1, 0]


@st.composite
def instances(draw):
    S = draw(st.integers(1, 5))
    raw = draw(st.lists(st.floats(0, 1), min_size=S, max_size=S))
    p = np.array(raw)
    p = p / p.sum() if p.sum() > 0 else np.eye(S)[0]
    V = np.array(draw(st.lists(st.floats(-5, 5), min_size=S, max_size=S)))
    eps = draw(st.floats(0, 2.5))
    return p, eps, V


@given(instances())
@settings(max_examples=200, deadline=None)
def test_l1_result_is_feasible_and_optimal(inst):
    p, eps, V = inst
    value, dist = l1_inner_max(p, eps, V)
    assert np.all(dist >= -1e-12)
    assert dist.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(dist - p).sum() <= eps + 1e-9
    assert value == pytest.approx((dist * V).sum(), abs=1e-9)
    assert value >= (p * V).sum() - 1e-12
    assert value == pytest.approx(lp_inner_max(p, eps, V), abs=1e-6)


def test_l1_batched_rows_agree_with_single_rows():
    rng = np.random.default_rng(0)
    p = rng.dirichlet(np.ones(6), size=(4, 3))
    eps = rng.random((4, 3))
    V = rng.random((5, 1, 1, 6))
    table = l1_inner_max(p, eps, V, return_dist=False)
    for h in range(5):
        for s in range(4):
            row = l1_inner_max(p[s], eps[s], V[h, 0, 0], return_dist=False)
            assert np.array_equal(row, table[h, s])


# --- hand-built snapshot -----------------------------------------------------

S, A, H, T, DELTA = 3, 2, 4, 100, 0.1
SNAPSHOT_STEPS = [
    (0, 0, 0.0, 1), (0, 0, 1.0, 1), (0, 0, 1.0, 2),
    (0, 1, 0.5, 0),
    (1, 0, 0.2, 2), (1, 0, 0.4, 2),
    (2, 1, 1.0, 0), (2, 1, 0.0, 1), (2, 1, 1.0, 1), (2, 1, 1.0, 2),
]


@pytest.fixture
def snapshot():
    return EmpiricalModel(S, A).batch_update([Step(0, *t) for t in SNAPSHOT_STEPS])


def _raw_counts():
    n = np.zeros((S, A))
    cnt = np.zeros((S, A, S))
    rsum = np.zeros((S, A))
    rsq = np.zeros((S, A))
    for s, a, r, s2 in SNAPSHOT_STEPS:
        n[s, a] += 1
        cnt[s, a, s2] += 1
        rsum[s, a] += r
        rsq[s, a] += r * r
    return n, cnt, rsum, rsq


def test_ucrl2gp_row_matches_transcription(snapshot):
    params = BonusParams(S, A, H, T, DELTA, "ucrl2")
    V_next = np.array([2.0, 0.5, 1.25])
    n, cnt, rsum, _ = _raw_counts()
    for s in range(S):
        expected = []
        for a in range(A):
            nn = max(n[s, a], 1)
            r_tilde = rsum[s, a] / nn + math.sqrt(2 * math.log(8 * S * A * T / DELTA) / nn)
            eps = math.sqrt(4 * S * math.log(12 * S * A * T / DELTA) / nn)
            expected.append(r_tilde + lp_inner_max(cnt[s, a] / nn, eps, V_next))
        np.testing.assert_allclose(ucrl2gp_q(s, snapshot, V_next, params), expected, atol=1e-8)


def test_eulergp_matches_transcription(snapshot):
    params = BonusParams(S, A, H, T, DELTA, "euler")
    V_up = np.array([3.0, 1.5, 2.0])
    V_low = np.array([0.5, 0.0, 1.0])
    n, cnt, rsum, rsq = _raw_counts()
    lg = math.log(4 * S * A * T / (DELTA / 9))
    J = 2 * H * lg / 3
    B_v = math.sqrt(2 * lg)
    B_p = H * math.sqrt(2 * lg)

    def phi(p, V, nn):
        mean = sum(p[i] * V[i] for i in range(S))
        var = sum(p[i] * (V[i] - mean) ** 2 for i in range(S))
        return math.sqrt(2 * var * lg / nn) + 2 * H * lg / (3 * nn)

    for s in range(S):
        q_up = []
        parts = []
        for a in range(A):
            nn = max(n[s, a], 1)
            p = cnt[s, a] / nn
            r_hat = rsum[s, a] / nn
            var_r = max(rsq[s, a] / nn - r_hat**2, 0)
            b_r = math.sqrt(2 * var_r * lg / nn) + 14 * lg / (3 * nn)
            norm = math.sqrt(sum(p[i] * (V_up[i] - V_low[i]) ** 2 for i in range(S)))
            tail = (4 * J + B_p) / nn + B_v * norm / math.sqrt(nn)
            up = r_hat + b_r + sum(p * V_up) + phi(p, V_up, nn) + tail
            low = r_hat - b_r + sum(p * V_low) - (phi(p, V_low, nn) + tail)
            q_up.append(up)
            parts.append(low)
        row, q_low = eulergp_q(s, snapshot, V_up, V_low, params)
        np.testing.assert_allclose(row, q_up, rtol=1e-12)
        assert q_low == pytest.approx(parts[int(np.argmax(q_up))], rel=1e-12)


def test_ucrl2_unvisited_ceiling():
    params = BonusParams.ucrl2(4, 2, 5, 10, 0.05)
    model = EmpiricalModel(4, 2)
    for h in range(5):
        V_next = np.full(4, 5.0 - (h + 1))
        expected = math.sqrt(2 * math.log(8 * 4 * 2 * 50 / 0.05)) + (5 - (h + 1))
        np.testing.assert_allclose(ucrl2gp_q(0, model, V_next, params), expected, rtol=1e-13)


def _exact_model(mdp, n):
    """Snapshot whose counts reproduce the chain kernel exactly (N divides n)."""
    S, A, _ = mdp.shape
    model = EmpiricalModel(S, A)
    model.visit_count[:] = n
    model.transition_count[:] = np.rint(mdp.transitions * n).astype(np.int64)
    model.reward_sum[:] = mdp.mean_rewards * n
    model.reward_sq_sum[:] = mdp.mean_rewards**2 * n
    assert np.array_equal(model.p_hat, mdp.transitions)
    return model


@pytest.mark.parametrize("variant", ["ucrl2", "euler"])
def test_bonus_vanishes_with_data(variant):
    mdp = make_chain(ChainSpec(4, "deterministic"))
    params = BonusParams(4, 2, 4, 1000, 0.1, variant)
    V = np.array([0.3, 1.0, 2.0, 0.0])
    target = mdp.mean_rewards[2] + mdp.transitions[2] @ V
    gaps = []
    for n in (4 * 10**2, 4 * 10**5, 4 * 10**8, 4 * 10**11):
        model = _exact_model(mdp, n)
        q = ucrl2gp_q(2, model, V, params) if variant == "ucrl2" else eulergp_q(2, model, V, V, params)[0]
        gaps.append(np.abs(q - target).max())
    assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_euler_constant_values_degenerate_case(snapshot):
    params = BonusParams(S, A, H, T, DELTA, "euler")
    c = np.full(S, 1.75)
    q = euler_upper_q(snapshot, 0, c, c, params)
    n1 = snapshot.n_or_one[0]
    lg = params.log
    b_r = np.sqrt(2 * snapshot.reward_var[0] * lg / n1) + 14 * lg / (3 * n1)
    b_pv = (4 * params.J + params.B_p) / n1 + 2 * H * lg / (3 * n1)
    np.testing.assert_allclose(q, snapshot.r_hat[0] + b_r + snapshot.p_hat[0] @ c + b_pv, rtol=1e-13)


def test_euler_unvisited_is_optimistic():
    params = BonusParams.euler(3, 2, 4, 10, 0.1)
    model = EmpiricalModel(3, 2)
    V = np.array([1.0, 2.0, 3.0])
    q = euler_upper_q(model, 1, V, np.zeros(3), params)
    assert np.all(q >= model.p_hat[1] @ V)
    assert np.all(euler_lower_q(model, 1, np.arange(2), V, np.zeros(3), params) <= 0)


def test_params_derived_constants():
    p = BonusParams.euler(5, 2, 4, 100, 0.09)
    assert p.delta_prime == pytest.approx(0.01)
    assert p.log == pytest.approx(math.log(4 * 5 * 2 * 400 / 0.01))
    assert p.L == pytest.approx(2 * math.sqrt(p.log))
    assert p.B_p == pytest.approx(4 * p.B_v)
    u = BonusParams.ucrl2(5, 2, 4, 100, 0.08)
    assert u.delta_prime == pytest.approx(0.02)
    assert u.reward_log == pytest.approx(math.log(8 * 4000 / 0.08))
    assert u.transition_log == pytest.approx(math.log(12 * 4000 / 0.08))
    with pytest.raises(ValueError):
        BonusParams.ucrl2(5, 2, 4, 100, 1.5)


# --- agent-level properties ---------------------------------------------------

def _episodes(mdp, variant, episodes, seed=0):
    params = BonusParams(*mdp.shape, episodes * mdp.horizon, 0.05, variant)
    agent = GreedyAgent.for_mdp(mdp, params)
    rng = child_rng(seed, "env")
    return agent, [agent.run_episode(mdp, rng) for _ in range(episodes)]


@pytest.mark.parametrize("variant", ["ucrl2", "euler"])
@pytest.mark.parametrize("mdp", [
    make_chain(ChainSpec(5, "bernoulli")),
    make_random_mdp(RandomMdpSpec(5, 3, 4, 3, seed=3, reward_kind="bernoulli")),
])
def test_greedy_agent_invariants(variant, mdp):
    V_star = value_iteration(mdp)
    S, A, H = mdp.shape
    _, results = _episodes(mdp, variant, 150)
    for res in results:
        assert res.backup_ops == A * H
        assert np.all(res.upper <= res.upper_prev)
        assert np.all(res.upper >= V_star - 1e-9)
        assert np.all((res.upper >= 0) & (res.upper <= H))
        assert np.count_nonzero(res.upper != res.upper_prev) <= H
        for step in res.trajectory:
            assert step.action == res.policy[step.t, step.state]
        if variant == "euler":
            assert np.all(res.lower >= res.lower_prev)
            assert np.all(res.lower <= V_star + 1e-9)


@pytest.mark.parametrize("variant", ["ucrl2", "euler"])
def test_value_update_bound(variant):
    mdp = make_random_mdp(RandomMdpSpec(4, 2, 4, 3, seed=6, reward_kind="bernoulli"))
    _, results = _episodes(mdp, variant, 100)
    for res in results:
        lhs = res.upper_prev[0, 0] - evaluate_policy(mdp, res.policy)[0, 0]
        update, model_error = value_update_bound_terms(mdp, res)
        assert update + model_error - lhs >= -1e-9


def test_model_is_committed_only_at_episode_end():
    mdp = make_chain(ChainSpec(4, "bernoulli"))
    agent, results = _episodes(mdp, "ucrl2", 3)
    assert agent.model.visit_count.sum() == 3 * 4
