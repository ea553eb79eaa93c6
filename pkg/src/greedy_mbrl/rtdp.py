"""Real-time dynamic programming with the exact model."""
from __future__ import annotations

import numpy as np

from .episode import EpisodeResult, optimistic_init
from .mdp import TabularMdp, occupancy, optimal_backup, sample_episode


def _q_rows(mdp: TabularMdp, s, V_next: np.ndarray) -> np.ndarray:
    # shared by the per-step and the materialised path so both agree bitwise;
    # V_next broadcasts against transitions[s]
    return mdp.mean_rewards[s] + (mdp.transitions[s] * V_next).sum(axis=-1)


def rtdp_step(s: int, h: int, values: np.ndarray, mdp: TabularMdp) -> tuple[int, float]:
    """Greedy action at ``(h, s)`` from ``values[h + 1]`` and the backed-up value."""
    q = _q_rows(mdp, s, values[h + 1])
    a = int(np.argmax(q))
    return a, float(q[a])


class RtdpAgent:
    def __init__(self, mdp: TabularMdp):
        S, _, H = mdp.shape
        self.mdp = mdp
        self.upper = optimistic_init(S, H)
        self.episode = 0

    def run_episode(self, mdp: TabularMdp, rng: np.random.Generator) -> EpisodeResult:
        S, A, H = self.mdp.shape
        frozen = self.upper
        new = frozen.copy()
        ops = 0

        def act(h, s):
            nonlocal ops
            a, value = rtdp_step(s, h, frozen, self.mdp)
            new[h, s] = value
            ops += A
            return a

        trajectory = sample_episode(mdp, act, rng)
        q_table = _q_rows(self.mdp, slice(None), frozen[1:, None, None, :])
        self.upper = new
        self.episode += 1
        return EpisodeResult(
            policy=np.argmax(q_table, axis=-1),
            trajectory=trajectory,
            backup_ops=ops,
            upper_prev=frozen,
            upper=new,
            q_upper=q_table,
        )


def run_rtdp(mdp: TabularMdp, episodes: int, seed: int = 0):
    """Run RTDP for ``episodes`` episodes; returns a list of episode records."""
    from .harness import run_agent

    return run_agent(RtdpAgent(mdp), mdp, episodes, seed)


def expected_value_update(mdp: TabularMdp, result: EpisodeResult) -> float:
    """``sum_t E[V^{k-1}_t(s_t) - V^k_t(s_t) | F_{k-1}]`` via occupancy of the episode's policy.

    RTDP writes ``T* V^{k-1}_{t+1}(s)`` at the visited state, so the per-state
    update amount is known before the episode is played.
    """
    visit = occupancy(mdp, result.policy).sum(axis=-1)  # (H, S)
    H = mdp.horizon
    frozen = result.upper_prev
    update = np.array([frozen[h] - optimal_backup(frozen[h + 1], mdp) for h in range(H)])
    return float((visit * update).sum())


def rtdp_regret_bound(num_states: int, horizon: int, delta: float) -> float:
    """High-probability regret ceiling ``9 S H^2 ln(3 S H / delta)``."""
    return 9 * num_states * horizon**2 * np.log(3 * num_states * horizon / delta)
