"""Full-planning baselines: UCRL2 and EULER re-solve the optimistic model every episode."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .empirical import EmpiricalModel
from .episode import EpisodeResult, optimistic_init
from .greedy import EULER, UCRL2, BonusParams, euler_lower_q, euler_upper_q, ucrl2_q
from .mdp import TabularMdp, sample_episode


@dataclass
class PlanResult:
    upper: np.ndarray
    policy: np.ndarray
    backup_ops: int
    q_upper: np.ndarray
    lower: np.ndarray | None = None


def _trivial_ceiling(H: int) -> np.ndarray:
    return np.arange(H, 0, -1, dtype=float)[:, None]


def ucrl2_full_plan(
    model: EmpiricalModel,
    params: BonusParams,
    upper_prev: np.ndarray | None = None,
    clamp: bool = True,
) -> PlanResult:
    """Backward induction over the optimistic model (extended value iteration).

    Each layer uses the value just computed for the next step. With ``clamp``
    the new values are capped by ``upper_prev``; otherwise by ``H - t + 1``.
    """
    S, A, H = params.S, params.A, params.H
    if upper_prev is None:
        upper_prev = optimistic_init(S, H)
    cap = upper_prev[:H] if clamp else np.broadcast_to(_trivial_ceiling(H), (H, S))
    upper = np.zeros((H + 1, S))
    policy = np.zeros((H, S), dtype=np.int64)
    q_table = np.zeros((H, S, A))
    states = np.arange(S)
    for h in range(H - 1, -1, -1):
        q = ucrl2_q(model, slice(None), upper[h + 1], params)
        q_table[h] = q
        policy[h] = np.argmax(q, axis=-1)
        upper[h] = np.minimum(cap[h], q[states, policy[h]])
    return PlanResult(upper, policy, S * A * H, q_table)


def euler_full_plan(
    model: EmpiricalModel,
    params: BonusParams,
    upper_prev: np.ndarray | None = None,
    lower_prev: np.ndarray | None = None,
    clamp: bool = True,
) -> PlanResult:
    """EULER planning pass maintaining upper and lower values at every state."""
    S, A, H = params.S, params.A, params.H
    if upper_prev is None:
        upper_prev = optimistic_init(S, H)
    if lower_prev is None:
        lower_prev = np.zeros((H + 1, S))
    if clamp:
        cap, floor = upper_prev[:H], lower_prev[:H]
    else:
        cap, floor = np.broadcast_to(_trivial_ceiling(H), (H, S)), np.zeros((H, S))
    upper = np.zeros((H + 1, S))
    lower = np.zeros((H + 1, S))
    policy = np.zeros((H, S), dtype=np.int64)
    q_table = np.zeros((H, S, A))
    states = np.arange(S)
    for h in range(H - 1, -1, -1):
        q = euler_upper_q(model, slice(None), upper[h + 1], lower[h + 1], params)
        q_table[h] = q
        policy[h] = np.argmax(q, axis=-1)
        upper[h] = np.minimum(cap[h], q[states, policy[h]])
        q_low = euler_lower_q(model, states, policy[h], upper[h + 1], lower[h + 1], params)
        lower[h] = np.maximum(floor[h], q_low)
    return PlanResult(upper, policy, S * A * H, q_table, lower)


class FullPlanningAgent:
    """Plans over all states at the start of each episode, then follows that plan."""

    def __init__(self, num_states: int, num_actions: int, horizon: int, params: BonusParams,
                 clamp: bool = True):
        self.params = params
        self.clamp = clamp
        self.upper = optimistic_init(num_states, horizon)
        self.lower = np.zeros((horizon + 1, num_states)) if params.variant == EULER else None
        self.model = EmpiricalModel(num_states, num_actions)
        self.op_counter = 0

    @classmethod
    def for_mdp(cls, mdp: TabularMdp, params: BonusParams, clamp: bool = True):
        return cls(*mdp.shape, params, clamp=clamp)

    def plan(self) -> PlanResult:
        if self.params.variant == UCRL2:
            return ucrl2_full_plan(self.model, self.params, self.upper, self.clamp)
        return euler_full_plan(self.model, self.params, self.upper, self.lower, self.clamp)

    def run_episode(self, mdp: TabularMdp, rng: np.random.Generator) -> EpisodeResult:
        upper_prev, lower_prev = self.upper, self.lower
        plan = self.plan()
        trajectory = sample_episode(mdp, lambda h, s: plan.policy[h, s], rng)
        self.model = self.model.batch_update(trajectory)
        self.upper, self.lower = plan.upper, plan.lower
        self.op_counter += plan.backup_ops
        return EpisodeResult(
            policy=plan.policy,
            trajectory=trajectory,
            backup_ops=plan.backup_ops,
            upper_prev=upper_prev,
            upper=plan.upper,
            q_upper=plan.q_upper,
            lower_prev=lower_prev,
            lower=plan.lower,
        )
