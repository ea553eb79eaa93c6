"""Visit counts and plug-in estimates, folded in once per episode."""
from __future__ import annotations

from functools import cached_property
from typing import Iterable

import numpy as np

from .mdp import Step


class EmpiricalModel:
    """Sufficient statistics ``n(s,a)``, ``n(s,a,s')`` and reward moments.

    Instances are treated as immutable snapshots: :meth:`batch_update` returns a
    new model, so an agent can keep reading the frozen episode-``k-1`` snapshot
    while it gathers episode ``k``.
    """

    def __init__(self, num_states: int, num_actions: int):
        self.num_states = num_states
        self.num_actions = num_actions
        self.visit_count = np.zeros((num_states, num_actions), dtype=np.int64)
        self.transition_count = np.zeros((num_states, num_actions, num_states), dtype=np.int64)
        self.reward_sum = np.zeros((num_states, num_actions))
        self.reward_sq_sum = np.zeros((num_states, num_actions))

    def copy(self) -> "EmpiricalModel":
        other = EmpiricalModel(self.num_states, self.num_actions)
        other.visit_count = self.visit_count.copy()
        other.transition_count = self.transition_count.copy()
        other.reward_sum = self.reward_sum.copy()
        other.reward_sq_sum = self.reward_sq_sum.copy()
        return other

    def batch_update(self, trajectory: Iterable[Step]) -> "EmpiricalModel":
        """Return a new snapshot with every transition of ``trajectory`` folded in."""
        new = self.copy()
        S, A = self.num_states, self.num_actions
        for step in trajectory:
            s, a, r, s_next = step.state, step.action, step.reward, step.next_state
            if not (0 <= s < S and 0 <= a < A and 0 <= s_next < S):
                raise ValueError(f"transition {step} does not fit a model with S={S}, A={A}")
            new.visit_count[s, a] += 1
            new.transition_count[s, a, s_next] += 1
            new.reward_sum[s, a] += r
            new.reward_sq_sum[s, a] += r * r
        return new

    @cached_property
    def n_or_one(self) -> np.ndarray:
        """``n(s,a) v 1`` as floats; the single place the zero-count convention lives."""
        return np.maximum(self.visit_count, 1).astype(float)

    @cached_property
    def r_hat(self) -> np.ndarray:
        return self.reward_sum / self.n_or_one

    @cached_property
    def reward_var(self) -> np.ndarray:
        """Population variance of observed rewards, clamped at zero."""
        return np.maximum(self.reward_sq_sum / self.n_or_one - self.r_hat**2, 0.0)

    @cached_property
    def p_hat(self) -> np.ndarray:
        """Empirical kernel ``(S, A, S)``; all-zero rows for unvisited pairs."""
        return self.transition_count / self.n_or_one[..., None]

    def estimates(self, s: int, a: int) -> tuple[int, float, float, np.ndarray]:
        """``(n, r_hat, var_hat_R, p_hat row)`` for one state-action pair."""
        return (
            int(self.visit_count[s, a]),
            float(self.r_hat[s, a]),
            float(self.reward_var[s, a]),
            self.p_hat[s, a].copy(),
        )


def batch_update(model: EmpiricalModel, trajectory: Iterable[Step]) -> EmpiricalModel:
    return model.batch_update(trajectory)


def estimates(model: EmpiricalModel, s: int, a: int):
    return model.estimates(s, a)
