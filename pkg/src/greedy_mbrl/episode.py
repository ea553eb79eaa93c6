"""Per-episode output shared by all agents."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import Step


def optimistic_init(num_states: int, horizon: int) -> np.ndarray:
    """Upper values ``H - (t - 1)`` at every state, zero terminal row."""
    remaining = np.arange(horizon, -1, -1, dtype=float)
    return np.repeat(remaining[:, None], num_states, axis=1)


@dataclass
class EpisodeResult:
    """What an agent did in one episode.

    ``policy`` is the episode's policy materialised at every ``(h, s)`` from
    the data frozen at the end of the previous episode. ``q_upper`` holds the
    optimistic Q-values that policy is greedy with respect to.
    """

    policy: np.ndarray
    trajectory: list[Step]
    backup_ops: int
    upper_prev: np.ndarray
    upper: np.ndarray
    q_upper: np.ndarray
    lower_prev: np.ndarray | None = None
    lower: np.ndarray | None = None

    @property
    def update_total(self) -> float:
        return float((self.upper_prev - self.upper).sum())
