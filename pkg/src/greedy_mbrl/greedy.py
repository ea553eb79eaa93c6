"""Model-based RL with greedy (1-step planning) policies.

Two optimistic Q backends share one scaffold: UCRL2-style bonuses with an L1
confidence set over next-state distributions, and EULER-style empirical
Bernstein bonuses that also track a lower value bound.

All Q helpers take next-step values already shaped to broadcast against the
empirical rows they are applied to, so the same code serves one state
(``V`` of shape ``(S,)``) and a whole table (``V`` of shape ``(H, 1, 1, S)``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .empirical import EmpiricalModel
from .episode import EpisodeResult, optimistic_init
from .mdp import TabularMdp, occupancy, sample_episode

UCRL2 = "ucrl2"
EULER = "euler"


@dataclass(frozen=True)
class BonusParams:
    """Confidence constants, fixed for a run of ``T = episodes * H`` samples."""

    S: int
    A: int
    H: int
    T: int
    delta: float
    variant: str
    scale: float = 1.0  # 0 switches every bonus off (test hook)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.variant not in (UCRL2, EULER):
            raise ValueError(f"unknown bonus variant {self.variant!r}")
        if min(self.S, self.A, self.H, self.T) < 1:
            raise ValueError("S, A, H and T must be positive")

    @classmethod
    def ucrl2(cls, S, A, H, episodes, delta, scale=1.0):
        return cls(S, A, H, episodes * H, delta, UCRL2, scale)

    @classmethod
    def euler(cls, S, A, H, episodes, delta, scale=1.0):
        return cls(S, A, H, episodes * H, delta, EULER, scale)

    @property
    def delta_prime(self) -> float:
        return self.delta / 4 if self.variant == UCRL2 else self.delta / 9

    @property
    def sat(self) -> float:
        return float(self.S * self.A * self.T)

    # UCRL2: ln(2SAT/d') = ln(8SAT/d) and ln(3SAT/d') = ln(12SAT/d)
    @property
    def reward_log(self) -> float:
        return np.log(2 * self.sat / self.delta_prime)

    @property
    def transition_log(self) -> float:
        return np.log(3 * self.sat / self.delta_prime)

    # EULER constants
    @property
    def log(self) -> float:
        return np.log(4 * self.sat / self.delta_prime)

    @property
    def L(self) -> float:
        return 2 * np.sqrt(self.log)

    @property
    def J(self) -> float:
        return 2 * self.H * self.log / 3

    @property
    def B_v(self) -> float:
        return np.sqrt(2 * self.log)

    @property
    def B_p(self) -> float:
        return self.H * np.sqrt(2 * self.log)


def l1_inner_max(p_hat, eps, V, return_dist: bool = True):
    """Maximise ``P^T V`` over distributions within L1 distance ``eps`` of ``p_hat``.

    Moves ``min(eps/2, 1 - p_hat[s*])`` mass onto ``s* = argmax V`` and takes it
    from the other states in ascending order of ``V``. An all-zero ``p_hat``
    (unvisited pair) is treated as the whole simplex. Works on stacks of rows:
    ``p_hat`` has shape ``(..., S)``, ``eps`` broadcasts against ``p_hat[..., 0]``
    and ``V`` against ``p_hat``.

    Returns ``value`` (and the maximising distribution if ``return_dist``).
    """
    p = np.asarray(p_hat, dtype=float)
    V = np.asarray(V, dtype=float)
    shape = np.broadcast_shapes(p.shape, V.shape)
    p = np.broadcast_to(p, shape)
    Vb = np.broadcast_to(V, shape)
    best = np.argmax(Vb, axis=-1)[..., None]
    order = np.argsort(Vb, axis=-1, kind="stable")
    v_best = np.take_along_axis(Vb, best, axis=-1)[..., 0]
    p_best = np.take_along_axis(p, best, axis=-1)[..., 0]
    empty = p.sum(axis=-1) == 0
    add = np.minimum(np.asarray(eps, dtype=float) / 2, 1.0 - p_best)
    p_sorted = np.where(order == best, 0.0, np.take_along_axis(p, order, axis=-1))
    v_sorted = np.take_along_axis(Vb, order, axis=-1)
    before = np.cumsum(p_sorted, axis=-1) - p_sorted
    removed = np.clip(add[..., None] - before, 0.0, p_sorted)
    moved = removed.sum(axis=-1)
    value = (p * Vb).sum(axis=-1) - (removed * v_sorted).sum(axis=-1) + moved * v_best
    value = np.where(empty, v_best, value)
    if not return_dist:
        return value
    dist = p.copy()
    shift = np.zeros(shape)
    np.put_along_axis(shift, order, removed, axis=-1)
    dist -= shift
    np.put_along_axis(dist, best, (p_best + moved)[..., None], axis=-1)
    point = np.zeros(shape)
    np.put_along_axis(point, best, 1.0, axis=-1)
    dist = np.where(empty[..., None], point, dist)
    return value, dist


def ucrl2_q(model: EmpiricalModel, states, V_next: np.ndarray, params: BonusParams) -> np.ndarray:
    """Optimistic Q-values ``r_tilde + max_{P in CI} P^T V_next`` for ``states``, shape ``(..., A)``."""
    n1 = model.n_or_one[states]
    r_tilde = model.r_hat[states] + params.scale * np.sqrt(2 * params.reward_log / n1)
    eps = params.scale * np.sqrt(4 * params.S * params.transition_log / n1)
    return r_tilde + l1_inner_max(model.p_hat[states], eps, V_next, return_dist=False)


def ucrl2gp_q(s: int, model: EmpiricalModel, V_next: np.ndarray, params: BonusParams) -> np.ndarray:
    return ucrl2_q(model, s, V_next, params)


def _euler_common(model, states, V_up, V_low, params):
    n1 = model.n_or_one[states]
    lg = params.log
    b_r = np.sqrt(2 * model.reward_var[states] * lg / n1) + 14 * lg / (3 * n1)
    p = model.p_hat[states]
    gap = np.sqrt((p * (V_up - V_low) ** 2).sum(axis=-1))
    shared = (4 * params.J + params.B_p) / n1 + params.B_v * gap / np.sqrt(n1)
    return n1, p, b_r, shared


def _phi(p, V, n1, params):
    """Bernstein width of ``p^T V``; returns ``(p^T V, phi)``."""
    mean = (p * V).sum(axis=-1)
    var = (p * (V - mean[..., None]) ** 2).sum(axis=-1)
    lg = params.log
    return mean, np.sqrt(2 * var * lg / n1) + 2 * params.H * lg / (3 * n1)


def euler_upper_q(model, states, V_up, V_low, params: BonusParams) -> np.ndarray:
    """``r_hat + b_r + p_hat^T V_up + b_pv(V_up)`` for every action at ``states``."""
    n1, p, b_r, shared = _euler_common(model, states, V_up, V_low, params)
    pv, phi = _phi(p, V_up, n1, params)
    return model.r_hat[states] + pv + params.scale * (b_r + phi + shared)


def euler_lower_q(model, states, actions, V_up, V_low, params: BonusParams) -> np.ndarray:
    """``r_hat - b_r + p_hat^T V_low - b_pv(V_low)`` at the chosen ``actions`` only."""
    n1, p, b_r, shared = _euler_common(model, (states, actions), V_up, V_low, params)
    pv, phi = _phi(p, V_low, n1, params)
    return model.r_hat[states, actions] + pv - params.scale * (b_r + phi + shared)


def eulergp_q(s: int, model, V_up_next, V_low_next, params: BonusParams):
    """Upper Q row at ``s`` and the lower Q of the greedy action."""
    q_up = euler_upper_q(model, s, V_up_next, V_low_next, params)
    a = int(np.argmax(q_up))
    return q_up, float(euler_lower_q(model, s, a, V_up_next, V_low_next, params))


class GreedyAgent:
    """Optimistic model-based agent that plans one step ahead from the visited state.

    Upper values are only ever lowered (``min`` with the previous episode), lower
    values (EULER backend) only ever raised; the empirical model is committed
    at the end of each episode.
    """

    def __init__(self, num_states: int, num_actions: int, horizon: int, params: BonusParams):
        self.params = params
        self.shape = (num_states, num_actions, horizon)
        self.upper = optimistic_init(num_states, horizon)
        self.lower = np.zeros((horizon + 1, num_states)) if params.variant == EULER else None
        self.model = EmpiricalModel(num_states, num_actions)
        self.op_counter = 0

    @classmethod
    def for_mdp(cls, mdp: TabularMdp, params: BonusParams) -> "GreedyAgent":
        return cls(*mdp.shape, params)

    def q_upper(self, s, h) -> np.ndarray:
        """Optimistic Q-values at ``(h, s)`` from the frozen snapshot."""
        if self.params.variant == UCRL2:
            return ucrl2_q(self.model, s, self.upper[h + 1], self.params)
        return euler_upper_q(self.model, s, self.upper[h + 1], self.lower[h + 1], self.params)

    def q_table(self) -> np.ndarray:
        """Optimistic Q-values at every ``(h, s, a)``, shape ``(H, S, A)``."""
        V_up = self.upper[1:, None, None, :]
        if self.params.variant == UCRL2:
            return ucrl2_q(self.model, slice(None), V_up, self.params)
        V_low = self.lower[1:, None, None, :]
        return euler_upper_q(self.model, slice(None), V_up, V_low, self.params)

    def run_episode(self, mdp: TabularMdp, rng: np.random.Generator) -> EpisodeResult:
        A = self.shape[1]
        upper_prev, lower_prev = self.upper, self.lower
        upper = upper_prev.copy()
        lower = None if lower_prev is None else lower_prev.copy()
        ops = 0

        def act(h, s):
            nonlocal ops
            q = self.q_upper(s, h)
            ops += A
            a = int(np.argmax(q))
            upper[h, s] = min(upper_prev[h, s], q[a])
            if lower is not None:
                q_low = euler_lower_q(
                    self.model, s, a, upper_prev[h + 1], lower_prev[h + 1], self.params
                )
                lower[h, s] = max(lower_prev[h, s], q_low)
            return a

        trajectory = sample_episode(mdp, act, rng)
        q_table = self.q_table()
        self.model = self.model.batch_update(trajectory)
        self.upper, self.lower = upper, lower
        self.op_counter += ops
        return EpisodeResult(
            policy=np.argmax(q_table, axis=-1),
            trajectory=trajectory,
            backup_ops=ops,
            upper_prev=upper_prev,
            upper=upper,
            q_upper=q_table,
            lower_prev=lower_prev,
            lower=lower,
        )


def greedy_episode(agent: GreedyAgent, mdp: TabularMdp, rng: np.random.Generator) -> EpisodeResult:
    return agent.run_episode(mdp, rng)


def value_update_bound_terms(mdp: TabularMdp, result: EpisodeResult) -> tuple[float, float]:
    """The two expectations bounding ``V_upper^{k-1}_1(s_1) - V^{pi_k}_1(s_1)``.

    Returns ``(expected value update, expected optimistic-model error)``, both
    weighted by the occupancy of the episode's policy.
    """
    w = occupancy(mdp, result.policy)
    H = mdp.horizon
    frozen = result.upper_prev
    true_q = mdp.mean_rewards + (mdp.transitions * frozen[1:, None, None, :]).sum(axis=-1)
    q = result.q_upper
    update = frozen[:H, :, None] - np.minimum(frozen[:H, :, None], q)
    return float((w * update).sum()), float((w * (q - true_q)).sum())
