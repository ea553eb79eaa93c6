"""Finite-horizon tabular MDPs and exact dynamic-programming oracles.

Time is 0-based internally: row ``h`` of a value table holds the values at
timestep ``t = h + 1``, and row ``H`` is the terminal row (identically zero).
Policies are ``(H, S)`` integer arrays and occupancy tables are ``(H, S, A)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

ROW_TOL = 1e-12

DETERMINISTIC = "deterministic"
BERNOULLI = "bernoulli"
GAUSSIAN = "gaussian"
REWARD_KINDS = (DETERMINISTIC, BERNOULLI, GAUSSIAN)


class InvalidMdpError(ValueError):
    """Raised when an MDP violates a structural invariant."""


@dataclass(frozen=True)
class RewardDistribution:
    kind: str
    mean: float
    std: float = 0.0

    def __post_init__(self):
        if self.kind not in REWARD_KINDS:
            raise InvalidMdpError(f"unknown reward kind {self.kind!r}")
        if self.std < 0:
            raise InvalidMdpError("reward std must be nonnegative")
        if self.kind == BERNOULLI and not 0.0 <= self.mean <= 1.0:
            raise InvalidMdpError(f"Bernoulli mean {self.mean} outside [0, 1]")
        if self.kind != GAUSSIAN and self.std != 0.0:
            raise InvalidMdpError(f"{self.kind} rewards carry no std")

    @classmethod
    def deterministic(cls, mean: float) -> "RewardDistribution":
        return cls(DETERMINISTIC, float(mean))

    @classmethod
    def bernoulli(cls, mean: float) -> "RewardDistribution":
        return cls(BERNOULLI, float(mean))

    @classmethod
    def gaussian(cls, mean: float, std: float = 1.0) -> "RewardDistribution":
        return cls(GAUSSIAN, float(mean), float(std))

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == DETERMINISTIC:
            return self.mean
        if self.kind == BERNOULLI:
            return float(rng.random() < self.mean)
        return float(rng.normal(self.mean, self.std))


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """Episodic MDP with a fixed start state.

    ``transitions`` is a dense ``(S, A, S)`` row-stochastic array; ``rewards``
    is an ``S x A`` nested tuple of :class:`RewardDistribution`.
    """

    transitions: np.ndarray
    rewards: tuple
    horizon: int
    start_state: int = 0
    mean_rewards: np.ndarray = field(init=False, repr=False)
    support: tuple = field(init=False, repr=False)
    max_support: int = field(init=False)

    def __post_init__(self):
        P = np.array(self.transitions, dtype=float)
        if P.ndim != 3 or P.shape[0] != P.shape[2] or 0 in P.shape:
            raise InvalidMdpError(f"transitions must have shape (S, A, S), got {P.shape}")
        S, A, _ = P.shape
        if self.horizon < 1:
            raise InvalidMdpError("horizon must be positive")
        if not 0 <= self.start_state < S:
            raise InvalidMdpError(f"start state {self.start_state} not in [0, {S})")
        for s, a in itertools.product(range(S), range(A)):
            row = P[s, a]
            if np.any(row < 0) or not np.all(np.isfinite(row)):
                raise InvalidMdpError(f"negative or non-finite probability at (s={s}, a={a})")
            if abs(row.sum() - 1.0) > ROW_TOL:
                raise InvalidMdpError(f"row (s={s}, a={a}) sums to {row.sum()!r}, not 1")
        rewards = tuple(tuple(row) for row in self.rewards)
        if len(rewards) != S or any(len(row) != A for row in rewards):
            raise InvalidMdpError(f"rewards must be an {S}x{A} table")
        P.setflags(write=False)
        means = np.array([[rd.mean for rd in row] for row in rewards], dtype=float)
        means.setflags(write=False)
        support = tuple(
            tuple(np.flatnonzero(P[s, a] > 0) for a in range(A)) for s in range(S)
        )
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "mean_rewards", means)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "max_support", max(len(idx) for row in support for idx in row))
        # cumulative probabilities over the support, for inverse-CDF sampling
        object.__setattr__(
            self,
            "_cdf",
            tuple(tuple(np.cumsum(P[s, a, support[s][a]]) for a in range(A)) for s in range(S)),
        )

    @property
    def num_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[1]

    @property
    def shape(self) -> tuple[int, int, int]:
        """``(S, A, H)``."""
        return self.num_states, self.num_actions, self.horizon

    def __eq__(self, other):
        if not isinstance(other, TabularMdp):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and self.start_state == other.start_state
            and self.rewards == other.rewards
            and np.array_equal(self.transitions, other.transitions)
        )

    __hash__ = None

    def sample_next_state(self, s: int, a: int, rng: np.random.Generator) -> int:
        cdf = self._cdf[s][a]
        idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        return int(self.support[s][a][min(idx, len(cdf) - 1)])


def q_values(mdp: TabularMdp, V_next: np.ndarray, states=slice(None)) -> np.ndarray:
    """``r(s, a) + p(.|s, a)^T V_next`` for the selected states, shape ``(..., A)``."""
    P = mdp.transitions[states]
    return mdp.mean_rewards[states] + (P * V_next).sum(axis=-1)


def optimal_backup(V_next: np.ndarray, mdp: TabularMdp) -> np.ndarray:
    """Apply the optimal Bellman operator to a per-state value vector."""
    V_next = np.asarray(V_next, dtype=float)
    if V_next.shape != (mdp.num_states,):
        raise ValueError(f"expected {mdp.num_states} values, got shape {V_next.shape}")
    return q_values(mdp, V_next).max(axis=-1)


def greedy_policy(mdp: TabularMdp, values: np.ndarray) -> np.ndarray:
    """Greedy actions with respect to ``values[h + 1]`` at every ``(h, s)``; lowest index wins ties."""
    H = mdp.horizon
    policy = np.empty((H, mdp.num_states), dtype=np.int64)
    for h in range(H):
        policy[h] = np.argmax(q_values(mdp, values[h + 1]), axis=-1)
    return policy


def value_iteration(mdp: TabularMdp) -> np.ndarray:
    """Optimal values ``V*`` by backward induction, shape ``(H + 1, S)``."""
    S, _, H = mdp.shape
    V = np.zeros((H + 1, S))
    for h in range(H - 1, -1, -1):
        V[h] = optimal_backup(V[h + 1], mdp)
    return V


def _check_policy(mdp: TabularMdp, policy: np.ndarray) -> np.ndarray:
    policy = np.asarray(policy)
    S, A, H = mdp.shape
    if policy.shape != (H, S):
        raise ValueError(f"policy must have shape {(H, S)}, got {policy.shape}")
    if policy.min() < 0 or policy.max() >= A:
        raise ValueError("policy contains out-of-range actions")
    return policy


def evaluate_policy(mdp: TabularMdp, policy: np.ndarray) -> np.ndarray:
    """Values ``V^pi`` of a deterministic time-dependent policy, shape ``(H + 1, S)``."""
    policy = _check_policy(mdp, policy)
    S, _, H = mdp.shape
    states = np.arange(S)
    V = np.zeros((H + 1, S))
    for h in range(H - 1, -1, -1):
        V[h] = q_values(mdp, V[h + 1])[states, policy[h]]
    return V


def occupancy(mdp: TabularMdp, policy: np.ndarray, start: int | None = None) -> np.ndarray:
    """State-action visitation probabilities ``w_t(s, a)`` under ``policy``, shape ``(H, S, A)``."""
    policy = _check_policy(mdp, policy)
    S, A, H = mdp.shape
    start = mdp.start_state if start is None else start
    states = np.arange(S)
    w = np.zeros((H, S, A))
    state_dist = np.zeros(S)
    state_dist[start] = 1.0
    for h in range(H):
        w[h, states, policy[h]] = state_dist
        state_dist = np.einsum("sa,sat->t", w[h], mdp.transitions)
    return w


def enumerate_policy_values(mdp: TabularMdp) -> np.ndarray:
    """``V^pi_1`` for every deterministic policy, shape ``(A ** (S * H), S)``.

    Brute force; only meant for tiny MDPs.
    """
    S, A, H = mdp.shape
    n_cells = S * H
    if A**n_cells > 2**22:
        raise ValueError("too many policies to enumerate")
    # policies[i] is the base-A expansion of i over the S*H cells
    codes = np.arange(A**n_cells)
    digits = (codes[:, None] // A ** np.arange(n_cells)) % A
    policies = digits.reshape(-1, H, S)
    V = np.zeros((len(codes), S))
    for h in range(H - 1, -1, -1):
        Q = mdp.mean_rewards[None] + np.einsum("sat,pt->psa", mdp.transitions, V)
        V = np.take_along_axis(Q, policies[:, h, :, None], axis=2)[..., 0]
    return V


def optimality_gap(mdp: TabularMdp, tol: float = 1e-12) -> float:
    """Smallest positive ``V*_1(s) - V^pi_1(s)`` over start states and policies."""
    values = enumerate_policy_values(mdp)
    v_star = value_iteration(mdp)[0]
    gaps = v_star[None, :] - values
    positive = gaps[gaps > tol]
    return float(positive.min()) if positive.size else np.inf


class Step(NamedTuple):
    t: int
    state: int
    action: int
    reward: float
    next_state: int


def sample_episode(
    mdp: TabularMdp,
    action_provider: Callable[[int, int], int],
    rng: np.random.Generator,
    start: int | None = None,
) -> list[Step]:
    """Roll out one episode; ``action_provider(h, s)`` chooses each action."""
    S, A, H = mdp.shape
    s = mdp.start_state if start is None else start
    trajectory = []
    for h in range(H):
        a = int(action_provider(h, s))
        if not 0 <= a < A:
            raise ValueError(f"action {a} out of range at (t={h + 1}, s={s})")
        r = mdp.rewards[s][a].sample(rng)
        s_next = mdp.sample_next_state(s, a, rng)
        trajectory.append(Step(h, s, a, r, s_next))
        s = s_next
    return trajectory
