"""Benchmark environments and the ``.mdp.json`` file format."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .mdp import (
    BERNOULLI,
    DETERMINISTIC,
    GAUSSIAN,
    REWARD_KINDS,
    ROW_TOL,
    InvalidMdpError,
    RewardDistribution,
    TabularMdp,
)

MDP_SUFFIX = ".mdp.json"

# action indices
LEFT, RIGHT = 0, 1
DOWN = 0


class InvalidSpecError(ValueError):
    pass


class MdpFormatError(ValueError):
    pass


def reward(kind: str, mean: float) -> RewardDistribution:
    """Reward with the given mean in one of the three families (unit std when Gaussian)."""
    if kind == GAUSSIAN:
        return RewardDistribution.gaussian(mean, 1.0)
    if kind == BERNOULLI:
        return RewardDistribution.bernoulli(mean)
    if kind == DETERMINISTIC:
        return RewardDistribution.deterministic(mean)
    raise InvalidSpecError(f"unknown reward kind {kind!r}; expected one of {REWARD_KINDS}")


@dataclass(frozen=True)
class ChainSpec:
    length: int
    reward_kind: str = GAUSSIAN


@dataclass(frozen=True)
class GridChainSpec:
    side: int
    reward_kind: str = GAUSSIAN
    # "into": noisy zero-mean reward on every (s, a) that can land in the start corner;
    # "at": only on the actions taken at the start corner
    start_noise: str = "into"


@dataclass(frozen=True)
class RandomMdpSpec:
    S: int
    A: int
    H: int
    branching: int
    seed: int = 0
    reward_kind: str = DETERMINISTIC


def make_chain(spec: ChainSpec) -> TabularMdp:
    """Chain of ``N`` states, start at the left end, horizon ``N``.

    ``right`` succeeds with probability ``1 - 1/N`` and otherwise moves left;
    ``left`` always moves left. Attempting ``right`` at the right end pays mean 1,
    ``left`` at the start state pays mean 0 (unit noise in the Gaussian variant).
    """
    N = spec.length
    if N < 2:
        raise InvalidSpecError(f"chain length must be >= 2, got {N}")
    zero = RewardDistribution.deterministic(0.0)
    P = np.zeros((N, 2, N))
    rewards = [[zero, zero] for _ in range(N)]
    for s in range(N):
        P[s, LEFT, max(s - 1, 0)] = 1.0
        P[s, RIGHT, min(s + 1, N - 1)] += 1.0 - 1.0 / N
        P[s, RIGHT, max(s - 1, 0)] += 1.0 / N
    rewards[N - 1][RIGHT] = reward(spec.reward_kind, 1.0)
    rewards[0][LEFT] = reward(spec.reward_kind, 0.0)
    return TabularMdp(P, rewards, horizon=N, start_state=0)


def make_grid_chain(spec: GridChainSpec) -> TabularMdp:
    """``N x N`` grid from the upper-left to the lower-right corner, horizon ``2N - 1``.

    State ``row * N + col``. ``down`` and ``right`` move toward the goal but slip
    backwards (up / left, clamped at walls) with probability ``1/H``. Any action
    taken at the goal pays mean 1.
    """
    N = spec.side
    if N < 2:
        raise InvalidSpecError(f"grid side must be >= 2, got {N}")
    if spec.start_noise not in ("into", "at"):
        raise InvalidSpecError(f"unknown start_noise {spec.start_noise!r}")
    H = 2 * N - 1
    S = N * N
    slip = 1.0 / H
    P = np.zeros((S, 2, S))
    for row in range(N):
        for col in range(N):
            s = row * N + col
            P[s, DOWN, min(row + 1, N - 1) * N + col] += 1.0 - slip
            P[s, DOWN, max(row - 1, 0) * N + col] += slip
            P[s, RIGHT, row * N + min(col + 1, N - 1)] += 1.0 - slip
            P[s, RIGHT, row * N + max(col - 1, 0)] += slip
    zero = RewardDistribution.deterministic(0.0)
    rewards = [[zero, zero] for _ in range(S)]
    if spec.start_noise == "into":
        noisy = [(s, a) for s in range(S) for a in range(2) if P[s, a, 0] > 0]
    else:
        noisy = [(0, DOWN), (0, RIGHT)]
    for s, a in noisy:
        rewards[s][a] = reward(spec.reward_kind, 0.0)
    goal = S - 1
    rewards[goal] = [reward(spec.reward_kind, 1.0)] * 2
    return TabularMdp(P, rewards, horizon=H, start_state=0)


def make_random_mdp(spec: RandomMdpSpec) -> TabularMdp:
    S, A, H, k = spec.S, spec.A, spec.H, spec.branching
    if min(S, A, H) < 1:
        raise InvalidSpecError("S, A and H must be positive")
    if not 1 <= k <= S:
        raise InvalidSpecError(f"branching must lie in [1, {S}], got {k}")
    rng = np.random.default_rng(spec.seed)
    P = np.zeros((S, A, S))
    for s in range(S):
        for a in range(A):
            succ = rng.choice(S, size=k, replace=False)
            weights = 1.0 - rng.random(k)  # in (0, 1]
            P[s, a, succ] = weights / weights.sum()
    means = rng.random((S, A))
    rewards = [[reward(spec.reward_kind, m) for m in row] for row in means]
    return TabularMdp(P, rewards, horizon=H, start_state=0)


def save_mdp(mdp: TabularMdp) -> bytes:
    S, A, H = mdp.shape
    doc = {
        "S": S,
        "A": A,
        "H": H,
        "start": mdp.start_state,
        "transitions": mdp.transitions.tolist(),
        "rewards": [
            [{"kind": rd.kind, "mean": rd.mean, "std": rd.std} for rd in row]
            for row in mdp.rewards
        ],
    }
    return (json.dumps(doc, indent=1) + "\n").encode()


def load_mdp(data: bytes | str) -> TabularMdp:
    try:
        doc = json.loads(data)
        S, A, H, start = (int(doc[key]) for key in ("S", "A", "H", "start"))
        P = np.array(doc["transitions"], dtype=float)
        raw_rewards = doc["rewards"]
    except (ValueError, KeyError, TypeError) as exc:
        raise MdpFormatError(f"malformed MDP document: {exc}") from exc
    if P.shape != (S, A, S):
        raise MdpFormatError(f"transitions have shape {P.shape}, expected {(S, A, S)}")
    for s in range(S):
        for a in range(A):
            row = P[s, a]
            if np.any(row < 0) or abs(row.sum() - 1.0) > ROW_TOL:
                raise MdpFormatError(
                    f"transition row (s={s}, a={a}) is not a distribution (sum {row.sum()!r})"
                )
    try:
        rewards = [
            [RewardDistribution(r["kind"], float(r["mean"]), float(r.get("std", 0.0))) for r in row]
            for row in raw_rewards
        ]
        return TabularMdp(P, rewards, horizon=H, start_state=start)
    except (InvalidMdpError, KeyError, TypeError) as exc:
        raise MdpFormatError(f"invalid MDP document: {exc}") from exc


def parse_env(text: str, reward_kind: str = GAUSSIAN) -> TabularMdp:
    """Build an environment from ``chain:N``, ``grid:N``, ``random:S,A,H,branching,seed``
    or a path to an ``.mdp.json`` file."""
    if text.endswith(MDP_SUFFIX):
        try:
            with open(text, "rb") as fh:
                return load_mdp(fh.read())
        except OSError as exc:
            raise InvalidSpecError(f"cannot read {text}: {exc}") from exc
    name, _, args = text.partition(":")
    try:
        values = [int(v) for v in args.split(",")] if args else []
    except ValueError as exc:
        raise InvalidSpecError(f"bad environment arguments in {text!r}") from exc
    if name == "chain" and len(values) == 1:
        return make_chain(ChainSpec(values[0], reward_kind))
    if name == "grid" and len(values) == 1:
        return make_grid_chain(GridChainSpec(values[0], reward_kind))
    if name == "random" and len(values) == 5:
        S, A, H, k, seed = values
        return make_random_mdp(RandomMdpSpec(S, A, H, k, seed, reward_kind))
    raise InvalidSpecError(
        f"unrecognised environment {text!r}; use chain:N, grid:N, "
        f"random:S,A,H,branching,seed or a {MDP_SUFFIX} path"
    )
