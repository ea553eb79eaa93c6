"""Decreasing bounded processes: synthetic generators and Monte-Carlo bound checks.

A decreasing bounded process starts at ``C >= 0``, never increases and never
goes negative. Its regret after ``K`` rounds is
``R_K = sum_k X_{k-1} - E[X_k | F_{k-1}]``, and with probability at least
``1 - delta`` it never reaches ``9 C ln(3 / delta)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import TabularMdp, occupancy, optimal_backup

TOL = 1e-12


class DbpTraceError(ValueError):
    pass


@dataclass(frozen=True)
class DbpTrace:
    values: np.ndarray  # X_0 .. X_K
    cond_expectations: np.ndarray  # E[X_k | F_{k-1}] for k = 1 .. K
    bound: float

    def validate(self, tol: float = TOL) -> "DbpTrace":
        X, E, C = np.asarray(self.values), np.asarray(self.cond_expectations), self.bound
        if len(E) != len(X) - 1:
            raise DbpTraceError("need one conditional expectation per step")
        if C < 0 or abs(X[0] - C) > tol:
            raise DbpTraceError(f"step 0: X_0 = {X[0]!r} must equal the bound C = {C!r} >= 0")
        checks = (
            (X[1:] > X[:-1] + tol, "process increased"),
            (X[1:] < -tol, "process went negative"),
            (E > X[:-1] + tol, "conditional expectation exceeds previous value"),
            (E < -tol, "negative conditional expectation"),
        )
        for bad, what in checks:
            if bad.any():
                k = int(np.argmax(bad)) + 1
                raise DbpTraceError(f"step {k}: {what}")
        return self


def dbp_regret(trace: DbpTrace) -> np.ndarray:
    """Partial sums ``R_1 .. R_K``."""
    trace.validate()
    X = np.asarray(trace.values, dtype=float)
    return np.cumsum(X[:-1] - np.asarray(trace.cond_expectations, dtype=float))


# --- synthetic generators -------------------------------------------------------
# Each generator draws ``trials`` independent traces at once and returns
# (values (trials, K + 1), cond_expectations (trials, K)).


@dataclass(frozen=True)
class GeometricDrop:
    """Stays at ``C`` and drops to zero with probability ``q`` at every step."""

    q: float

    def sample(self, C, K, trials, rng):
        alive = np.cumprod(rng.random((trials, K)) >= self.q, axis=1)
        X = np.concatenate([np.ones((trials, 1)), alive], axis=1) * C
        return X, X[:, :-1] * (1 - self.q)


@dataclass(frozen=True)
class UniformDecay:
    """Multiplies by an independent ``Uniform[alpha, 1]`` factor at every step."""

    alpha: float

    def sample(self, C, K, trials, rng):
        U = rng.uniform(self.alpha, 1.0, (trials, K))
        X = C * np.concatenate([np.ones((trials, 1)), np.cumprod(U, axis=1)], axis=1)
        return X, X[:, :-1] * (1 + self.alpha) / 2


@dataclass(frozen=True)
class CoinHalving:
    """Multiplies by 0 or 1 with probability one half each."""

    def sample(self, C, K, trials, rng):
        U = (rng.random((trials, K)) < 0.5).astype(float)
        X = C * np.concatenate([np.ones((trials, 1)), np.cumprod(U, axis=1)], axis=1)
        return X, X[:, :-1] / 2


@dataclass(frozen=True)
class Constant:
    def sample(self, C, K, trials, rng):
        X = np.full((trials, K + 1), float(C))
        return X, X[:, :-1].copy()


def parse_generator(text: str):
    """``geom:q``, ``mult:alpha``, ``coin`` or ``const``."""
    name, _, arg = text.partition(":")
    try:
        if name == "geom":
            q = float(arg)
            if not 0 <= q <= 1:
                raise ValueError
            return GeometricDrop(q)
        if name == "mult":
            alpha = float(arg)
            if not 0 <= alpha <= 1:
                raise ValueError
            return UniformDecay(alpha)
    except ValueError:
        raise ValueError(f"bad generator parameter in {text!r}") from None
    if name == "coin" and not arg:
        return CoinHalving()
    if name == "const" and not arg:
        return Constant()
    raise ValueError(f"unknown generator {text!r}; use geom:q, mult:alpha, coin or const")


def synth_dbp(generator, C: float, K: int, rng: np.random.Generator) -> DbpTrace:
    if C < 0:
        raise ValueError("C must be nonnegative")
    X, E = generator.sample(C, K, 1, rng)
    return DbpTrace(X[0], E[0], float(C))


def rtdp_coupled_traces(mdp: TabularMdp, episodes: int, seed: int = 0) -> dict:
    """Per-``(h, s)`` upper-value sequences of an RTDP run as DBP traces.

    ``E[V^k_t(s) | F_{k-1}] = w (T* V^{k-1}_{t+1})(s) + (1 - w) V^{k-1}_t(s)``
    with ``w`` the probability that the episode's policy visits ``s`` at ``t``.
    """
    from .harness import child_rng
    from .rtdp import RtdpAgent

    agent = RtdpAgent(mdp)
    rng = child_rng(seed, "env")
    S, _, H = mdp.shape
    history = [agent.upper]
    expectations = []
    for _ in range(episodes):
        result = agent.run_episode(mdp, rng)
        frozen = result.upper_prev
        visit = occupancy(mdp, result.policy).sum(axis=-1)
        backed_up = np.array([optimal_backup(frozen[h + 1], mdp) for h in range(H)])
        expectations.append(visit * backed_up + (1 - visit) * frozen[:H])
        history.append(result.upper)
    values = np.array(history)[:, :H]  # (K + 1, H, S)
    E = np.array(expectations)
    return {
        (h, s): DbpTrace(values[:, h, s], E[:, h, s], float(values[0, h, s]))
        for h in range(H)
        for s in range(S)
    }


@dataclass(frozen=True)
class BoundCheck:
    trials: int
    threshold: float  # 9 C ln(3 / delta)
    sharp_threshold: float  # C (1 + 2 sqrt(ln(2 / delta)))^2
    violation_frequency: float
    sharp_violation_frequency: float
    max_regret: float


def verify_bound(generator, C: float, delta: float, trials: int, K: int = 1000,
                 seed: int = 0) -> BoundCheck:
    """Fraction of independent traces whose regret ever reaches the concentration threshold."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    X, E = generator.sample(C, K, trials, rng)
    # partial sums are nondecreasing, so the supremum over K is the final one
    sup_regret = (X[:, :-1] - E).sum(axis=1)
    loose = 9 * C * np.log(3 / delta)
    sharp = C * (1 + 2 * np.sqrt(np.log(2 / delta))) ** 2
    return BoundCheck(
        trials=trials,
        threshold=loose,
        sharp_threshold=sharp,
        violation_frequency=float(np.mean(sup_regret >= loose)),
        sharp_violation_frequency=float(np.mean(sup_regret >= sharp)),
        max_regret=float(sup_regret.max()),
    )
