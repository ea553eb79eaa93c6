"""Experiment orchestration: seeded runs, exact regret, CSV output, PAC and cost summaries."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .environments import parse_env
from .greedy import BonusParams, GreedyAgent
from .mdp import GAUSSIAN, REWARD_KINDS, TabularMdp, evaluate_policy, value_iteration
from .planning import FullPlanningAgent
from .rtdp import RtdpAgent

AGENTS = ("rtdp", "ucrl2", "ucrl2-gp", "euler", "euler-gp")
CSV_FIELDS = (
    "episode",
    "regret_inc",
    "regret_cum",
    "backup_ops",
    "update_total",
    "optimism_margin",
    "wall_ns",
)
THREADS_ENV = "GREEDY_MBRL_THREADS"


class ConfigError(ValueError):
    pass


def hash64(seed: int, label: str) -> int:
    digest = hashlib.blake2b(f"{seed}/{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def child_rng(seed: int, label: str) -> np.random.Generator:
    """Independent stream per (seed, purpose), so consumers cannot perturb each other."""
    return np.random.default_rng(hash64(seed, label))


@dataclass
class EpisodeRecord:
    episode: int
    regret_inc: float
    regret_cum: float
    backup_ops: int
    update_total: float
    optimism_margin: float
    wall_ns: int = 0
    # in-memory only, never written to CSV
    result: object = field(default=None, repr=False, compare=False)

    def row(self) -> list:
        return [getattr(self, name) for name in CSV_FIELDS]


@dataclass
class ExperimentConfig:
    env: str
    agent: str
    episodes: int = 3000
    delta: float = 0.05
    seeds: Sequence[int] = (0,)
    out_dir: str | None = None
    reward_kind: str = GAUSSIAN
    clamp: bool = True
    record_wall_time: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.agent not in AGENTS:
            raise ConfigError(f"unknown agent {self.agent!r}; expected one of {AGENTS}")
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if len(self.seeds) < 1:
            raise ConfigError("need at least one seed")
        if self.reward_kind not in REWARD_KINDS:
            raise ConfigError(f"unknown reward kind {self.reward_kind!r}")
        try:
            parse_env(self.env, self.reward_kind)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self


def make_agent(name: str, mdp: TabularMdp, episodes: int, delta: float, clamp: bool = True):
    S, A, H = mdp.shape
    if name == "rtdp":
        return RtdpAgent(mdp)
    family = name.removesuffix("-gp")
    params = (BonusParams.ucrl2 if family == "ucrl2" else BonusParams.euler)(S, A, H, episodes, delta)
    if name.endswith("-gp"):
        return GreedyAgent.for_mdp(mdp, params)
    return FullPlanningAgent.for_mdp(mdp, params, clamp=clamp)


def run_agent(agent, mdp: TabularMdp, episodes: int, seed: int = 0,
              keep_results: bool = True, record_wall_time: bool = False) -> list[EpisodeRecord]:
    """Play ``episodes`` episodes and score each one exactly against ``V*``."""
    v_star = value_iteration(mdp)
    s1 = mdp.start_state
    H = mdp.horizon
    rng = child_rng(seed, "env")
    records = []
    cumulative = 0.0
    for k in range(1, episodes + 1):
        start = time.perf_counter_ns()
        result = agent.run_episode(mdp, rng)
        wall = time.perf_counter_ns() - start if record_wall_time else 0
        inc = float(v_star[0, s1] - evaluate_policy(mdp, result.policy)[0, s1])
        cumulative += inc
        records.append(
            EpisodeRecord(
                episode=k,
                regret_inc=inc,
                regret_cum=cumulative,
                backup_ops=result.backup_ops,
                update_total=result.update_total,
                optimism_margin=float((result.upper[:H] - v_star[:H]).min()),
                wall_ns=wall,
                result=result if keep_results else None,
            )
        )
    return records


def run_seed(config: ExperimentConfig, seed: int, keep_results: bool = False) -> list[EpisodeRecord]:
    mdp = parse_env(config.env, config.reward_kind)
    agent = make_agent(config.agent, mdp, config.episodes, config.delta, config.clamp)
    return run_agent(agent, mdp, config.episodes, seed, keep_results, config.record_wall_time)


def _run_seed_job(args):
    config, seed = args
    return run_seed(config, seed)


def records_to_csv(records: Iterable[EpisodeRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def aggregate_csv(runs: Sequence[Sequence[EpisodeRecord]]) -> str:
    """Per-episode mean and (population) std across seeds."""
    metrics = CSV_FIELDS[1:]
    table = np.array([[rec.row()[1:] for rec in run] for run in runs], dtype=float)
    mean, std = table.mean(axis=0), table.std(axis=0)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["episode"] + [f"{m}_{stat}" for m in metrics for stat in ("mean", "std")])
    for i, rec in enumerate(runs[0]):
        row = [rec.episode]
        for j in range(len(metrics)):
            row += [repr(float(mean[i, j])), repr(float(std[i, j]))]
        writer.writerow(row)
    return buf.getvalue()


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_experiment(config: ExperimentConfig) -> dict[int, list[EpisodeRecord]]:
    """Run every seed; write one CSV per seed plus an aggregate when ``out_dir`` is set."""
    config.validate()
    seeds = list(config.seeds)
    workers = min(_workers(), len(seeds))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            runs = list(pool.map(_run_seed_job, [(config, s) for s in seeds]))
    else:
        runs = [run_seed(config, s) for s in seeds]
    if config.out_dir is not None:
        out = Path(config.out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            for seed, records in zip(seeds, runs):
                (out / f"{config.agent}_seed{seed}.csv").write_text(records_to_csv(records))
            (out / f"{config.agent}_aggregate.csv").write_text(aggregate_csv(runs))
            meta = {k: v for k, v in asdict(config).items() if k != "out_dir"} | {"seeds": seeds}
            (out / f"{config.agent}_config.json").write_text(json.dumps(meta, indent=1) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write results to {out}: {exc}") from exc
    return dict(zip(seeds, runs))


def read_records(path) -> list[EpisodeRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        EpisodeRecord(
            episode=int(r["episode"]),
            regret_inc=float(r["regret_inc"]),
            regret_cum=float(r["regret_cum"]),
            backup_ops=int(r["backup_ops"]),
            update_total=float(r["update_total"]),
            optimism_margin=float(r["optimism_margin"]),
            wall_ns=int(r["wall_ns"]),
        )
        for r in rows
    ]


def pac_counters(records: Sequence[EpisodeRecord], eps_grid: Iterable[float]) -> dict[float, int]:
    """``N_eps``: number of episodes whose policy is more than ``eps`` suboptimal."""
    incs = np.array([r.regret_inc for r in records])
    return {float(eps): int((incs > eps).sum()) for eps in eps_grid}


@dataclass(frozen=True)
class ComplexityRow:
    full_ops_per_episode: float
    greedy_ops_per_episode: float

    @property
    def ratio(self) -> float:
        return self.full_ops_per_episode / self.greedy_ops_per_episode


def complexity_report(full: Sequence[EpisodeRecord], greedy: Sequence[EpisodeRecord]) -> ComplexityRow:
    """Mean backup operations per episode for a full planner and its greedy counterpart."""
    if not full or not greedy:
        raise ValueError("need at least one episode from each agent")
    return ComplexityRow(
        float(np.mean([r.backup_ops for r in full])),
        float(np.mean([r.backup_ops for r in greedy])),
    )
