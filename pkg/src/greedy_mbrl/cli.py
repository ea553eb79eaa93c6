"""Command-line entry point: ``run``, ``plot``, ``dbp-verify`` and ``complexity``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dbp
from .environments import InvalidSpecError
from .harness import AGENTS, ConfigError, ExperimentConfig, complexity_report, read_records, run_experiment
from .mdp import GAUSSIAN, REWARD_KINDS
from .plotting import CsvFormatError, EmptyPlotError, emit_plot

EXIT_VALIDATION = 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greedy-mbrl")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one agent over several seeds and write CSVs")
    run.add_argument("--env", required=True, help="chain:N, grid:N, random:S,A,H,b,seed or FILE.mdp.json")
    run.add_argument("--agent", required=True, choices=AGENTS)
    run.add_argument("--episodes", type=int, default=3000)
    run.add_argument("--delta", type=float, default=0.05)
    run.add_argument("--seeds", type=int, default=5, help="number of seeds (0 .. n-1)")
    run.add_argument("--out", required=True)
    run.add_argument("--rewards", choices=REWARD_KINDS, default=GAUSSIAN)
    run.add_argument("--no-clamp", action="store_true", help="full planners: do not cap by last episode's values")
    run.add_argument("--wall-time", action="store_true", help="record wall time (breaks byte-identical reruns)")

    plot = sub.add_parser("plot", help="plot the aggregate CSVs of a results directory")
    plot.add_argument("--in", dest="inp", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--title", default="")

    ver = sub.add_parser("dbp-verify", help="Monte-Carlo check of the decreasing-process regret bound")
    ver.add_argument("--gen", required=True, help="geom:q, mult:alpha, coin or const")
    ver.add_argument("--c", type=float, default=1.0)
    ver.add_argument("--delta", type=float, default=0.05)
    ver.add_argument("--trials", type=int, default=2000)
    ver.add_argument("--steps", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=0)

    comp = sub.add_parser("complexity", help="compare backup operations of two result directories")
    comp.add_argument("--in", dest="inp", required=True, help="full-planning results")
    comp.add_argument("--vs", required=True, help="greedy results")
    return parser


def _seed_records(directory: str):
    files = sorted(Path(directory).glob("*_seed*.csv"))
    if not files:
        raise ConfigError(f"no per-seed CSV files in {directory}")
    return [rec for f in files for rec in read_records(f)]


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            config = ExperimentConfig(
                env=args.env,
                agent=args.agent,
                episodes=args.episodes,
                delta=args.delta,
                seeds=list(range(args.seeds)),
                out_dir=args.out,
                reward_kind=args.rewards,
                clamp=not args.no_clamp,
                record_wall_time=args.wall_time,
            )
            runs = run_experiment(config)
            for seed, records in runs.items():
                print(f"seed {seed}: regret {records[-1].regret_cum:.4f} after {len(records)} episodes")
        elif args.command == "plot":
            files = sorted(Path(args.inp).glob("*_aggregate.csv"))
            if not files:
                raise ConfigError(f"no aggregate CSV files in {args.inp}")
            series = {f.name.removesuffix("_aggregate.csv"): f.read_text() for f in files}
            Path(args.out).write_text(emit_plot(series, args.title))
        elif args.command == "dbp-verify":
            if args.c < 0:
                raise ConfigError("--c must be nonnegative")
            check = dbp.verify_bound(
                dbp.parse_generator(args.gen), args.c, args.delta, args.trials, args.steps, args.seed
            )
            print(f"threshold 9C ln(3/delta) = {check.threshold:.4f}: "
                  f"violation frequency {check.violation_frequency:.4f}")
            print(f"threshold C(1+2sqrt(ln(2/delta)))^2 = {check.sharp_threshold:.4f}: "
                  f"violation frequency {check.sharp_violation_frequency:.4f}")
            print(f"largest regret over {check.trials} trials: {check.max_regret:.4f}")
        elif args.command == "complexity":
            row = complexity_report(_seed_records(args.inp), _seed_records(args.vs))
            print(f"{'':10s}{'ops/episode':>14s}")
            print(f"{'full':10s}{row.full_ops_per_episode:14.1f}")
            print(f"{'greedy':10s}{row.greedy_ops_per_episode:14.1f}")
            print(f"ratio {row.ratio:g}")
    except (ConfigError, InvalidSpecError, CsvFormatError, EmptyPlotError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
