"""Greedy (1-step planning) model-based RL for tabular finite-horizon MDPs.

RTDP, UCRL2-GP and EULER-GP, their full-planning baselines, exact regret
accounting and Monte-Carlo checks of decreasing-process concentration.
"""
from .dbp import DbpTrace, dbp_regret, synth_dbp, verify_bound
from .empirical import EmpiricalModel
from .environments import (
    ChainSpec,
    GridChainSpec,
    RandomMdpSpec,
    load_mdp,
    make_chain,
    make_grid_chain,
    make_random_mdp,
    parse_env,
    save_mdp,
)
from .greedy import BonusParams, GreedyAgent, l1_inner_max
from .harness import ExperimentConfig, pac_counters, run_agent, run_experiment
from .mdp import (
    RewardDistribution,
    TabularMdp,
    evaluate_policy,
    occupancy,
    optimal_backup,
    optimality_gap,
    sample_episode,
    value_iteration,
)
from .planning import FullPlanningAgent, euler_full_plan, ucrl2_full_plan
from .rtdp import RtdpAgent, run_rtdp

__version__ = "0.1.0"
