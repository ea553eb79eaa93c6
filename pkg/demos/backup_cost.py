"""
Computational cost per episode
==============================

Counting Q-value evaluations: a full planner does S*A*H per episode, a
greedy agent A*H (one row of A actions per visited state). The ratio is S.
"""

from greedy_mbrl import parse_env
from greedy_mbrl.harness import complexity_report, make_agent, run_agent

for env in ("chain:10", "chain:25", "grid:5"):
    mdp = parse_env(env)
    for family in ("ucrl2", "euler"):
        full = run_agent(make_agent(family, mdp, 20, 0.05), mdp, 20, keep_results=False)
        greedy = run_agent(make_agent(family + "-gp", mdp, 20, 0.05), mdp, 20, keep_results=False)
        row = complexity_report(full, greedy)
        print(f"{env:9s} {family:6s} full {row.full_ops_per_episode:7.0f}  "
              f"greedy {row.greedy_ops_per_episode:5.0f}  ratio {row.ratio:g}  S={mdp.num_states}")
