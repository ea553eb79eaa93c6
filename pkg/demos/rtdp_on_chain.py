"""
RTDP on the chain environment
=============================

RTDP knows the model and acts greedily on its optimistic value table,
backing up only the states it visits. Its regret is bounded by a constant
that does not grow with the number of episodes.
"""

import numpy as np

from greedy_mbrl import ChainSpec, RtdpAgent, make_chain, optimality_gap, value_iteration
from greedy_mbrl.harness import pac_counters, run_agent
from greedy_mbrl.rtdp import rtdp_regret_bound

# A chain of 5 states; moving right succeeds with probability 1 - 1/5.
mdp = make_chain(ChainSpec(5, "deterministic"))
S, A, H = mdp.shape
print("optimal value from the start state:", value_iteration(mdp)[0, 0])

# %%
# Run 20 seeds of 500 episodes and look at the total regret.
totals = []
for seed in range(20):
    records = run_agent(RtdpAgent(mdp), mdp, 500, seed, keep_results=False)
    totals.append(records[-1].regret_cum)
    if seed == 0:
        curve = np.array([r.regret_cum for r in records])
        print("regret after 10, 100, 500 episodes:", curve[[9, 99, 499]])
print("mean total regret %.3f, worst %.3f" % (np.mean(totals), np.max(totals)))
print("high-probability ceiling 9SH^2 ln(3SH/delta):", rtdp_regret_bound(S, H, 0.1))

# %%
# Uniform-PAC view: how many episodes were more than eps suboptimal?
grid = [0.01, 0.1, 0.5, 1.0]
print("N_eps:", pac_counters(records, grid))

# %%
# The smallest nonzero gap between a policy and the optimum turns the
# regret ceiling into a bound on the number of suboptimal episodes.
gap = optimality_gap(make_chain(ChainSpec(4, "deterministic")))
print("gap on the 4-state chain: %.4f" % gap)
