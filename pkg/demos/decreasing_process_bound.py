"""
Regret of a decreasing bounded process
======================================

A process that starts at C, never increases and stays nonnegative has
regret sum_k X_{k-1} - E[X_k | F_{k-1}]. With probability at least
1 - delta this never reaches 9 C ln(3/delta). Here we sample many traces
from a few generators and count how often the regret gets there.
"""

import numpy as np

from greedy_mbrl.dbp import CoinHalving, GeometricDrop, UniformDecay, dbp_regret, synth_dbp, verify_bound

rng = np.random.default_rng(0)
trace = synth_dbp(GeometricDrop(0.3), 1.0, 10, rng)
print("one geometric trace:", trace.values)
print("its regret partial sums:", dbp_regret(trace))

# %%
for gen in (GeometricDrop(0.2), GeometricDrop(0.5), UniformDecay(0.5), UniformDecay(0.9), CoinHalving()):
    for delta in (0.05, 0.1):
        check = verify_bound(gen, 1.0, delta, trials=2000)
        print(f"{gen!r:28s} delta={delta:<5} threshold {check.threshold:6.2f}  "
              f"largest regret {check.max_regret:5.2f}  violations {check.violation_frequency:.4f}")
