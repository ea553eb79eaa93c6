"""
Optimism over an L1 ball of transition kernels
==============================================

UCRL2 picks the most favourable next-state distribution within L1 distance
eps of the empirical one. The maximiser moves up to eps/2 of mass onto the
best state and takes it from the worst states first.
"""

import numpy as np

from greedy_mbrl.greedy import l1_inner_max

p_hat = np.array([0.4, 0.3, 0.2, 0.1])
V = np.array([0.0, 1.0, 3.0, 2.0])
for eps in (0.0, 0.2, 0.6, 2.0):
    value, dist = l1_inner_max(p_hat, eps, V)
    print(f"eps={eps:3.1f}  value {float(value):.3f}  distribution {np.round(dist, 3)}")

# An unvisited pair has no estimate, so every distribution is allowed.
print("unvisited:", l1_inner_max(np.zeros(4), 0.1, V))
