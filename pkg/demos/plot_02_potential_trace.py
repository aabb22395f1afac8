"""
Watching the potential climb
============================

The solver keeps one number, the value of the poorest of the first ``n-1``
bundles under the shared valuation, and raises it strictly at every step.
Here we run a batch of random instances and record how many steps each one
needed, compared with the ``2**m`` ceiling.
"""

from collections import Counter

import numpy as np

from efx import solve
from efx.generate import random_instance

steps = []
labels = Counter()
for seed in range(300):
    inst = random_instance(5, 8, seed=seed)
    _, trace = solve(inst, perturb=True)
    labels.update(e.case_label for e in trace)
    phis = [e.phi_after for e in trace if e.phi_after is not None]
    assert all(a < b for a, b in zip(phis, phis[1:]))
    steps.append(len(trace) - 1)

steps = np.array(steps)
print("steps: mean %.2f, max %d, ceiling %d" % (steps.mean(), steps.max(), 2**8))
print("histogram:", np.bincount(steps))
print("case labels:", dict(sorted(labels.items())))
