"""
A first EFX allocation
======================

Four agents share six goods. Two of them value the goods identically, the
other two have their own additive tastes. We ask the solver for an
allocation that is envy-free up to any good and then look at why it is.
"""

import numpy as np

from efx import Instance, Valuation, find_strong_envy, solve
from efx.model import goods_of

# Goods are numbered 0..5. Agent names map to valuation ids.
valuations = {
    "shared": Valuation.additive([30, 25, 20, 12, 8, 5]),
    "bea": Valuation.additive([5, 10, 40, 20, 20, 5]),
    "cal": Valuation.additive([12, 12, 12, 12, 30, 22]),
}
inst = Instance.from_classes(valuations, ["shared", "shared", "bea", "cal"])

# Integer values often tie; ``perturb=True`` breaks ties without changing
# which allocations are EFX for the original numbers.
allocation, trace = solve(inst, perturb=True)

for name in inst.names:
    mask = allocation.bundle_of(name)
    v = inst.valuations[inst.agents[int(name)].valuation]
    print(f"agent {name} gets goods {goods_of(mask)} worth {v(mask)} to them")

# Every agent values each bundle; rows are agents, columns are bundles.
values = np.array(
    [[inst.valuation_of(i)(b) for b in allocation.bundles] for i in range(inst.n)]
)
print(values)

# Nobody strongly envies anybody:
print("strong envy witness:", find_strong_envy(inst, allocation))
print("steps taken:", [e.case_label for e in trace])
