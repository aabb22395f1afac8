"""
Checking against brute force
============================

For small instances every way of handing out the goods can be scanned. The
oracle collects all EFX allocations, so we can confirm that one exists and
that the solver picked one of them.
"""

from efx import exists_efx_bruteforce, solve
from efx.generate import random_instance

inst = random_instance(4, 7, seed=42, tables=True)
print({vid: v.kind for vid, v in inst.valuations.items()})

oracle = exists_efx_bruteforce(inst)
print(f"{oracle.efx_count} of {oracle.allocations_scanned} allocations are EFX")

allocation, _ = solve(inst, perturb=True)
print("solver output among them:", oracle.contains(inst, allocation))
