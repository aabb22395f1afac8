"""
Splitting goods for identical agents
====================================

With one shared valuation the problem is a partition problem. The
exhaustive search returns the leximin++ optimum; the local search starts
from any partition and moves minimally envied subsets toward the poorest
part until nobody strongly envies anyone.
"""

from efx import Valuation, pr_bruteforce, pr_localsearch
from efx.model import goods_of

v = Valuation.additive([9 * 64 + 1, 7 * 64 + 2, 6 * 64 + 4, 5 * 64 + 8, 2 * 64 + 16, 1 * 64 + 32])
start = (0b111111, 0, 0)

for name, parts in (
    ("local search", pr_localsearch(start, v)),
    ("exhaustive", pr_bruteforce(0b111111, v, 3)),
):
    print(name, [(goods_of(p), v(p) // 64) for p in parts])
