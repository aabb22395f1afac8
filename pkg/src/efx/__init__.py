"""EFX allocations of indivisible goods when all but two agents share a valuation."""
from .envy import (
    EnvyReport,
    best_removal_good,
    feasible_set,
    find_strong_envy,
    is_efx,
    is_efx_feasible,
    minimally_envied_subset,
    strongly_envies,
)
from .model import (
    Agent,
    Allocation,
    CapExceeded,
    Instance,
    InstanceError,
    Valuation,
    bundle,
    goods_of,
    is_monotone,
    is_nondegenerate,
    perturb,
    validate_allocation,
    value,
)
from .oracle import OracleResult, cross_validate, enumerate_allocations, exists_efx_bruteforce, is_mms_feasible
from .pr import leximin_pp_order, pr_bruteforce, pr_localsearch, run_pr
from .solver import InvariantError, SolverState, StructureError, TraceEvent, solve

__version__ = "0.1.0"
