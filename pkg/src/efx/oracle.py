"""Exhaustive ground truth: EFX existence, MMS-feasibility, solver cross-checks.

Nothing here calls the envy module; values and removals are recomputed from
the raw valuation data with numpy so the checks stay independent of the code
they audit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .model import Allocation, CapExceeded, Instance, Valuation

ORACLE_CAP = 10**8
MMS_CAP = 16
_CHUNK = 1 << 20


def value_table(v: Valuation) -> np.ndarray:
    """All ``2**m`` bundle values of ``v`` as an array indexed by bitmask."""
    m = v.m
    if v.kind == "table":
        vals = list(v.values)
    else:
        masks = np.arange(1 << m, dtype=np.int64)
        bits = (masks[:, None] >> np.arange(m)) & 1
        if sum(v.values) < 2**62:
            return bits @ np.array(v.values, dtype=np.int64)
        vals = [sum(x for g, x in enumerate(v.values) if s >> g & 1) for s in range(1 << m)]
    if max(vals) < 2**62:
        return np.array(vals, dtype=np.int64)
    return np.array(vals, dtype=object)


def _max_removal_table(t: np.ndarray, m: int) -> np.ndarray:
    """``r[S] = max over g in S of t[S - g]``, and -1 for the empty bundle."""
    masks = np.arange(1 << m)
    r = np.full(1 << m, -1, dtype=t.dtype)
    for g in range(m):
        bit = 1 << g
        has = (masks & bit) != 0
        r = np.where(has, np.maximum(r, t[masks ^ bit]), r)
    return r


def enumerate_allocations(
    m: int, n: int, cap: int = ORACLE_CAP, names: Sequence[str] | None = None
) -> Iterator[Allocation]:
    """Every map of ``m`` goods onto ``n`` ordered bundles, in base-n counting order.

    Good 0 is the least significant digit. Agent ``names[i]`` holds bundle ``i``.
    """
    if n**m > cap:
        raise CapExceeded(f"{n}**{m} allocations exceed cap {cap}")
    names = [str(i) for i in range(n)] if names is None else list(names)
    assignment = {name: i for i, name in enumerate(names)}
    for digits in itertools.product(range(n), repeat=m):
        bundles = [0] * n
        for g, j in enumerate(reversed(digits)):
            bundles[j] |= 1 << g
        yield Allocation(tuple(bundles), assignment)


@lru_cache(maxsize=16)
def _owner_masks(n: int, m: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    masks = np.zeros((len(codes), n), dtype=np.int64)
    rows = np.arange(len(codes))
    for p in range(m):
        owner = (codes // n**p) % n
        masks[rows, owner] |= 1 << p
    masks.setflags(write=False)
    return masks


def _code(owners: Sequence[int], n: int) -> int:
    code = 0
    for j in reversed(owners):
        code = code * n + j
    return code


@dataclass
class OracleResult:
    exists: bool
    witness: Allocation | None
    efx_count: int
    allocations_scanned: int
    efx_codes: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0, dtype=np.int64))

    def contains(self, inst: Instance, X: Allocation) -> bool:
        """Is ``X`` (read as a map from goods to agents) in the scanned EFX set?"""
        code = _code(X.owners(inst), inst.n)
        i = np.searchsorted(self.efx_codes, code)
        return bool(i < len(self.efx_codes) and self.efx_codes[i] == code)


def exists_efx_bruteforce(inst: Instance, cap: int = ORACLE_CAP) -> OracleResult:
    """Scan every good-to-agent map of ``inst`` and collect the EFX ones.

    Agent ``i`` (in instance order) holds bundle ``i``; since every map of
    goods onto agents is visited, all bundle tuples under all agent
    permutations are covered.
    """
    n, m = inst.n, inst.m
    total = n**m
    if total > cap:
        raise CapExceeded(f"{n}**{m} allocations exceed cap {cap}")
    own_tables, rem_tables = {}, {}
    for vid, v in inst.valuations.items():
        t = value_table(v)
        own_tables[vid] = t
        rem_tables[vid] = _max_removal_table(t, m)
    vids = [a.valuation for a in inst.agents]

    found = []
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        masks = _owner_masks(n, m, start, stop)
        ok = np.ones(stop - start, dtype=bool)
        for i, vid in enumerate(vids):
            own = own_tables[vid][masks[:, i]]
            rem = rem_tables[vid]
            for j in range(n):
                if j != i:
                    ok &= ~(rem[masks[:, j]] > own)
        found.append(np.flatnonzero(ok).astype(np.int64) + start)
    codes = np.concatenate(found) if found else np.zeros(0, dtype=np.int64)

    witness = None
    if len(codes):
        owners = [int(codes[0]) // n**p % n for p in range(m)]
        bundles = [0] * n
        for g, j in enumerate(owners):
            bundles[j] |= 1 << g
        witness = Allocation(tuple(bundles), {name: i for i, name in enumerate(inst.names)})
    return OracleResult(len(codes) > 0, witness, len(codes), total, codes)


def _submasks(S: int) -> np.ndarray:
    bits = [g for g in range(S.bit_length()) if S >> g & 1]
    r = np.arange(1 << len(bits), dtype=np.int64)
    out = np.zeros_like(r)
    for j, g in enumerate(bits):
        out |= ((r >> j) & 1) << g
    return out


def is_mms_feasible(v: Valuation, m: int | None = None, strict: bool = False, cap: int = MMS_CAP) -> bool:
    """Check MMS-feasibility of ``v`` by enumerating every bundle and every 2-split.

    For each bundle ``S``: the smallest "larger half" over all 2-partitions of
    ``S`` must be at least the largest "smaller half". ``strict=True`` demands
    a strict gap instead and skips the empty bundle, where no valuation can
    meet it.
    """
    m = v.m if m is None else m
    if m > cap:
        raise CapExceeded(f"MMS check needs 3**{m} evaluations (cap m <= {cap})")
    t = value_table(v)
    for S in range(1 << m):
        if strict and S == 0:
            continue
        sub = _submasks(S)
        a, b = t[sub], t[S ^ sub]
        hi = np.maximum(a, b).min()
        lo = np.minimum(a, b).max()
        if hi < lo or (strict and hi == lo):
            return False
    return True


@dataclass
class CrossValidation:
    ok: bool
    problems: list[str]
    allocation: Allocation | None = None
    trace: list = field(default_factory=list)
    oracle: OracleResult | None = None

    @property
    def labels(self) -> list[str]:
        return [e.case_label for e in self.trace]


def cross_validate(
    inst: Instance,
    *,
    perturb: bool = True,
    pr: str = "local",
    cap: int = ORACLE_CAP,
    run_oracle: bool = True,
) -> CrossValidation:
    """Solve ``inst`` and audit the result against the exhaustive scan."""
    from . import solver
    from .envy import find_strong_envy

    problems = []
    try:
        res = solver.solve(inst, perturb=perturb, pr=pr)
    except Exception as exc:  # report, never mask
        return CrossValidation(False, [f"solve raised {type(exc).__name__}: {exc}"])
    X = res.allocation
    witness = find_strong_envy(inst, X)
    if witness is not None:
        problems.append("agent {} strongly envies agent {} (drop good {})".format(*witness))

    phis = [e.phi_after for e in res.trace if e.case_label not in solver.TERMINAL_LABELS]
    if any(b <= a for a, b in zip(phis, phis[1:])):
        problems.append(f"potential not strictly increasing: {phis}")
    if len(res.trace) > (1 << inst.m) + 1:
        problems.append(f"{len(res.trace)} trace events exceed 2**m")

    oracle = None
    if run_oracle:
        oracle = exists_efx_bruteforce(inst, cap=cap)
        if not oracle.exists:
            problems.append("oracle found no EFX allocation")
        elif not oracle.contains(inst, X):
            problems.append("solver allocation missing from the oracle's EFX set")
    return CrossValidation(not problems, problems, X, res.trace, oracle)
