"""Seeded random instances in the n-2 shared valuation class."""
from __future__ import annotations

import numpy as np

from .model import Agent, Instance, Valuation, perturb_valuation
from .oracle import is_mms_feasible

MMS_RETRIES = 200


def _popcounts(m: int) -> np.ndarray:
    masks = np.arange(1 << m)
    return ((masks[:, None] >> np.arange(m)) & 1).sum(axis=1)


def _monotone_closure(t: np.ndarray, m: int) -> np.ndarray:
    """``t'[S] = max over subsets T of S of t[T]``."""
    t = t.copy()
    masks = np.arange(1 << m)
    for g in range(m):
        bit = 1 << g
        has = (masks & bit) != 0
        t[has] = np.maximum(t[has], t[masks[has] ^ bit])
    t[0] = 0
    return t


def random_additive(m: int, max_value: int, rng: np.random.Generator) -> Valuation:
    return Valuation.additive(int(x) for x in rng.integers(1, max_value + 1, size=m))


def random_monotone_table(m: int, max_value: int, rng: np.random.Generator) -> Valuation:
    """Random table made monotone by a running max over subsets, then tie-broken."""
    sizes = _popcounts(m)
    raw = np.array([rng.integers(1, max_value * s + 1) if s else 0 for s in sizes], dtype=np.int64)
    t = _monotone_closure(raw, m)
    return perturb_valuation(Valuation.table(int(x) for x in t))


def random_mms_table(m: int, max_value: int, rng: np.random.Generator, retries: int = MMS_RETRIES) -> Valuation:
    """Non-additive monotone table that passes the MMS-feasibility check.

    Candidates are a squared additive valuation plus bounded per-bundle noise,
    made monotone and tie-broken; candidates failing the check are resampled.
    The noise-free square of an additive valuation is the last resort.
    """
    masks = np.arange(1 << m)
    bits = (masks[:, None] >> np.arange(m)) & 1
    for attempt in range(retries + 1):
        w = bits @ rng.integers(1, max_value + 1, size=m)
        noise = 0 if attempt == retries else rng.integers(0, 2 * max_value + 1, size=1 << m)
        t = _monotone_closure(w * w + noise, m)
        v = perturb_valuation(Valuation.table(int(x) for x in t))
        if v.monotone and is_mms_feasible(v):
            return v
    raise RuntimeError("could not sample an MMS-feasible table")


def class_layout(n: int, classes: int) -> list[str]:
    """Valuation id per agent: ``n-2`` agents share ``A``; the last two get ``B``/``C``."""
    if classes == 1:
        return ["A"] * n
    if classes == 2:
        if n < 2:
            raise ValueError("two classes need n >= 2")
        return ["A"] * max(n - 2, 1) + ["B"] * (n - max(n - 2, 1))
    if classes == 3:
        if n < 3:
            raise ValueError("three classes need n >= 3")
        return ["A"] * (n - 2) + ["B", "C"]
    raise ValueError("classes must be 1, 2 or 3")


def random_instance(
    n: int,
    m: int,
    classes: int = 3,
    max_value: int = 100,
    seed: int = 0,
    tables: bool = False,
) -> Instance:
    """Deterministic random instance.

    ``A`` is always additive. With ``tables=True`` and three classes, ``B`` is
    a random monotone table and ``C`` an MMS-checked table.
    """
    if n < 1 or m < 0 or max_value < 1:
        raise ValueError("need n >= 1, m >= 0, max_value >= 1")
    layout = class_layout(n, classes)
    rng = np.random.default_rng(seed)
    vals = {"A": random_additive(m, max_value, rng)}
    if "B" in layout:
        vals["B"] = random_monotone_table(m, max_value, rng) if tables and classes == 3 else random_additive(m, max_value, rng)
    if "C" in layout:
        vals["C"] = random_mms_table(m, max_value, rng) if tables else random_additive(m, max_value, rng)
    agents = tuple(Agent(f"agent{i}", vid) for i, vid in enumerate(layout))
    return Instance(m, agents, vals)
