"""EFX partitions under a single valuation.

Two routes behind one contract: an exhaustive leximin++ search and a local
search that repeatedly hands the poorest part a minimally envied subset of a
part it strongly envies. Both return a k-partition of the same goods that is
EFX under ``v`` and whose poorest part is worth at least the input's poorest.
"""
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .envy import minimally_envied_subset, strongly_envies
from .model import CapExceeded, Valuation, goods_of

logger = logging.getLogger(__name__)

BRUTE_CAP = 10**8
LOCAL_MAX_ITER = 10_000
_CHUNK = 1 << 18


def leximin_pp_key(parts: Sequence[int], v: Valuation) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((v(p), p.bit_count()) for p in parts))


def leximin_pp_order(A: Sequence[int], B: Sequence[int], v: Valuation) -> int:
    """-1 if ``B`` is leximin++-better than ``A``, 1 if worse, 0 if tied."""
    if len(A) != len(B) or _union(A) != _union(B):
        raise ValueError("partitions must split the same ground set into the same number of parts")
    ka, kb = leximin_pp_key(A, v), leximin_pp_key(B, v)
    return (ka > kb) - (ka < kb)


def _union(parts: Sequence[int]) -> int:
    out = 0
    for p in parts:
        out |= p
    return out


def _local_table(goods: list[int], v: Valuation) -> np.ndarray:
    """``t[s]`` = value of the bundle formed by the goods picked out by local mask ``s``."""
    size = 1 << len(goods)
    vals = [0] * size
    glob = [0] * size
    for s in range(1, size):
        low = s & -s
        glob[s] = glob[s ^ low] | (1 << goods[low.bit_length() - 1])
        vals[s] = v(glob[s])
    if max(vals) * (len(goods) + 1) < 2**62:
        return np.array(vals, dtype=np.int64)
    return np.array(vals, dtype=object)


def pr_bruteforce(
    ground: int,
    v: Valuation,
    k: int,
    X: Sequence[int] | None = None,
    cap: int = BRUTE_CAP,
) -> tuple[int, ...]:
    """Leximin++-maximal k-partition of ``ground`` by exhaustive search.

    Assignments of the ground goods to parts ``0..k-1`` are scanned in base-k
    counting order, lowest-index good as the least significant digit; among
    tied optima the first one scanned wins.

    >>> pr_bruteforce(0b1111, Valuation.additive([1, 2, 4, 8]), 2)
    (8, 7)
    """
    if k < 1:
        raise ValueError("k must be positive")
    if X is not None and (len(X) != k or _union(X) != ground):
        raise ValueError("input partition does not match ground set and k")
    if not v.monotone:
        raise ValueError("pr_bruteforce requires a monotone valuation")
    goods = goods_of(ground)
    g = len(goods)
    total = k**g
    if total > cap:
        raise CapExceeded(f"{k}**{g} assignments exceed cap {cap}")

    table = _local_table(goods, v)
    width = g + 1
    pos_weights = [k**p for p in range(g)]
    best_key = None
    best_code = 0
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        masks = np.zeros((len(codes), k), dtype=np.int64)
        for p in range(g):
            digit = (codes // pos_weights[p]) % k
            masks[np.arange(len(codes)), digit] |= 1 << p
        keys = table[masks] * width + _popcount(masks)
        keys.sort(axis=1)
        cand = np.arange(len(codes))
        for col in range(k):
            column = keys[cand, col]
            cand = cand[column == column.max()]
        key = tuple(int(x) for x in keys[cand[0]])
        if best_key is None or key > best_key:
            best_key, best_code = key, start + int(cand[0])

    parts = [0] * k
    code = best_code
    for p in range(g):
        parts[code % k] |= 1 << goods[p]
        code //= k
    return tuple(parts)


def _popcount(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    x = a.copy()
    while x.any():
        out += x & 1
        x >>= 1
    return out


def pr_localsearch(
    X: Sequence[int],
    v: Valuation,
    max_iter: int = LOCAL_MAX_ITER,
    brute_cap: int = BRUTE_CAP,
) -> tuple[int, ...]:
    """EFX k-partition reached by minimally-envied-subset swaps from ``X``.

    While the poorest part strongly envies some part ``P``, it takes a minimally
    envied subset ``S`` of ``P`` and ``P`` becomes the rest of ``P`` plus the old
    poorest part. Under a non-degenerate monotone ``v`` the minimum strictly
    rises each round. Falls back to :func:`pr_bruteforce` after ``max_iter``.
    """
    parts = list(X)
    for _ in range(max_iter):
        i = min(range(len(parts)), key=lambda j: (v(parts[j]), j))
        target = None
        for j, P in enumerate(parts):
            if j != i and strongly_envies(v, parts[i], P).strongly_envies:
                target = j
                break
        if target is None:
            return tuple(parts)
        S = minimally_envied_subset(v, parts[i], parts[target])
        parts[i], parts[target] = S, (parts[target] & ~S) | parts[i]
    logger.warning("local search hit %d iterations; falling back to exhaustive search", max_iter)
    return pr_bruteforce(_union(X), v, len(X), X, cap=brute_cap)


def run_pr(X: Sequence[int], v: Valuation, strategy: str = "local") -> tuple[int, ...]:
    if strategy == "local":
        return pr_localsearch(X, v)
    if strategy == "brute":
        return pr_bruteforce(_union(X), v, len(X), X)
    raise ValueError(f"unknown PR strategy {strategy!r}")
