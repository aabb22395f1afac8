"""Envy predicates, EFX-feasibility and the single-good moves built on them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import Allocation, Instance, InstanceError, Valuation, goods_of, validate_allocation


@dataclass(frozen=True)
class EnvyReport:
    envies: bool
    strongly_envies: bool
    witness_good: int | None = None


def strongly_envies(v: Valuation, S: int, T: int) -> EnvyReport:
    """Does a holder of ``S`` strongly envy ``T`` under ``v``?

    The witness is the smallest-index good ``g`` with ``v(S) < v(T - g)``.

    >>> v = Valuation.additive([5, 3, 4])
    >>> strongly_envies(v, 0b001, 0b110)
    EnvyReport(envies=True, strongly_envies=False, witness_good=None)
    """
    own = v(S)
    for g in goods_of(T):
        if own < v(T & ~(1 << g)):
            return EnvyReport(True, True, g)
    return EnvyReport(own < v(T), False, None)


def is_efx_feasible(v: Valuation, S: int, T: int) -> bool:
    """True iff ``v(T - h) < v(S)`` for every ``h`` in ``T`` (vacuous for empty ``T``)."""
    own = v(S)
    return all(v(T & ~(1 << h)) < own for h in goods_of(T))


def feasible_set(bundles: Sequence[int], v: Valuation) -> set[int]:
    """Indices of bundles that are EFX-feasible w.r.t. every other bundle under ``v``."""
    out = set()
    for i, S in enumerate(bundles):
        if all(is_efx_feasible(v, S, T) for j, T in enumerate(bundles) if j != i):
            out.add(i)
    return out


def find_strong_envy(inst: Instance, X: Allocation) -> tuple[str, str, int] | None:
    """First ``(envious agent, envied agent, witness good)`` in agent order, or None."""
    for a in inst.agents:
        v = inst.valuations[a.valuation]
        own = X.bundle_of(a.name)
        for b in inst.agents:
            if b.name == a.name:
                continue
            rep = strongly_envies(v, own, X.bundle_of(b.name))
            if rep.strongly_envies:
                return a.name, b.name, rep.witness_good
    return None


def is_efx(inst: Instance, X: Allocation) -> bool:
    if not validate_allocation(inst, X):
        raise InstanceError("not a complete allocation of this instance")
    return find_strong_envy(inst, X) is None


def minimally_envied_subset(v: Valuation, own: int, T: int) -> int:
    """Shrink ``T`` to a subset still envied from ``own`` but not after any removal.

    Goods are tried in order of decreasing ``v(T - g)`` (least marginal good
    first, ties by index); a good is dropped whenever envy survives without it.
    For additive ``v`` this is increasing single-good value.

    >>> v = Valuation.additive([5, 4, 3, 2])
    >>> minimally_envied_subset(v, 0b0001, 0b1110)
    6
    """
    base = v(own)
    if not base < v(T):
        raise ValueError("minimally_envied_subset requires v(own) < v(T)")
    order = sorted(goods_of(T), key=lambda g: (-v(T & ~(1 << g)), g))
    S = T
    for g in order:
        rest = S & ~(1 << g)
        if v(rest) > base:
            S = rest
    return S


def best_removal_good(v: Valuation, T: int) -> int:
    """The good whose removal keeps the most value: ``argmax_g v(T - g)``, ties by index."""
    if not T:
        raise ValueError("best_removal_good needs a non-empty bundle")
    best, best_val = -1, None
    for g in goods_of(T):
        x = v(T & ~(1 << g))
        if best_val is None or x > best_val:
            best, best_val = g, x
    return best
