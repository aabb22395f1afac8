"""Instances, valuations, bundles and allocations.

A bundle is an ``int`` bitmask over good indices: bit ``k`` set means good
``k`` is in the bundle. All values are exact Python integers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

MAX_TABLE_GOODS = 20
PERTURB_CAP = 64
_EAGER_ADDITIVE_GOODS = 12


class InstanceError(ValueError):
    """Malformed instance, valuation or allocation."""


class CapExceeded(RuntimeError):
    """An enumeration would exceed its configured size cap."""


def bundle(goods: Iterable[int]) -> int:
    mask = 0
    for g in goods:
        mask |= 1 << g
    return mask


def goods_of(mask: int) -> list[int]:
    """Good indices contained in ``mask``, ascending.

    >>> goods_of(0b1011)
    [0, 1, 3]
    """
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


@dataclass(frozen=True)
class Valuation:
    """A set function over bundles of ``m`` goods.

    ``kind == "additive"``: ``values[g]`` is the value of good ``g``.
    ``kind == "table"``: ``values[S]`` is the value of bundle bitmask ``S``
    (length ``2**m``).
    """

    kind: str
    values: tuple[int, ...]
    _cache: tuple[int, ...] | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if not all(_is_int(x) for x in vals):
            raise InstanceError("valuation entries must be integers")
        if self.kind == "additive":
            if any(x <= 0 for x in vals):
                raise InstanceError("additive values must be positive integers")
            if len(vals) <= _EAGER_ADDITIVE_GOODS:
                table = [0] * (1 << len(vals))
                for s in range(1, len(table)):
                    low = s & -s
                    table[s] = table[s ^ low] + vals[low.bit_length() - 1]
                object.__setattr__(self, "_cache", tuple(table))
        elif self.kind == "table":
            size = len(vals)
            if size == 0 or size & (size - 1):
                raise InstanceError("table valuation needs 2**m entries")
            if size.bit_length() - 1 > MAX_TABLE_GOODS:
                raise InstanceError(f"table valuations are limited to m <= {MAX_TABLE_GOODS}")
            if vals[0] != 0:
                raise InstanceError("table valuation must give the empty bundle value 0")
            if any(x < 0 for x in vals):
                raise InstanceError("table values must be non-negative")
            object.__setattr__(self, "_cache", vals)
        else:
            raise InstanceError(f"unknown valuation kind {self.kind!r}")

    @classmethod
    def additive(cls, values: Iterable[int]) -> "Valuation":
        return cls("additive", tuple(values))

    @classmethod
    def table(cls, values: Iterable[int]) -> "Valuation":
        return cls("table", tuple(values))

    @property
    def m(self) -> int:
        if self.kind == "additive":
            return len(self.values)
        return len(self.values).bit_length() - 1

    def value(self, S: int) -> int:
        if S >> self.m:
            raise InstanceError(f"bundle {S:#b} references goods outside [0, {self.m})")
        if self._cache is not None:
            return self._cache[S]
        total = 0
        vals = self.values
        while S:
            low = S & -S
            total += vals[low.bit_length() - 1]
            S ^= low
        return total

    __call__ = value

    @cached_property
    def monotone(self) -> bool:
        if self.kind == "additive":
            return True
        t = self.values
        for g in range(self.m):
            bit = 1 << g
            for s in range(len(t)):
                if not s & bit and t[s] > t[s | bit]:
                    return False
        return True


def value(v: Valuation, S: int) -> int:
    """Value of bundle ``S`` under ``v``.

    >>> value(Valuation.additive([3, 5, 7]), bundle([0, 2]))
    10
    """
    return v.value(S)


def is_monotone(v: Valuation, m: int | None = None) -> bool:
    return v.monotone


def is_nondegenerate(v: Valuation, m: int | None = None, cap: int = MAX_TABLE_GOODS) -> bool:
    """True iff all ``2**m`` bundle values are pairwise distinct."""
    m = v.m if m is None else m
    if m > cap:
        raise CapExceeded(f"non-degeneracy check needs 2**{m} bundles (cap m <= {cap})")
    seen = set()
    for s in range(1 << m):
        x = v.value(s)
        if x in seen:
            return False
        seen.add(x)
    return True


def perturb_valuation(v: Valuation) -> Valuation:
    """Scale by ``2**m`` and add the bundle's own bitmask as a tie-breaker."""
    scale = 1 << v.m
    if v.kind == "additive":
        return Valuation.additive(x * scale + (1 << g) for g, x in enumerate(v.values))
    return Valuation.table(x * scale + s for s, x in enumerate(v.values))


@dataclass(frozen=True)
class Agent:
    name: str
    valuation: str


@dataclass(frozen=True)
class Instance:
    m: int
    agents: tuple[Agent, ...]
    valuations: Mapping[str, Valuation]

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "valuations", dict(self.valuations))
        if not _is_int(self.m) or self.m < 0:
            raise InstanceError("m must be a non-negative integer")
        if not self.agents:
            raise InstanceError("an instance needs at least one agent")
        names = [a.name for a in self.agents]
        if len(set(names)) != len(names):
            raise InstanceError("agent names must be unique")
        for a in self.agents:
            if a.valuation not in self.valuations:
                raise InstanceError(f"agent {a.name!r} references unknown valuation {a.valuation!r}")
        for vid, v in self.valuations.items():
            if v.m != self.m:
                raise InstanceError(f"valuation {vid!r} covers {v.m} goods, instance has {self.m}")

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def all_goods(self) -> int:
        return (1 << self.m) - 1

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.agents]

    def valuation_of(self, agent: str | int) -> Valuation:
        if isinstance(agent, int):
            return self.valuations[self.agents[agent].valuation]
        for a in self.agents:
            if a.name == agent:
                return self.valuations[a.valuation]
        raise KeyError(agent)

    @classmethod
    def from_classes(cls, valuations: Mapping[str, Valuation], classes: Iterable[str]) -> "Instance":
        """Build an instance whose ``i``-th agent is named ``str(i)`` with valuation ``classes[i]``."""
        agents = tuple(Agent(str(i), vid) for i, vid in enumerate(classes))
        m = next(iter(valuations.values())).m
        return cls(m, agents, valuations)


def perturb(inst: Instance, cap: int = PERTURB_CAP) -> Instance:
    """Non-degenerate version of ``inst``.

    Every valuation becomes ``v'(S) = v(S) * 2**m + S``. Strong envy under
    ``inst`` implies strong envy under the result, so an EFX allocation of the
    perturbed instance is EFX for the original one.
    """
    if inst.m > cap:
        raise CapExceeded(f"perturbation limited to m <= {cap}")
    vals = {vid: perturb_valuation(v) for vid, v in inst.valuations.items()}
    return Instance(inst.m, inst.agents, vals)


@dataclass(frozen=True)
class Allocation:
    bundles: tuple[int, ...]
    assignment: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(self.bundles))
        object.__setattr__(self, "assignment", dict(self.assignment))

    def bundle_of(self, agent: str) -> int:
        return self.bundles[self.assignment[agent]]

    def owners(self, inst: Instance) -> list[int]:
        """Agent position (in ``inst.agents`` order) holding each good."""
        owner = [-1] * inst.m
        for pos, a in enumerate(inst.agents):
            for g in goods_of(self.bundle_of(a.name)):
                owner[g] = pos
        return owner


def validate_allocation(inst: Instance, X: Allocation) -> bool:
    if len(X.bundles) != inst.n:
        return False
    seen = 0
    for b in X.bundles:
        if not _is_int(b) or b < 0 or b & seen:
            return False
        seen |= b
    if seen != inst.all_goods:
        return False
    if set(X.assignment) != set(inst.names):
        return False
    return sorted(X.assignment.values()) == list(range(inst.n))
