"""JSON instance and allocation files.

Instance::

    {"m": 3,
     "agents": [{"name": "ann", "valuation": "A"}, ...],
     "valuations": {"A": {"type": "additive", "values": [1, 2, 4]},
                    "B": {"type": "table", "values": [0, ...]}}}

Table values are indexed by bitmask (bit ``k`` = good ``k``).

Allocation::

    {"bundles": [[0, 2], [1]], "assignment": {"ann": 0, "bob": 1}}
"""
from __future__ import annotations

import json
from pathlib import Path

from .model import Agent, Allocation, Instance, InstanceError, Valuation, bundle, goods_of


def instance_from_dict(data: dict) -> Instance:
    try:
        vals = {}
        for vid, spec in data["valuations"].items():
            kind = spec["type"]
            if kind not in ("additive", "table"):
                raise InstanceError(f"valuation {vid!r}: unknown type {kind!r}")
            vals[str(vid)] = Valuation(kind, tuple(spec["values"]))
        agents = tuple(Agent(str(a["name"]), str(a["valuation"])) for a in data["agents"])
        return Instance(data["m"], agents, vals)
    except (KeyError, TypeError, AttributeError) as exc:
        raise InstanceError(f"malformed instance: {exc!r}") from exc


def instance_to_dict(inst: Instance) -> dict:
    return {
        "m": inst.m,
        "agents": [{"name": a.name, "valuation": a.valuation} for a in inst.agents],
        "valuations": {vid: {"type": v.kind, "values": list(v.values)} for vid, v in inst.valuations.items()},
    }


def allocation_from_dict(data: dict, m: int | None = None) -> Allocation:
    try:
        bundles = []
        for goods in data["bundles"]:
            goods = list(goods)
            if any(not isinstance(g, int) or g < 0 or (m is not None and g >= m) for g in goods):
                raise InstanceError(f"bad good index in {goods}")
            if len(set(goods)) != len(goods):
                raise InstanceError(f"duplicate good in {goods}")
            bundles.append(bundle(goods))
        return Allocation(tuple(bundles), {str(k): int(v) for k, v in data["assignment"].items()})
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"malformed allocation: {exc!r}") from exc


def allocation_to_dict(X: Allocation) -> dict:
    return {"bundles": [goods_of(b) for b in X.bundles], "assignment": dict(X.assignment)}


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc


def load_instance(path) -> Instance:
    return instance_from_dict(_read_json(path))


def load_allocation(path, m: int | None = None) -> Allocation:
    return allocation_from_dict(_read_json(path), m)


def dump_json(data: dict, path=None) -> str:
    text = json.dumps(data, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
