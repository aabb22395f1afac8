"""Command-line front end (``efx``).

Exit codes: 0 success, 1 negative answer (not EFX, predicate failed, hunt
failure), 2 unreadable or invalid input, 3 instance outside the solver's
class, 4 internal invariant breach, 5 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass

from . import oracle
from .envy import find_strong_envy
from .files import allocation_to_dict, dump_json, instance_to_dict, load_allocation, load_instance
from .generate import random_instance
from .model import CapExceeded, InstanceError, is_monotone, is_nondegenerate, validate_allocation
from .solver import InvariantError, StructureError, solve

log = logging.getLogger("efx")

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_STRUCTURE, EXIT_INVARIANT, EXIT_CAP = 0, 1, 2, 3, 4, 5


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    pr_strategy: str = "local"
    auto_perturb: bool = False
    trace_path: str | None = None
    oracle_cap: int = oracle.ORACLE_CAP


def _err(msg: str) -> None:
    print(f"efx: {msg}", file=sys.stderr)


def cmd_solve(input_path: str, config: RunConfig, output_path: str | None = None) -> int:
    inst = load_instance(input_path)
    result = solve(inst, perturb=config.auto_perturb, pr=config.pr_strategy)
    X = result.allocation
    if find_strong_envy(inst, X) is not None:
        raise InvariantError("solver output is not EFX under the original valuations")
    out = allocation_to_dict(X)
    out.update(certified_efx=True, perturbed=config.auto_perturb, seed=config.seed)
    text = dump_json(out, output_path)
    if output_path is None:
        sys.stdout.write(text)
    if config.trace_path:
        with open(config.trace_path, "w") as fh:
            for ev in result.trace:
                fh.write(json.dumps(ev.to_dict()) + "\n")
    return EXIT_OK


def cmd_verify(input_path: str, allocation_path: str) -> int:
    inst = load_instance(input_path)
    X = load_allocation(allocation_path, inst.m)
    if not validate_allocation(inst, X):
        _err("allocation is not a complete assignment of this instance's goods")
        return EXIT_INPUT
    witness = find_strong_envy(inst, X)
    if witness is None:
        print("EFX")
        return EXIT_OK
    a, b, g = witness
    print(f"NOT EFX: agent {a} strongly envies agent {b} (even without good {g})")
    return EXIT_NO


def cmd_gen(n: int, m: int, classes: int, max_value: int, seed: int, output_path: str | None, tables: bool = False) -> int:
    try:
        inst = random_instance(n, m, classes, max_value, seed, tables)
    except ValueError as exc:
        raise InstanceError(str(exc)) from exc
    text = dump_json(instance_to_dict(inst), output_path)
    if output_path is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(input_path: str, which: str) -> int:
    inst = load_instance(input_path)
    predicate = {
        "mms": lambda v: oracle.is_mms_feasible(v),
        "monotone": is_monotone,
        "nondegenerate": is_nondegenerate,
    }[which]
    all_ok = True
    for vid, v in inst.valuations.items():
        ok = predicate(v)
        all_ok &= ok
        print(f"{vid}: {which} {'yes' if ok else 'no'}")
    return EXIT_OK if all_ok else EXIT_NO


def cmd_hunt(n: int, m: int, max_value: int, count: int, seed: int, config: RunConfig, tables: bool = False) -> int:
    labels: Counter = Counter()
    failures = []
    for i in range(count):
        inst_seed = seed + i
        inst = random_instance(n, m, 3, max_value, inst_seed, tables)
        report = oracle.cross_validate(inst, perturb=True, pr=config.pr_strategy, cap=config.oracle_cap)
        labels.update(report.labels)
        if not report.ok:
            failures.append(inst_seed)
            _err(f"seed {inst_seed}: " + "; ".join(report.problems))
    summary = {
        "n": n,
        "m": m,
        "count": count,
        "seed": seed,
        "failures": failures,
        "case_labels": dict(sorted(labels.items())),
    }
    sys.stdout.write(dump_json(summary))
    if failures:
        _err(f"{len(failures)} failure(s); reproduce with --seed {failures[0]} --count 1")
        return EXIT_NO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="efx", description="EFX allocations when n-2 agents share a valuation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute a certified EFX allocation")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--perturb", action="store_true", help="tie-break degenerate valuations first")
    s.add_argument("--pr", choices=("brute", "local"), default="local")
    s.add_argument("--trace")
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("verify", help="check an allocation for EFX")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-a", "--allocation", required=True)

    s = sub.add_parser("gen", help="write a seeded random instance")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--classes", type=int, choices=(1, 2, 3), default=3)
    s.add_argument("--max-value", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tables", action="store_true", help="table valuations for the two distinguished agents")
    s.add_argument("-o", "--output")

    s = sub.add_parser("check", help="test valuation properties")
    s.add_argument("-i", "--input", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--mms", dest="which", action="store_const", const="mms")
    g.add_argument("--monotone", dest="which", action="store_const", const="monotone")
    g.add_argument("--nondegenerate", dest="which", action="store_const", const="nondegenerate")

    s = sub.add_parser("hunt", help="cross-validate the solver on seeded random instances")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-value", type=int, default=100)
    s.add_argument("--tables", action="store_true")
    s.add_argument("--pr", choices=("brute", "local"), default="local")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        if args.command == "solve":
            cfg = RunConfig(seed=args.seed, pr_strategy=args.pr, auto_perturb=args.perturb, trace_path=args.trace)
            return cmd_solve(args.input, cfg, args.output)
        if args.command == "verify":
            return cmd_verify(args.input, args.allocation)
        if args.command == "gen":
            return cmd_gen(args.n, args.m, args.classes, args.max_value, args.seed, args.output, args.tables)
        if args.command == "check":
            return cmd_check(args.input, args.which)
        if args.command == "hunt":
            cfg = RunConfig(seed=args.seed, pr_strategy=args.pr)
            return cmd_hunt(args.n, args.m, args.max_value, args.count, args.seed, cfg, args.tables)
    except InstanceError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except StructureError as exc:
        _err(str(exc))
        return EXIT_STRUCTURE
    except InvariantError as exc:
        _err(f"internal invariant breach: {exc}")
        return EXIT_INVARIANT
    except CapExceeded as exc:
        _err(str(exc))
        return EXIT_CAP
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
