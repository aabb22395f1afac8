"""EFX allocations when all but two agents share one valuation.

The shared-valuation agents are the "a" agents; the other two are ``b`` and
``c`` (``c`` must have an MMS-feasible valuation). The solver keeps an
*almost EFX-feasible* state: bundles ``0..n-2`` are sorted ascending under
``v_a`` and each is EFX-feasible under ``v_a`` against every other bundle,
while the last bundle is EFX-feasible for the anchor agent (``b`` or ``c``).
Each step either finishes with an EFX allocation or produces a new state whose
potential (the ``v_a``-value of the poorest of the first ``n-1`` bundles) is
strictly larger. All consistency conditions are re-checked at run time and a
breach raises :class:`InvariantError`.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .envy import (
    best_removal_good,
    feasible_set,
    is_efx,
    is_efx_feasible,
    minimally_envied_subset,
    strongly_envies,
)
from .model import Allocation, Instance, Valuation, goods_of, is_nondegenerate
from .model import perturb as perturb_instance
from .oracle import is_mms_feasible
from .pr import run_pr

logger = logging.getLogger(__name__)

CASE_LABELS = (
    "INIT",
    "DONE-ALT",
    "C1.1",
    "C1.2",
    "C1.2-PR",
    "C2.1",
    "C2.2-PR",
    "C2.3",
    "C2.3-MIRROR",
    "C2.3-PR",
)
TERMINAL_LABELS = frozenset({"DONE-ALT", "C2.1"})


class StructureError(ValueError):
    """The instance is outside the class the solver handles."""


class InvariantError(AssertionError):
    """An internal consistency check failed; this is a bug, never an input problem."""


@dataclass(frozen=True)
class Roles:
    inst: Instance
    va: Valuation
    vb: Valuation
    vc: Valuation
    a_agents: tuple[str, ...]
    b_agent: str
    c_agent: str

    @property
    def n(self) -> int:
        return self.inst.n

    def anchor_valuation(self, anchor: str) -> Valuation:
        return self.vb if anchor == "B" else self.vc


@dataclass(frozen=True)
class SolverState:
    bundles: tuple[int, ...]
    anchor: str
    phi: int


@dataclass(frozen=True)
class TraceEvent:
    step: int
    case_label: str
    phi_before: int | None
    phi_after: int | None
    anchor_after: str | None
    moved: str = ""

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "case_label": self.case_label,
            "phi_before": self.phi_before,
            "phi_after": self.phi_after,
            "anchor_after": self.anchor_after,
            "moved": self.moved,
        }


@dataclass(frozen=True)
class StepResult:
    event: TraceEvent
    state: SolverState | None = None
    allocation: Allocation | None = None


@dataclass
class SolveResult:
    allocation: Allocation
    trace: list[TraceEvent] = field(default_factory=list)
    working: Instance | None = None

    def __iter__(self):
        yield self.allocation
        yield self.trace


def _fmt(mask: int) -> str:
    return "{" + ",".join(map(str, goods_of(mask))) + "}"


def _mms_ok(v: Valuation) -> bool:
    return v.kind == "additive" or is_mms_feasible(v)


def assign_roles(inst: Instance) -> Roles:
    """Pick the shared class and the ``b``/``c`` agents.

    The shared class is the most common valuation id (first seen wins ties);
    the first ``n-2`` of its agents become the a-agents. Of the two remaining
    agents, the later one is ``c`` unless only the earlier one is MMS-feasible.
    """
    n = inst.n
    if n < 3:
        raise StructureError("role assignment needs at least three agents")
    counts = Counter(a.valuation for a in inst.agents)
    first_seen = {}
    for i, a in enumerate(inst.agents):
        first_seen.setdefault(a.valuation, i)
    candidates = sorted((vid for vid, c in counts.items() if c >= n - 2), key=lambda vid: (-counts[vid], first_seen[vid]))
    if not candidates:
        raise StructureError(f"no valuation is shared by at least n-2 = {n - 2} agents")
    for vid in candidates:
        shared = [a.name for a in inst.agents if a.valuation == vid][: n - 2]
        extras = [a for a in inst.agents if a.name not in shared]
        first, second = extras
        for b, c in ((first, second), (second, first)):
            if _mms_ok(inst.valuations[c.valuation]):
                return Roles(
                    inst,
                    inst.valuations[vid],
                    inst.valuations[b.valuation],
                    inst.valuations[c.valuation],
                    tuple(shared),
                    b.name,
                    c.name,
                )
    raise StructureError("neither non-shared agent has an MMS-feasible valuation")


def potential(state: SolverState, va: Valuation | None = None) -> int:
    """Minimum ``v_a``-value over the first ``n-1`` bundles.

    Without ``va`` the cached value on the state is returned.
    """
    if va is None:
        return state.phi
    return min(va(b) for b in state.bundles[:-1])


def _make_state(roles: Roles, first: Sequence[int], last: int, anchor: str) -> SolverState:
    va = roles.va
    first = sorted(first, key=va)
    return SolverState(tuple(first) + (last,), anchor, va(first[0]))


def _pr_then_c_picks(roles: Roles, bundles: Sequence[int], strategy: str) -> SolverState:
    parts = run_pr(bundles, roles.va, strategy)
    vc = roles.vc
    pick = max(range(len(parts)), key=lambda i: (vc(parts[i]), -i))
    rest = [p for i, p in enumerate(parts) if i != pick]
    return _make_state(roles, rest, parts[pick], "C")


def initial_state(roles: Roles, strategy: str = "local") -> SolverState:
    """PR on the all-goods partition under ``v_a``; ``c`` takes its favourite part last."""
    bundles = [roles.inst.all_goods] + [0] * (roles.n - 1)
    return _pr_then_c_picks(roles, bundles, strategy)


def check_almost_feasible(roles: Roles, state: SolverState) -> bool:
    X = state.bundles
    va = roles.va
    for i in range(len(X) - 1):
        if not all(is_efx_feasible(va, X[i], X[j]) for j in range(len(X)) if j != i):
            return False
    v_anchor = roles.anchor_valuation(state.anchor)
    last = X[-1]
    return all(is_efx_feasible(v_anchor, last, X[j]) for j in range(len(X) - 1))


def _allocation(roles: Roles, bundles: Sequence[int], b_index: int, c_index: int) -> Allocation:
    assignment = {roles.b_agent: b_index, roles.c_agent: c_index}
    others = [i for i in range(len(bundles)) if i not in (b_index, c_index)]
    assignment.update(zip(roles.a_agents, others))
    X = Allocation(tuple(bundles), assignment)
    if not is_efx(roles.inst, X):
        raise InvariantError(f"produced allocation is not EFX: {X}")
    return X


def try_terminate(roles: Roles, state: SolverState) -> Allocation | None:
    """Finish if ``b`` and ``c`` can hold the last bundle and some other bundle.

    Returns None exactly when the last bundle is the only EFX-feasible bundle
    for both ``b`` and ``c``.
    """
    X = state.bundles
    last = len(X) - 1
    fb = feasible_set(X, roles.vb)
    fc = feasible_set(X, roles.vc)
    # (holder of X_last, its feasible set, other agent's feasible set)
    rules = [("C", fc, fb), ("B", fb, fc)]
    if state.anchor == "B":
        rules.reverse()
    for holder, own, other in rules:
        alt = sorted(k for k in other if k != last)
        if last in own and alt:
            if holder == "C":
                return _allocation(roles, X, alt[0], last)
            return _allocation(roles, X, last, alt[0])
    if fb != {last} or fc != {last}:
        raise InvariantError(f"unexpected feasible sets b={fb} c={fc}")
    return None


def _check_removal_bound(v: Valuation, X: Sequence[int], g: int, who: str) -> None:
    rest = max(v(b) for b in X[:-1])
    if not v(X[-1] & ~(1 << g)) > rest:
        raise InvariantError(f"last bundle minus its best-removal good is not {who}'s strict favourite")


def step(roles: Roles, state: SolverState, strategy: str = "local", step_no: int = 0) -> StepResult:
    """One move from a state on which :func:`try_terminate` found nothing."""
    X = state.bundles
    vb, vc = roles.vb, roles.vc
    last = X[-1]
    gb = best_removal_good(vb, last)
    gc = best_removal_good(vc, last)
    _check_removal_bound(vb, X, gb, "b")
    _check_removal_bound(vc, X, gc, "c")

    X1 = X[0]
    if vb(last & ~(1 << gb)) > vb(X1 | (1 << gb)):
        label, nxt, moved = _case1(roles, state, gb, "B", strategy)
    elif vc(last & ~(1 << gc)) > vc(X1 | (1 << gc)):
        label, nxt, moved = _case1(roles, state, gc, "C", strategy)
    else:
        label, nxt, moved = _case2(roles, state, gb, gc, strategy)

    if isinstance(nxt, Allocation):
        return StepResult(TraceEvent(step_no, label, state.phi, None, None, moved), allocation=nxt)

    if not check_almost_feasible(roles, nxt):
        raise InvariantError(f"{label}: next state is not almost EFX-feasible")
    if nxt.phi != potential(nxt, roles.va) or not nxt.phi > state.phi:
        raise InvariantError(f"{label}: potential did not strictly increase ({state.phi} -> {nxt.phi})")
    return StepResult(TraceEvent(step_no, label, state.phi, nxt.phi, nxt.anchor, moved), state=nxt)


def _case1(roles: Roles, state: SolverState, g: int, anchor: str, strategy: str):
    va = roles.va
    X = state.bundles
    bit = 1 << g
    grown = X[0] | bit
    shrunk = X[-1] & ~bit
    middle = list(X[1:-1])
    moved = f"good {g} from last to first ({'b' if anchor == 'B' else 'c'} branch)"
    if va(grown) < va(X[1]):
        return "C1.1", _make_state(roles, [grown] + middle, shrunk, anchor), moved

    S = minimally_envied_subset(va, X[1], grown)
    Z = grown & ~S
    new_last = shrunk | Z
    first = [S] + middle
    moved += f"; returned {_fmt(Z)} to last"
    if all(is_efx_feasible(va, B, new_last) for B in first):
        return "C1.2", _make_state(roles, first, new_last, anchor), moved
    return "C1.2-PR", _pr_then_c_picks(roles, first + [new_last], strategy), moved


def _case2(roles: Roles, state: SolverState, gb: int, gc: int, strategy: str):
    va, vb, vc = roles.va, roles.vb, roles.vc
    X = state.bundles
    X1, last = X[0], X[-1]
    Y = run_pr([X1 | (1 << gb), last & ~(1 << gb)], vb, strategy)
    if vc(Y[0]) > vc(Y[1]):
        y_c, y_b = Y[0], Y[1]
    else:
        y_c, y_b = Y[1], Y[0]
    bound = min(vc(X1 | (1 << gc)), vc(last & ~(1 << gc)))
    if not vc(y_c) >= bound:
        raise InvariantError("c's pick after the two-way split fell below its maximin bound")

    old = list(X[1:-1])
    poorest = old[0]
    envy_b = strongly_envies(va, poorest, y_b).strongly_envies
    envy_c = strongly_envies(va, poorest, y_c).strongly_envies
    moved = f"split {_fmt(X1 | last)} into b:{_fmt(y_b)} c:{_fmt(y_c)}"

    if not envy_b and not envy_c:
        bundles = old + [y_b, y_c]
        n = len(bundles)
        return "C2.1", _allocation(roles, bundles, n - 2, n - 1), moved
    if envy_b and envy_c:
        return "C2.2-PR", _pr_then_c_picks(roles, old + [y_b, y_c], strategy), moved

    if envy_b:
        label, anchor, shrink, keep = "C2.3", "C", y_b, y_c
    else:
        label, anchor, shrink, keep = "C2.3-MIRROR", "B", y_c, y_b
    Yp = minimally_envied_subset(va, poorest, shrink)
    new_last = keep | (shrink & ~Yp)
    first = old + [Yp]
    moved += f"; shrank to {_fmt(Yp)}, last becomes {_fmt(new_last)}"
    if all(is_efx_feasible(va, B, new_last) for B in first):
        return label, _make_state(roles, first, new_last, anchor), moved
    if label == "C2.3-MIRROR":
        moved += " (mirror)"
    return "C2.3-PR", _pr_then_c_picks(roles, first + [new_last], strategy), moved


def _check_inputs(inst: Instance) -> None:
    for vid, v in inst.valuations.items():
        if not v.monotone:
            raise StructureError(f"valuation {vid!r} is not monotone")


def _short_circuit(inst: Instance, strategy: str) -> Allocation | None:
    n, m = inst.n, inst.m
    names = inst.names
    if m < n:
        bundles = [1 << i if i < m else 0 for i in range(n)]
        return Allocation(bundles, {name: i for i, name in enumerate(names)})
    if n == 1:
        return Allocation((inst.all_goods,), {names[0]: 0})
    if n == 2:
        parts = run_pr([inst.all_goods, 0], inst.valuation_of(0), strategy)
        v2 = inst.valuation_of(1)
        pick = 0 if v2(parts[0]) > v2(parts[1]) else 1
        return Allocation(parts, {names[0]: 1 - pick, names[1]: pick})
    return None


def solve(
    inst: Instance,
    *,
    perturb: bool = False,
    pr: str = "local",
    max_steps: int | None = None,
) -> SolveResult:
    """EFX allocation for ``inst`` together with the step trace.

    ``perturb`` replaces the valuations by a non-degenerate
    perturbation first; the returned allocation is always re-verified against
    the original valuations. Unpacks as ``allocation, trace``.
    """
    _check_inputs(inst)
    if perturb:
        work = perturb_instance(inst)
    else:
        for vid, v in inst.valuations.items():
            if not is_nondegenerate(v):
                raise StructureError(f"valuation {vid!r} is degenerate; enable perturbation")
        work = inst

    alloc = _short_circuit(work, pr)
    trace: list[TraceEvent] = []
    if alloc is None:
        roles = assign_roles(work)
        state = initial_state(roles, pr)
        if not check_almost_feasible(roles, state):
            raise InvariantError("initial state is not almost EFX-feasible")
        trace.append(TraceEvent(0, "INIT", None, state.phi, state.anchor, "PR on all goods under v_a"))
        limit = (1 << work.m) if max_steps is None else max_steps
        for k in range(1, limit + 2):
            alloc = try_terminate(roles, state)
            if alloc is not None:
                trace.append(TraceEvent(k, "DONE-ALT", state.phi, None, None, "b and c hold distinct feasible bundles"))
                break
            if k > limit:
                raise InvariantError(f"no termination within {limit} steps")
            res = step(roles, state, pr, k)
            trace.append(res.event)
            logger.debug("step %d %s phi %s -> %s", k, res.event.case_label, res.event.phi_before, res.event.phi_after)
            if res.allocation is not None:
                alloc = res.allocation
                break
            state = res.state

    if not is_efx(work, alloc):
        raise InvariantError("final allocation is not EFX under the working valuations")
    if not is_efx(inst, alloc):
        raise InvariantError("final allocation is not EFX under the original valuations")
    return SolveResult(alloc, trace, work)
