import itertools

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from efx import (
    Agent,
    Allocation,
    Instance,
    Valuation,
    best_removal_good,
    bundle,
    feasible_set,
    is_efx,
    is_efx_feasible,
    minimally_envied_subset,
    strongly_envies,
)
from efx.model import InstanceError, goods_of, is_nondegenerate


def subsets(mask):
    """All submasks of ``mask`` (brute force, independent of the library)."""
    goods = goods_of(mask)
    for r in range(len(goods) + 1):
        for combo in itertools.combinations(goods, r):
            yield sum(1 << g for g in combo)


V543 = Valuation.additive([5, 3, 4])


def test_envy_without_strong_envy():
    rep = strongly_envies(V543, bundle([0]), bundle([1, 2]))
    assert rep.envies and not rep.strongly_envies and rep.witness_good is None


def test_strong_envy_from_empty_bundle():
    rep = strongly_envies(V543, 0, bundle([1, 2]))
    assert rep.strongly_envies and rep.witness_good == 1


def test_singleton_never_strongly_envied():
    for S in (0, bundle([0]), bundle([1])):
        assert not strongly_envies(V543, S, bundle([2])).strongly_envies


def test_efx_feasible_examples():
    assert is_efx_feasible(V543, bundle([0]), bundle([1, 2]))
    assert not is_efx_feasible(V543, 0, bundle([1]))
    assert is_efx_feasible(V543, 0, 0)


def test_feasible_set_examples():
    v = Valuation.additive([1, 2, 4])
    assert feasible_set([bundle([0]), bundle([1]), bundle([2])], v) == {0, 1, 2}
    assert feasible_set([bundle([0, 1]), bundle([2])], v) == {0, 1}
    assert feasible_set([bundle([0, 1, 2])], v) == {0}


def _pair(values, bundles):
    inst = Instance(len(values), (Agent("x", "A"), Agent("y", "A")), {"A": Valuation.additive(values)})
    return inst, Allocation(bundles, {"x": 0, "y": 1})


def test_is_efx_examples():
    inst, X = _pair([5], (0, 0b1))
    assert is_efx(inst, X)
    inst, X = _pair([10, 1], (0b11, 0))
    assert not is_efx(inst, X)


def test_is_efx_identical_leximin_output():
    from efx import pr_bruteforce

    v = Valuation.additive([3, 1, 4, 1, 5])
    inst = Instance(5, tuple(Agent(str(i), "A") for i in range(3)), {"A": v})
    parts = pr_bruteforce(inst.all_goods, v, 3)
    assert is_efx(inst, Allocation(parts, {str(i): i for i in range(3)}))


def test_is_efx_rejects_invalid():
    inst, X = _pair([5, 5], (0b01, 0b01))
    with pytest.raises(InstanceError):
        is_efx(inst, X)


def test_minimally_envied_subset_example():
    # own good 0 worth 5; T = goods worth 4, 3, 2
    v = Valuation.additive([5, 4, 3, 2])
    assert minimally_envied_subset(v, bundle([0]), bundle([1, 2, 3])) == bundle([1, 2])


def test_minimally_envied_subset_trivial_cases():
    v = Valuation.additive([5, 7])
    assert minimally_envied_subset(v, 0, bundle([1])) == bundle([1])
    assert minimally_envied_subset(v, bundle([0]), bundle([1])) == bundle([1])
    with pytest.raises(ValueError):
        minimally_envied_subset(v, bundle([1]), bundle([0]))


def test_best_removal_examples():
    assert best_removal_good(Valuation.additive([2, 3, 5]), 0b111) == 0
    assert best_removal_good(Valuation.additive([2, 3, 5]), bundle([2])) == 2
    assert best_removal_good(Valuation.table([0, 6, 5, 10]), 0b11) == 1
    with pytest.raises(ValueError):
        best_removal_good(Valuation.additive([2]), 0)


def _is_minimally_envied(v, own, T, S):
    base = v(own)
    return (S & ~T) == 0 and v(S) > base and all(v(S & ~(1 << h)) <= base for h in goods_of(S))


values12 = st.lists(st.integers(1, 40), min_size=2, max_size=12)


@settings(max_examples=150, deadline=None)
@given(values12, st.data())
def test_minimally_envied_subset_matches_exhaustive_definition(vals, data):
    m = len(vals)
    v = Valuation.additive(vals)
    own = data.draw(st.integers(0, (1 << m) - 1))
    T = ((1 << m) - 1) & ~own
    assume(v(own) < v(T))
    S = minimally_envied_subset(v, own, T)
    assert _is_minimally_envied(v, own, T, S)
    # and it lies in the set of all qualifying subsets found by enumeration
    qualifying = {X for X in subsets(T) if _is_minimally_envied(v, own, T, X)}
    assert S in qualifying


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 30), min_size=7, max_size=7), st.data())
def test_minimally_envied_subset_on_monotone_tables(raw, data):
    # monotone table on 3 goods via running max over subsets
    t = [0] + raw
    for g in range(3):
        for s in range(8):
            if s >> g & 1:
                t[s] = max(t[s], t[s ^ (1 << g)])
    v = Valuation.table(t)
    own = data.draw(st.integers(0, 7))
    T = 7 & ~own
    assume(v(own) < v(T))
    assert _is_minimally_envied(v, own, T, minimally_envied_subset(v, own, T))


@given(st.lists(st.integers(1, 50), min_size=1, max_size=8), st.data())
def test_best_removal_is_cheapest_good_for_additive(vals, data):
    m = len(vals)
    T = data.draw(st.integers(1, (1 << m) - 1))
    g = best_removal_good(Valuation.additive(vals), T)
    assert g == min(goods_of(T), key=lambda x: (vals[x], x))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=2, max_size=6), st.data())
def test_feasible_implies_no_strong_envy(vals, data):
    m = len(vals)
    v = Valuation.additive([x * (1 << m) + (1 << g) for g, x in enumerate(vals)])
    S = data.draw(st.integers(0, (1 << m) - 1))
    T = data.draw(st.integers(0, (1 << m) - 1)) & ~S
    feasible = is_efx_feasible(v, S, T)
    strong = strongly_envies(v, S, T).strongly_envies
    if feasible:
        assert not strong
    elif S:
        # non-degenerate v and a non-empty own bundle: the two notions agree
        assert strong


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=3, max_size=7), st.integers(2, 4), st.data())
def test_feasible_set_nonempty(vals, k, data):
    m = len(vals)
    v = Valuation.additive([x * (1 << m) + (1 << g) for g, x in enumerate(vals)])
    assert is_nondegenerate(v)
    owners = data.draw(st.lists(st.integers(0, k - 1), min_size=m, max_size=m))
    bundles = [0] * k
    for g, j in enumerate(owners):
        bundles[j] |= 1 << g
    assume(all(bundles))
    fs = feasible_set(bundles, v)
    assert fs
    assert max(range(k), key=lambda i: v(bundles[i])) in fs
