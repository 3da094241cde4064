"""Guess-refinement allocator: contracts, invariants, iteration bounds."""

from fractions import Fraction

import pytest

from bidfair.negatives import gen_random_submodular
from bidfair.shares import aps_exact, mms_exact
from bidfair.wrapper import (
    ContractViolation,
    call_budget,
    conditional_allocate,
    default_epsilon,
    guarantee_rho,
    unconditional_allocate,
    value_spread_bound,
)


def aps_shares(inst):
    return {
        a.id: aps_exact(a.valuation, a.entitlement, inst.items).value for a in inst.agents
    }


def mms_shares(inst):
    n = len(inst.agents)
    return {a.id: mms_exact(a.valuation, n, inst.items).value for a in inst.agents}


def test_zero_guesses_trivially_satisfied():
    inst = gen_random_submodular(1, 3, 6)
    guesses = {a: Fraction(0) for a in inst.agent_ids}
    alloc, _ = conditional_allocate(inst, guesses)
    assert set(alloc) == set(inst.agent_ids)


def test_exact_guesses_reach_guaranteed_fractions():
    for seed in (2, 3, 4):
        inst = gen_random_submodular(seed, 3, 7, entitlements="random")
        shares = aps_shares(inst)
        alloc, _ = conditional_allocate(inst, shares, mode="aps")
        for a in inst.agents:
            rho = guarantee_rho("aps", a.entitlement)
            assert a.valuation.value(alloc[a.id]) >= rho * shares[a.id]


def test_one_inflated_guess_leaves_others_protected():
    inst = gen_random_submodular(5, 3, 7)
    shares = aps_shares(inst)
    inflated = dict(shares)
    victim = inst.agent_ids[0]
    inflated[victim] = 2 * shares[victim] + 1
    alloc, _ = conditional_allocate(inst, inflated, mode="aps")
    for a in inst.agents:
        if a.id == victim:
            continue
        rho = guarantee_rho("aps", a.entitlement)
        assert a.valuation.value(alloc[a.id]) >= rho * shares[a.id]


def test_mms_mode_requires_equal_entitlements():
    inst = gen_random_submodular(6, 3, 6, entitlements="random")
    if inst.has_equal_entitlements():
        pytest.skip("random draw happened to be equal")
    with pytest.raises(ValueError):
        conditional_allocate(inst, {a: Fraction(1) for a in inst.agent_ids}, mode="mms")


def test_unconditional_guarantee_and_iteration_bound():
    eps = Fraction(1, 10)
    for seed, mode, kind in ((7, "aps", "random"), (8, "mms", "equal"), (9, "aps", "equal")):
        inst = gen_random_submodular(seed, 3, 7, entitlements=kind)
        shares = aps_shares(inst) if mode == "aps" else mms_shares(inst)
        seen = []
        outcome = unconditional_allocate(
            inst, eps, mode=mode, exact_shares=shares,
            on_iteration=lambda i, guesses, alloc: seen.append(dict(guesses)),
        )
        assert outcome.calls <= call_budget(len(inst.agents), eps, value_spread_bound(inst))
        for a in inst.agents:
            rho = guarantee_rho(mode, a.entitlement)
            value = a.valuation.value(outcome.allocation[a.id])
            assert value >= (1 - eps) * rho * shares[a.id]
        # guesses never dipped below (1-eps) of the true share at any iteration
        for guesses in seen:
            for agent_id, guess in guesses.items():
                assert guess >= (1 - eps) * shares[agent_id]


def test_guesses_start_at_total_value_and_decay_geometrically():
    inst = gen_random_submodular(10, 2, 6)
    eps = Fraction(1, 4)
    trace = []
    unconditional_allocate(
        inst, eps, mode="aps",
        on_iteration=lambda i, guesses, alloc: trace.append(guesses),
    )
    totals = {a.id: a.valuation.value(inst.item_set) for a in inst.agents}
    assert trace[0] == totals
    for agent_id in inst.agent_ids:
        values = [g[agent_id] for g in trace]
        for prev, cur in zip(values, values[1:]):
            assert cur == prev or cur == (1 - eps) * prev


def test_contract_violation_detected_with_inflated_oracle():
    # feeding impossibly large "exact" shares must trip the breach detector
    inst = gen_random_submodular(11, 2, 6)
    fake = {a.id: a.valuation.value(inst.item_set) * 100 for a in inst.agents}
    with pytest.raises(ContractViolation) as info:
        unconditional_allocate(inst, Fraction(1, 2), mode="aps", exact_shares=fake)
    assert info.value.transcript is not None


def test_spread_bound_and_epsilon_defaults():
    inst = gen_random_submodular(12, 3, 6)
    spread = value_spread_bound(inst)
    for a in inst.agents:
        total = a.valuation.value(inst.item_set)
        for e in inst.items:
            single = a.valuation.value(frozenset([e]))
            if single > 0:
                assert total / single <= spread
    # the standard-mode default keeps agents with positive shares at >= 1/3
    m = len(inst.items)
    eps = default_epsilon("aps", inst)
    assert eps == Fraction(2, 3 * m)
    for denom in range(1, m + 1):
        b = Fraction(1, denom)  # any entitlement >= 1/m
        assert (1 - eps) * guarantee_rho("aps", b) >= Fraction(1, 3)
    assert default_epsilon("mms", inst) == Fraction(1, 3 * len(inst.agents))


def test_epsilon_bounds_validated():
    inst = gen_random_submodular(13, 2, 5)
    with pytest.raises(ValueError):
        unconditional_allocate(inst, Fraction(0))
    with pytest.raises(ValueError):
        unconditional_allocate(inst, Fraction(3, 2))


def test_single_call_when_initial_guesses_succeed():
    # one agent valuing everything equally: the opening guess v(M) is met
    from bidfair.valuations import AdditiveValuation
    from bidfair.model import make_instance

    v = AdditiveValuation({"e1": 1, "e2": 1})
    inst = make_instance(["e1", "e2"], [("solo", 1, v)])
    outcome = unconditional_allocate(inst, Fraction(1, 10), mode="aps")
    assert outcome.calls == 1
    assert outcome.guesses["solo"] == 2
