"""Bidding strategies for the budgeted bidding game.

The share-proportional strategies receive the share value (exact or guessed)
as an input rather than computing it, so the same code serves both direct
play with oracle shares and the guess-refinement allocator.  Strategies see
the game only through public state and their own value oracle.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .engine import PublicState, Strategy, StrategyError
from .valuations import ValuationOracle, truncate_valuation

RhoLike = Fraction | int | None


def default_rho(entitlement: Fraction) -> Fraction:
    """Guarantee-optimal aggressiveness for a budget-share entitlement: 1/(3-2b)."""
    return 1 / (3 - 2 * Fraction(entitlement))


def _best_marginal(
    v: ValuationOracle, held: frozenset[str], remaining: Sequence[str]
) -> tuple[str | None, Fraction]:
    """Item of maximal marginal value, earliest in canonical order on ties."""
    best_item = None
    best = Fraction(0)
    base_value = v.value(held)
    for item in sorted(remaining):
        gain = v.value(held | {item}) - base_value
        if best_item is None or gain > best:
            best_item = item
            best = gain
    return best_item, best


def _best_singleton(
    v: ValuationOracle, remaining: Sequence[str]
) -> tuple[str | None, Fraction]:
    best_item = None
    best = Fraction(0)
    for item in sorted(remaining):
        val = v.value(frozenset([item]))
        if best_item is None or val > best:
            best_item = item
            best = val
    return best_item, best


class ZeroBidder(Strategy):
    """Always bids zero; picks the canonically first item when forced to win."""

    def bid(self, state: PublicState) -> Fraction:
        return Fraction(0)

    def pick(self, state: PublicState) -> Sequence[str]:
        return [sorted(state.remaining)[0]]


class ProportionalBidder(Strategy):
    """Two-phase share-proportional bidding for a submodular valuation.

    The valuation is truncated at the share value.  While some unallocated
    item is *large* (truncated value above 2*rho*share) the agent bids her
    entire remaining budget and, on a win, grabs the most valuable item,
    exhausting her budget.  Once no large item remains she bids

        (1 / 2 rho) * (b / share) * (highest remaining marginal value),

    capped at her remaining budget, and on a win takes an item of maximal
    marginal value.  Renormalizing the post-large-phase state into a fresh
    instance (budgets scaled by 1/gamma into entitlements, bids scaled back
    by gamma) leaves these bid amounts unchanged - the two scalings cancel -
    so the strategy applies the same formula throughout.

    ``budget_capped_early`` records whether the budget cap ever bound a
    formula bid while the agent's held value was still below rho*share; the
    bid-formula invariants imply this never happens, and tests assert it.
    """

    def __init__(
        self,
        valuation: ValuationOracle,
        entitlement: Fraction | int,
        share: Fraction | int,
        rho: RhoLike = None,
    ) -> None:
        self.entitlement = Fraction(entitlement)
        self.share = Fraction(share)
        if self.share < 0:
            raise ValueError("share must be nonnegative")
        self.rho = default_rho(self.entitlement) if rho is None else Fraction(rho)
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        self.valuation = (
            truncate_valuation(valuation, self.share) if self.share > 0 else valuation
        )
        self.budget_capped_early = False

    def _large_threshold(self) -> Fraction:
        return 2 * self.rho * self.share

    def _in_large_phase(self, remaining: Sequence[str]) -> bool:
        if self.share == 0:
            return False
        threshold = self._large_threshold()
        return any(self.valuation.value(frozenset([e])) > threshold for e in remaining)

    def bid(self, state: PublicState) -> Fraction:
        if self.share == 0:
            return Fraction(0)
        budget = state.budgets[self.agent_id]
        if self._in_large_phase(state.remaining):
            return budget
        held = state.bundles[self.agent_id]
        _, top_marginal = _best_marginal(self.valuation, held, state.remaining)
        formula = Fraction(1, 2) / self.rho * self.entitlement / self.share * top_marginal
        if formula > budget:
            if self.valuation.value(held) < self.rho * self.share:
                self.budget_capped_early = True
            return budget
        return formula

    def pick(self, state: PublicState) -> Sequence[str]:
        if self.share > 0 and self._in_large_phase(state.remaining):
            item, _ = _best_singleton(self.valuation, state.remaining)
        else:
            item, gain = _best_marginal(self.valuation, state.bundles[self.agent_id], state.remaining)
            if gain == 0:
                item = sorted(state.remaining)[0]
        return [item]


class AltruisticProportionalBidder(Strategy):
    """Marginal-value bidding for the spend-capped game variant.

    The valuation is scaled so the share equals the entitlement and truncated
    at the share; the agent then bids the highest remaining marginal value
    (post scaling), capped at her remaining budget, and takes a maximal
    marginal item on a win, breaking ties by canonical item order.
    """

    def __init__(
        self,
        valuation: ValuationOracle,
        entitlement: Fraction | int,
        share: Fraction | int,
    ) -> None:
        self.entitlement = Fraction(entitlement)
        self.share = Fraction(share)
        if self.share < 0:
            raise ValueError("share must be nonnegative")
        if self.share > 0:
            self.scale = self.entitlement / self.share
            self.valuation = truncate_valuation(valuation, self.share)
        else:
            self.scale = Fraction(0)
            self.valuation = valuation

    def bid(self, state: PublicState) -> Fraction:
        if self.share == 0:
            return Fraction(0)
        budget = state.budgets[self.agent_id]
        _, top_marginal = _best_marginal(self.valuation, state.bundles[self.agent_id], state.remaining)
        return min(self.scale * top_marginal, budget)

    def pick(self, state: PublicState) -> Sequence[str]:
        item, gain = _best_marginal(self.valuation, state.bundles[self.agent_id], state.remaining)
        if gain == 0:
            item = sorted(state.remaining)[0]
        return [item]


class UnitDemandFullBudgetBidder(Strategy):
    """Bid the whole budget until the first win, take the best item, then stop."""

    def __init__(self, valuation: ValuationOracle) -> None:
        self.valuation = valuation
        self.won = False

    def bid(self, state: PublicState) -> Fraction:
        if self.won:
            return Fraction(0)
        return state.budgets[self.agent_id]

    def pick(self, state: PublicState) -> Sequence[str]:
        item, _ = _best_singleton(self.valuation, state.remaining)
        self.won = True
        return [item]


class ScriptedBidder(Strategy):
    """Replays fixed per-round bids and (optionally) per-round picks.

    Bids beyond the script default to zero and are clamped to the remaining
    budget.  A scripted pick that is no longer available is an error; without
    a pick script the canonically first available item is taken.
    """

    def __init__(
        self,
        bids: Sequence[Fraction | int],
        picks: Sequence[Sequence[str] | str | None] | None = None,
    ) -> None:
        self.bids = [Fraction(b) for b in bids]
        self.picks = list(picks) if picks is not None else None

    def bid(self, state: PublicState) -> Fraction:
        r = state.round - 1
        wanted = self.bids[r] if r < len(self.bids) else Fraction(0)
        return min(max(wanted, Fraction(0)), state.budgets[self.agent_id])

    def pick(self, state: PublicState) -> Sequence[str]:
        r = state.round - 1
        scripted = self.picks[r] if self.picks is not None and r < len(self.picks) else None
        if scripted is None:
            return [sorted(state.remaining)[0]]
        items = [scripted] if isinstance(scripted, str) else list(scripted)
        missing = [e for e in items if e not in state.remaining]
        if missing:
            raise StrategyError(f"scripted pick of unavailable items {missing}")
        return items


class ConstantBidder(Strategy):
    """Bids a constant amount (clamped to budget); picks canonically first item."""

    def __init__(self, amount: Fraction | int) -> None:
        self.amount = Fraction(amount)

    def bid(self, state: PublicState) -> Fraction:
        return min(self.amount, state.budgets[self.agent_id])

    def pick(self, state: PublicState) -> Sequence[str]:
        return [sorted(state.remaining)[0]]


class GreedyMarginalBidder(Strategy):
    """Bids its own highest marginal value, capped at budget; picks that item."""

    def __init__(self, valuation: ValuationOracle) -> None:
        self.valuation = valuation

    def bid(self, state: PublicState) -> Fraction:
        _, top = _best_marginal(self.valuation, state.bundles[self.agent_id], state.remaining)
        return min(top, state.budgets[self.agent_id])

    def pick(self, state: PublicState) -> Sequence[str]:
        item, gain = _best_marginal(self.valuation, state.bundles[self.agent_id], state.remaining)
        if gain == 0:
            item = sorted(state.remaining)[0]
        return [item]


class RandomBidder(Strategy):
    """Seeded random bids (a random sixteenth of the budget) and random picks."""

    def __init__(self, seed: int, granularity: int = 16) -> None:
        self.rng = random.Random(seed)
        self.granularity = granularity

    def bid(self, state: PublicState) -> Fraction:
        fraction = Fraction(self.rng.randint(0, self.granularity), self.granularity)
        return fraction * state.budgets[self.agent_id]

    def pick(self, state: PublicState) -> Sequence[str]:
        return [self.rng.choice(sorted(state.remaining))]


def make_proportional_aps(
    valuation: ValuationOracle,
    entitlement: Fraction | int,
    rho: RhoLike = None,
    share: Fraction | int = 0,
) -> ProportionalBidder:
    return ProportionalBidder(valuation, entitlement, share, rho)


def make_altruistic_proportional_mms(
    valuation: ValuationOracle,
    entitlement: Fraction | int,
    share: Fraction | int,
) -> AltruisticProportionalBidder:
    return AltruisticProportionalBidder(valuation, entitlement, share)


def make_unit_demand_full_budget(valuation: ValuationOracle) -> UnitDemandFullBudgetBidder:
    return UnitDemandFullBudgetBidder(valuation)


def make_scripted(
    bids: Sequence[Fraction | int],
    picks: Sequence[Sequence[str] | str | None] | None = None,
) -> ScriptedBidder:
    return ScriptedBidder(bids, picks)
