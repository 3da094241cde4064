"""Deterministic engine for the budgeted bidding game and its variants.

One item is allocated per round: every active agent submits a bid within her
remaining budget, the highest bid wins (ties resolved by an explicit policy),
and the winner pays her bid and picks an item.  Variants:

* standard    - an agent leaves the game exactly when her budget hits zero.
* altruistic  - an agent leaves once her cumulative spend passes a fixed
                fraction rho of her starting budget (strictly passes by
                default; a config switch makes reaching it sufficient).
* multi_pick  - the winner may take k >= 1 items and pays k times her bid.

Games are replayable: the transcript records every bid, win, pick and payment,
and ``verify_transcript`` re-checks a transcript against the rules without
needing the strategies.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .model import Allocation, GameState, Instance

MODES = ("standard", "altruistic", "multi_pick")
TIE_POLICIES = ("lexicographic", "seeded", "adversarial", "scripted")


class StrategyError(RuntimeError):
    """A strategy broke the rules in a way the engine does not repair."""


@dataclass(frozen=True)
class TieBreak:
    policy: str = "lexicographic"
    seed: int | None = None
    target: str | None = None  # adversarial mode: never let this agent win a tie
    prefs: tuple[tuple[str, ...], ...] = ()  # scripted mode: per-round preference

    def __post_init__(self) -> None:
        if self.policy not in TIE_POLICIES:
            raise ValueError(f"unknown tie policy {self.policy!r}")
        if self.policy == "seeded" and self.seed is None:
            raise ValueError("seeded tie-breaking needs a seed")
        if self.policy == "adversarial" and self.target is None:
            raise ValueError("adversarial tie-breaking needs a target agent")


@dataclass(frozen=True)
class GameConfig:
    mode: str = "standard"
    rho: Fraction | None = None
    strict_threshold: bool = True
    tie: TieBreak = field(default_factory=TieBreak)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "altruistic":
            if self.rho is None or not (0 < self.rho <= 1):
                raise ValueError("altruistic mode needs rho in (0, 1]")


@dataclass(frozen=True)
class PublicState:
    """Everything a strategy may observe when bidding or picking."""

    round: int
    remaining: tuple[str, ...]
    budgets: Mapping[str, Fraction]
    bundles: Mapping[str, frozenset[str]]
    active: Mapping[str, bool]
    spent: Mapping[str, Fraction]
    bid_history: tuple[Mapping[str, Fraction], ...]


class Strategy:
    """Stateful per-game bidder.  Instances must not be reused across games."""

    agent_id: str | None = None

    def start(self, agent_id: str, instance: Instance, config: GameConfig) -> None:
        if self.agent_id is not None:
            raise StrategyError("strategy instance reused across games")
        self.agent_id = agent_id

    def bid(self, state: PublicState) -> Fraction:
        raise NotImplementedError

    def pick(self, state: PublicState) -> Sequence[str]:
        raise NotImplementedError


@dataclass(frozen=True)
class Round:
    number: int
    bids: Mapping[str, Fraction]
    winner: str
    items: tuple[str, ...]
    payment: Fraction


@dataclass(frozen=True)
class Transcript:
    config: GameConfig
    rounds: tuple[Round, ...]
    allocation: Mapping[str, frozenset[str]]
    agent_ids: tuple[str, ...]
    unallocated: tuple[str, ...]
    violations: tuple[str, ...] = ()

    @property
    def seed(self) -> int | None:
        return self.config.tie.seed


def _deactivates(config: GameConfig, entitlement: Fraction, budget: Fraction, spent: Fraction) -> bool:
    if config.mode == "altruistic":
        limit = config.rho * entitlement
        return spent > limit if config.strict_threshold else spent >= limit
    return budget == 0


class _TieBreaker:
    def __init__(self, tie: TieBreak):
        self.tie = tie
        self.rng = random.Random(tie.seed) if tie.policy == "seeded" else None

    def choose(self, pool: list[str], round_number: int) -> str:
        pool = sorted(pool)
        if len(pool) == 1:
            return pool[0]
        policy = self.tie.policy
        if policy == "lexicographic":
            return pool[0]
        if policy == "seeded":
            return self.rng.choice(pool)
        if policy == "adversarial":
            others = [a for a in pool if a != self.tie.target]
            return others[0] if others else pool[0]
        prefs = self.tie.prefs[round_number - 1] if round_number <= len(self.tie.prefs) else ()
        for preferred in prefs:
            if preferred in pool:
                return preferred
        return pool[0]


def run_game(
    instance: Instance,
    strategies: Mapping[str, Strategy],
    config: GameConfig,
) -> tuple[Allocation, Transcript]:
    """Play the game to completion and return the allocation and transcript."""
    ids = instance.agent_ids
    if set(strategies) != set(ids):
        raise ValueError("need exactly one strategy per agent")
    for agent_id in ids:
        strategies[agent_id].start(agent_id, instance, config)

    budgets = {a.id: a.entitlement for a in instance.agents}
    entitlements = dict(budgets)
    bundles: dict[str, frozenset[str]] = {i: frozenset() for i in ids}
    spent = {i: Fraction(0) for i in ids}
    active = {i: True for i in ids}
    remaining = set(instance.items)
    history: list[Mapping[str, Fraction]] = []
    rounds: list[Round] = []
    violations: list[str] = []
    breaker = _TieBreaker(config.tie)

    round_number = 0
    while remaining and any(active.values()):
        round_number += 1
        state = PublicState(
            round=round_number,
            remaining=tuple(sorted(remaining)),
            budgets=dict(budgets),
            bundles=dict(bundles),
            active=dict(active),
            spent=dict(spent),
            bid_history=tuple(history),
        )
        bids: dict[str, Fraction] = {}
        for agent_id in ids:
            if not active[agent_id]:
                continue
            bid = Fraction(strategies[agent_id].bid(state))
            legal = min(max(bid, Fraction(0)), budgets[agent_id])
            if legal != bid:
                violations.append(
                    f"round {round_number}: bid {bid} by {agent_id} clamped to {legal}"
                )
            bids[agent_id] = legal
        top = max(bids.values())
        pool = [a for a, b in bids.items() if b == top]
        winner = breaker.choose(pool, round_number)

        picks = tuple(strategies[winner].pick(state))
        if not picks:
            raise StrategyError(f"{winner} picked no item in round {round_number}")
        if len(set(picks)) != len(picks) or any(e not in remaining for e in picks):
            raise StrategyError(f"{winner} picked unavailable items in round {round_number}")
        if config.mode != "multi_pick" and len(picks) != 1:
            raise StrategyError(f"{winner} must pick exactly one item in round {round_number}")
        if config.mode == "multi_pick" and bids[winner] > 0:
            affordable = int(budgets[winner] / bids[winner])
            if len(picks) > affordable:
                violations.append(
                    f"round {round_number}: {winner} afforded only {affordable} picks"
                )
                picks = picks[:affordable]

        payment = bids[winner] * len(picks)
        budgets[winner] -= payment
        spent[winner] += payment
        bundles[winner] = bundles[winner] | set(picks)
        remaining -= set(picks)
        if _deactivates(config, entitlements[winner], budgets[winner], spent[winner]):
            active[winner] = False
        history.append(dict(bids))
        rounds.append(Round(round_number, dict(bids), winner, picks, payment))

    allocation: Allocation = {i: bundles[i] for i in ids}
    transcript = Transcript(
        config=config,
        rounds=tuple(rounds),
        allocation={i: bundles[i] for i in ids},
        agent_ids=ids,
        unallocated=tuple(sorted(remaining)),
        violations=tuple(violations),
    )
    return allocation, transcript


def state_after(instance: Instance, transcript: Transcript, upto: int) -> GameState:
    """Reconstruct the game state after the first ``upto`` rounds."""
    config = transcript.config
    budgets = {a.id: a.entitlement for a in instance.agents}
    entitlements = dict(budgets)
    bundles: dict[str, frozenset[str]] = {i: frozenset() for i in instance.agent_ids}
    spent = {i: Fraction(0) for i in instance.agent_ids}
    active = {i: True for i in instance.agent_ids}
    remaining = set(instance.items)
    for rnd in transcript.rounds[:upto]:
        budgets[rnd.winner] -= rnd.payment
        spent[rnd.winner] += rnd.payment
        bundles[rnd.winner] = bundles[rnd.winner] | set(rnd.items)
        remaining -= set(rnd.items)
        if _deactivates(config, entitlements[rnd.winner], budgets[rnd.winner], spent[rnd.winner]):
            active[rnd.winner] = False
    return GameState(
        round=min(upto, len(transcript.rounds)),
        remaining=frozenset(remaining),
        budgets=budgets,
        bundles=bundles,
        active=active,
        spent=spent,
    )


def verify_transcript(transcript: Transcript, instance: Instance, config: GameConfig | None = None) -> bool:
    """Re-check a transcript against the game rules, without the strategies.

    Validates bid legality, winner maximality and tie-break consistency,
    payments, pick availability, deactivation timing, and that the final
    allocation matches the recorded picks.
    """
    config = config or transcript.config
    budgets = {a.id: a.entitlement for a in instance.agents}
    entitlements = dict(budgets)
    bundles: dict[str, frozenset[str]] = {i: frozenset() for i in instance.agent_ids}
    spent = {i: Fraction(0) for i in instance.agent_ids}
    active = {i: True for i in instance.agent_ids}
    remaining = set(instance.items)
    breaker = _TieBreaker(config.tie)

    expected_number = 0
    for rnd in transcript.rounds:
        expected_number += 1
        if rnd.number != expected_number:
            return False
        if not remaining or not any(active.values()):
            return False
        if set(rnd.bids) != {i for i in instance.agent_ids if active[i]}:
            return False
        if any(not (0 <= b <= budgets[i]) for i, b in rnd.bids.items()):
            return False
        top = max(rnd.bids.values())
        pool = [a for a, b in rnd.bids.items() if b == top]
        if rnd.winner not in pool or breaker.choose(pool, rnd.number) != rnd.winner:
            return False
        picks = rnd.items
        if not picks or len(set(picks)) != len(picks) or any(e not in remaining for e in picks):
            return False
        if config.mode != "multi_pick" and len(picks) != 1:
            return False
        if rnd.payment != rnd.bids[rnd.winner] * len(picks):
            return False
        if rnd.payment > budgets[rnd.winner]:
            return False
        budgets[rnd.winner] -= rnd.payment
        spent[rnd.winner] += rnd.payment
        bundles[rnd.winner] = bundles[rnd.winner] | set(picks)
        remaining -= set(picks)
        if _deactivates(config, entitlements[rnd.winner], budgets[rnd.winner], spent[rnd.winner]):
            active[rnd.winner] = False

    if remaining and any(active.values()):
        return False  # game stopped early
    if dict(transcript.allocation) != bundles:
        return False
    if set(transcript.unallocated) != remaining:
        return False
    return True
