"""Seeded random corpus and opponent profiles shared by the acceptance suite.

Everything here is deterministic: instance idx and profile number fully
determine the instance, the opponents, and the tie-breaking policy.  Exact
shares are computed once per instance and cached for the whole session.
"""

import random
from fractions import Fraction

from bidfair.engine import GameConfig, TieBreak, run_game
from bidfair.negatives import gen_random_submodular
from bidfair.shares import aps_exact, mms_exact
from bidfair.strategies import (
    AltruisticProportionalBidder,
    ConstantBidder,
    GreedyMarginalBidder,
    ProportionalBidder,
    RandomBidder,
    ScriptedBidder,
)
from bidfair.wrapper import MMS_GAME_RHO

CORPUS_SIZE = 500
PROFILES = 20


def corpus_spec(idx):
    n = (2, 3, 4)[idx % 3]
    m = 4 + idx % 5
    kind = "equal" if idx % 2 == 0 else "random"
    return n, m, kind


_instances = {}
_aps = {}
_mms = {}


def instance(idx):
    if idx not in _instances:
        n, m, kind = corpus_spec(idx)
        _instances[idx] = gen_random_submodular(
            10_000 + idx, n, m, universe=5 + idx % 3, entitlements=kind
        )
    return _instances[idx]


def aps_of(idx, agent_id):
    key = (idx, agent_id)
    if key not in _aps:
        inst = instance(idx)
        spec = inst.agent(agent_id)
        _aps[key] = aps_exact(spec.valuation, spec.entitlement, inst.items)
    return _aps[key]


def mms_of(idx, agent_id):
    key = (idx, agent_id)
    if key not in _mms:
        inst = instance(idx)
        spec = inst.agent(agent_id)
        _mms[key] = mms_exact(spec.valuation, len(inst.agents), inst.items)
    return _mms[key]


def equal_indices(limit=CORPUS_SIZE):
    return [idx for idx in range(limit) if corpus_spec(idx)[2] == "equal"]


def designated_agent(idx, profile):
    inst = instance(idx)
    return inst.agent_ids[profile % len(inst.agents)]


def tie_for(idx, profile, p_id):
    inst = instance(idx)
    style = profile % 4
    if style == 0:
        return TieBreak(policy="lexicographic")
    if style == 1:
        return TieBreak(policy="adversarial", target=p_id)
    if style == 2:
        return TieBreak(policy="seeded", seed=9_000 + 31 * idx + profile)
    rng = random.Random(5_000 + 17 * idx + profile)
    prefs = []
    for _ in range(len(inst.items)):
        order = list(inst.agent_ids)
        rng.shuffle(order)
        prefs.append(tuple(order))
    return TieBreak(policy="scripted", prefs=tuple(prefs))


def opponents_for(idx, profile, p_id):
    """Fresh adversary strategies for every agent except the designated one."""
    inst = instance(idx)
    rng = random.Random(1_000_000 + 997 * idx + profile)
    strategies = {}
    for pos, spec in enumerate(inst.agents):
        if spec.id == p_id:
            continue
        kind = (pos + profile) % 4
        if kind == 0:
            strategies[spec.id] = RandomBidder(rng.randint(0, 10**6))
        elif kind == 1:
            strategies[spec.id] = GreedyMarginalBidder(spec.valuation)
        elif kind == 2:
            bids = [Fraction(rng.randint(0, 16), 16) for _ in inst.items]
            strategies[spec.id] = ScriptedBidder(bids)
        else:
            strategies[spec.id] = ConstantBidder(
                Fraction(rng.randint(0, 8), 8) * spec.entitlement
            )
    return strategies


def play_standard(idx, profile):
    """Designated agent plays share-proportional bidding in the standard game."""
    inst = instance(idx)
    p_id = designated_agent(idx, profile)
    spec = inst.agent(p_id)
    share = aps_of(idx, p_id).value
    p_strategy = ProportionalBidder(spec.valuation, spec.entitlement, share)
    strategies = opponents_for(idx, profile, p_id)
    strategies[p_id] = p_strategy
    config = GameConfig(mode="standard", tie=tie_for(idx, profile, p_id))
    allocation, transcript = run_game(inst, strategies, config)
    return inst, p_id, share, p_strategy, allocation, transcript


def play_altruistic(idx, profile):
    """Designated agent plays marginal-value bidding in the spend-capped game."""
    inst = instance(idx)
    p_id = designated_agent(idx, profile)
    spec = inst.agent(p_id)
    share = mms_of(idx, p_id).value
    p_strategy = AltruisticProportionalBidder(spec.valuation, spec.entitlement, share)
    strategies = opponents_for(idx, profile, p_id)
    strategies[p_id] = p_strategy
    config = GameConfig(
        mode="altruistic", rho=MMS_GAME_RHO, tie=tie_for(idx, profile, p_id)
    )
    allocation, transcript = run_game(inst, strategies, config)
    return inst, p_id, share, p_strategy, allocation, transcript
