"""Exact share computation: maximin share and anyprice share, with witnesses.

Both computations are exhaustive and exact, guarded by a size limit on the
item count (default 12, overridable per call or via the BIDFAIR_SIZE_GUARD
environment variable).  They are oracles for verifying game guarantees at
desk scale, not production approximation algorithms.

The anyprice share of an agent with entitlement b is the largest value z for
which bundle weights {lambda_T} exist with total weight 1, support restricted
to bundles of value at least z, and per-item coverage at most b.  The witness
returned is such a weight vector.  The maximin share is the best worst-bundle
value over partitions of the items into n (possibly empty) bundles; the
witness is an optimal partition.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .model import FractionalPartition
from .simplex import feasible_point
from .valuations import SizeGuardExceeded, ValuationOracle


def default_size_guard() -> int:
    return int(os.environ.get("BIDFAIR_SIZE_GUARD", "12"))


@dataclass(frozen=True)
class ShareResult:
    value: Fraction
    witness: tuple[frozenset[str], ...] | FractionalPartition


def _checked_items(items: Iterable[str], max_items: int | None) -> tuple[str, ...]:
    items = tuple(sorted(items))
    guard = default_size_guard() if max_items is None else max_items
    if len(items) > guard:
        raise SizeGuardExceeded(
            f"exact share computation over {len(items)} items exceeds guard of {guard}"
        )
    return items


def value_table(v: ValuationOracle, items: Sequence[str]) -> list[Fraction]:
    """Values of all 2^m subsets, indexed by bitmask over the sorted items."""
    m = len(items)
    table = [Fraction(0)] * (1 << m)
    for mask in range(1 << m):
        bundle = frozenset(items[i] for i in range(m) if mask >> i & 1)
        table[mask] = v.value(bundle)
    return table


def _mask_to_bundle(mask: int, items: Sequence[str]) -> frozenset[str]:
    return frozenset(items[i] for i in range(len(items)) if mask >> i & 1)


def mms_exact(
    v: ValuationOracle, n: int, items: Iterable[str], max_items: int | None = None
) -> ShareResult:
    """Maximin share over partitions into n bundles (empty bundles allowed)."""
    if n < 1:
        raise ValueError("need at least one bundle")
    items = _checked_items(items, max_items)
    m = len(items)
    table = value_table(v, items)
    if n == 1:
        full = (1 << m) - 1
        return ShareResult(table[full], (_mask_to_bundle(full, items),))

    best_value = Fraction(-1)
    best_blocks: tuple[int, ...] = (0,) * n
    blocks = [0] * n

    def search(i: int, used: int) -> None:
        nonlocal best_value, best_blocks
        if i == m:
            worst = min(table[b] for b in blocks)
            if worst > best_value:
                best_value = worst
                best_blocks = tuple(blocks)
            return
        for idx in range(min(used + 1, n)):
            blocks[idx] |= 1 << i
            search(i + 1, max(used, idx + 1))
            blocks[idx] &= ~(1 << i)

    search(0, 0)
    witness = tuple(_mask_to_bundle(b, items) for b in best_blocks)
    return ShareResult(best_value, witness)


def _coverage_feasible(
    z_index: int,
    candidates: Sequence[Fraction],
    table: Sequence[Fraction],
    items: Sequence[str],
    entitlement: Fraction,
) -> FractionalPartition | None:
    """Feasibility of the weight system at z = candidates[z_index]."""
    z = candidates[z_index]
    masks = [mask for mask in range(len(table)) if table[mask] >= z]
    m = len(items)
    a_eq = [[1] * len(masks)]
    b_eq = [1]
    a_ub = [[(mask >> j) & 1 for mask in masks] for j in range(m)]
    b_ub = [entitlement] * m
    result = feasible_point(len(masks), a_ub, b_ub, a_eq, b_eq)
    if result.status != "optimal":
        return None
    entries = tuple(
        (_mask_to_bundle(mask, items), weight)
        for mask, weight in zip(masks, result.x)
        if weight > 0
    )
    return FractionalPartition(entries)


def aps_exact(
    v: ValuationOracle,
    entitlement: Fraction | int,
    items: Iterable[str],
    max_items: int | None = None,
) -> ShareResult:
    """Anyprice share by binary search over the distinct achievable bundle values."""
    b = Fraction(entitlement)
    if not (0 < b <= 1):
        raise ValueError("entitlement must lie in (0, 1]")
    items = _checked_items(items, max_items)
    table = value_table(v, items)
    candidates = sorted(set(table))

    # z = 0 is witnessed by putting all weight on the empty bundle
    lo = candidates.index(Fraction(0)) if Fraction(0) in candidates else 0
    best = FractionalPartition(((frozenset(), Fraction(1)),))
    hi = len(candidates) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        witness = _coverage_feasible(mid, candidates, table, items, b)
        if witness is None:
            hi = mid - 1
        else:
            lo = mid
            best = witness
    return ShareResult(candidates[lo], best)


def aps_unit_demand(values: Iterable[Fraction | int], entitlement: Fraction | int) -> Fraction:
    """Closed form for unit-demand agents: the ceil(1/b)-th most valuable item.

    >>> aps_unit_demand([5, 4, 3, 2], Fraction(1, 3))
    Fraction(3, 1)
    >>> aps_unit_demand([5, 4], Fraction(1, 3))
    Fraction(0, 1)
    """
    b = Fraction(entitlement)
    if not (0 < b <= 1):
        raise ValueError("entitlement must lie in (0, 1]")
    ranked = sorted((Fraction(x) for x in values), reverse=True)
    k = math.ceil(1 / b)
    if len(ranked) < k:
        return Fraction(0)
    return ranked[k - 1]


def verify_mms_partition(
    partition: Sequence[frozenset[str]],
    v: ValuationOracle,
    items: Iterable[str],
    z: Fraction | int,
) -> bool:
    """True iff the bundles partition the items and each is worth at least z."""
    z = Fraction(z)
    items = frozenset(items)
    seen: set[str] = set()
    for bundle in partition:
        if bundle & seen:
            return False
        seen |= bundle
    if seen != items:
        return False
    return all(v.value(bundle) >= z for bundle in partition)


def verify_fractional_partition(
    partition: FractionalPartition,
    v: ValuationOracle,
    entitlement: Fraction | int,
    z: Fraction | int,
) -> bool:
    """True iff the weights total 1, support bundles reach z, coverage stays within b."""
    b = Fraction(entitlement)
    z = Fraction(z)
    total = Fraction(0)
    coverage: dict[str, Fraction] = {}
    for bundle, weight in partition.entries:
        if weight < 0:
            return False
        total += weight
        if weight > 0:
            if v.value(bundle) < z:
                return False
            for e in bundle:
                coverage[e] = coverage.get(e, Fraction(0)) + weight
    if total != 1:
        return False
    return all(c <= b for c in coverage.values())


def best_affordable(
    v: ValuationOracle,
    items: Sequence[str],
    prices: Mapping[str, Fraction],
    budget: Fraction | int,
    max_items: int | None = None,
) -> Fraction:
    """Best bundle value purchasable under given item prices and a budget."""
    budget = Fraction(budget)
    items = _checked_items(items, max_items)
    m = len(items)
    best = Fraction(0)
    for mask in range(1 << m):
        cost = sum(
            (prices[items[i]] for i in range(m) if mask >> i & 1), Fraction(0)
        )
        if cost <= budget:
            best = max(best, v.value(_mask_to_bundle(mask, items)))
    return best
