"""Set-function valuation oracles.

Strategies and share computations interact with valuations only through
value queries (``value(bundle) -> Fraction``).  The structured classes below
exist so that instances can be described compactly and serialized, but code
that simulates agents must treat them as opaque oracles.

All values are exact rationals.  Every oracle counts the number of value
queries it has answered; the counter is not thread safe and is meant for
single-run accounting.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

Bundle = frozenset[str]


class SizeGuardExceeded(ValueError):
    """Raised when an exhaustive check is asked to enumerate too many sets."""


def _as_bundle(items: Iterable[str]) -> Bundle:
    return items if isinstance(items, frozenset) else frozenset(items)


class ValuationOracle:
    """Base class: a normalized, monotone set function answering value queries."""

    def __init__(self) -> None:
        self.query_count = 0
        self._cache: dict[Bundle, Fraction] = {}

    def value(self, bundle: Iterable[str]) -> Fraction:
        """Answer a value query.  Queries are counted even when served from cache."""
        key = _as_bundle(bundle)
        self.query_count += 1
        hit = self._cache.get(key)
        if hit is None:
            hit = self._value(key)
            self._cache[key] = hit
        return hit

    def _value(self, bundle: Bundle) -> Fraction:
        raise NotImplementedError


class AdditiveValuation(ValuationOracle):
    """v(S) = sum of per-item values."""

    def __init__(self, values: Mapping[str, Fraction | int]) -> None:
        super().__init__()
        self.item_values = {e: Fraction(x) for e, x in values.items()}

    def _value(self, bundle: Bundle) -> Fraction:
        return sum((self.item_values.get(e, Fraction(0)) for e in bundle), Fraction(0))


class UnitDemandValuation(ValuationOracle):
    """v(S) = best single item in S."""

    def __init__(self, values: Mapping[str, Fraction | int]) -> None:
        super().__init__()
        self.item_values = {e: Fraction(x) for e, x in values.items()}

    def _value(self, bundle: Bundle) -> Fraction:
        vals = [self.item_values.get(e, Fraction(0)) for e in bundle]
        return max(vals, default=Fraction(0))


class XOSValuation(ValuationOracle):
    """Pointwise maximum of finitely many additive clauses."""

    def __init__(self, clauses: Sequence[Mapping[str, Fraction | int]]) -> None:
        super().__init__()
        if not clauses:
            raise ValueError("need at least one additive clause")
        self.clauses = [{e: Fraction(x) for e, x in c.items()} for c in clauses]

    def _value(self, bundle: Bundle) -> Fraction:
        best = Fraction(0)
        for clause in self.clauses:
            total = sum((clause.get(e, Fraction(0)) for e in bundle), Fraction(0))
            if total > best:
                best = total
        return best


class RowSubstitutesValuation(ValuationOracle):
    """Items arranged in rows of mutual substitutes.

    Items within a row are copies of one another: holding any item of row i
    contributes the row weight w_i exactly once.  Rows combine additively,
    so v(S) = sum of weights of rows that S touches.  Always submodular.
    """

    def __init__(self, rows: Sequence[Sequence[str]], weights: Sequence[Fraction | int]) -> None:
        super().__init__()
        if len(rows) != len(weights):
            raise ValueError("one weight per row")
        self.rows = [tuple(r) for r in rows]
        self.weights = [Fraction(w) for w in weights]
        self._row_of = {e: i for i, row in enumerate(self.rows) for e in row}

    def _value(self, bundle: Bundle) -> Fraction:
        touched = {self._row_of[e] for e in bundle if e in self._row_of}
        return sum((self.weights[i] for i in touched), Fraction(0))


class WeightedCoverageValuation(ValuationOracle):
    """v(S) = total weight of the ground elements covered by S (submodular)."""

    def __init__(
        self,
        element_weights: Mapping[str, Fraction | int],
        covers: Mapping[str, Iterable[str]],
    ) -> None:
        super().__init__()
        self.element_weights = {u: Fraction(w) for u, w in element_weights.items()}
        self.covers = {e: frozenset(us) for e, us in covers.items()}
        unknown = set().union(*self.covers.values()) - set(self.element_weights) if self.covers else set()
        if unknown:
            raise ValueError(f"items cover unknown elements: {sorted(unknown)}")

    def _value(self, bundle: Bundle) -> Fraction:
        covered: set[str] = set()
        for e in bundle:
            covered.update(self.covers.get(e, ()))
        return sum((self.element_weights[u] for u in covered), Fraction(0))


class TableValuation(ValuationOracle):
    """Explicit table over all subsets of a tiny item set.  Test fixtures only."""

    def __init__(self, items: Sequence[str], table: Mapping[frozenset, Fraction | int]) -> None:
        super().__init__()
        self.items = tuple(sorted(items))
        self.table = {frozenset(k): Fraction(x) for k, x in table.items()}

    def _value(self, bundle: Bundle) -> Fraction:
        try:
            return self.table[bundle]
        except KeyError:
            raise KeyError(f"table valuation has no entry for {sorted(bundle)}") from None


class TruncatedValuation(ValuationOracle):
    """min(v(S), t): caps an inner oracle at a ceiling t >= 0."""

    def __init__(self, inner: ValuationOracle, ceiling: Fraction | int) -> None:
        super().__init__()
        ceiling = Fraction(ceiling)
        if ceiling < 0:
            raise ValueError("truncation level must be nonnegative")
        self.inner = inner
        self.ceiling = ceiling

    def _value(self, bundle: Bundle) -> Fraction:
        return min(self.inner.value(bundle), self.ceiling)


class ScaledValuation(ValuationOracle):
    """c * v(S) for a positive rational c."""

    def __init__(self, inner: ValuationOracle, factor: Fraction | int) -> None:
        super().__init__()
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        self.inner = inner
        self.factor = factor

    def _value(self, bundle: Bundle) -> Fraction:
        return self.factor * self.inner.value(bundle)


def truncate_valuation(v: ValuationOracle, t: Fraction | int) -> TruncatedValuation:
    """Truncate v at level t.

    Preserves normalization and monotonicity, and preserves submodularity
    when v is submodular.

    >>> v = AdditiveValuation({"a": 3, "b": 2})
    >>> truncate_valuation(v, 4).value({"a", "b"})
    Fraction(4, 1)
    """
    return TruncatedValuation(v, t)


def marginal(v: ValuationOracle, item: str, base: Iterable[str]) -> Fraction:
    """Marginal value v(base + item) - v(base).  Requires item not in base."""
    base = _as_bundle(base)
    if item in base:
        raise ValueError(f"item {item!r} already in base bundle")
    return v.value(base | {item}) - v.value(base)


def _guard(items: Sequence[str], max_items: int) -> tuple[str, ...]:
    items = tuple(items)
    if len(items) > max_items:
        raise SizeGuardExceeded(
            f"exhaustive check over {len(items)} items exceeds guard of {max_items}"
        )
    return items


def is_monotone_normalized(v: ValuationOracle, items: Sequence[str], max_items: int = 12) -> bool:
    """Exhaustively check v(empty) == 0 and v(S) <= v(S + e) for all S, e."""
    items = _guard(items, max_items)
    if v.value(frozenset()) != 0:
        return False
    for size in range(len(items)):
        for sub in combinations(items, size):
            base = frozenset(sub)
            base_val = v.value(base)
            for e in items:
                if e not in base and v.value(base | {e}) < base_val:
                    return False
    return True


def is_submodular(v: ValuationOracle, items: Sequence[str], max_items: int = 12) -> bool:
    """Exhaustively check diminishing marginals: for all S subset of T and e
    outside T, v(e | S) >= v(e | T)."""
    items = _guard(items, max_items)
    universe = frozenset(items)
    subsets = [frozenset(c) for size in range(len(items) + 1) for c in combinations(items, size)]
    for t_set in subsets:
        for e in universe - t_set:
            marg_t = marginal(v, e, t_set)
            # checking against maximal proper predecessors suffices by induction
            for drop in t_set:
                s_set = t_set - {drop}
                if marginal(v, e, s_set) < marg_t:
                    return False
    return True
