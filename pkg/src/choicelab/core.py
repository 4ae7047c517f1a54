"""Universes, latent orders, k-sets, and position-selecting choice rules.

Everything here is ground truth shared by the oracles and by every test:
alternatives are dense integer ids in [0, n), a latent one-dimensional
embedding is kept only as a ranking (all choice rules in this package are
comparison-based, so real coordinates would carry no extra information),
and a choice rule is a (k, position) pair selecting the position-th
smallest member of each k-set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Alternative = int
KSet = tuple  # sorted tuple of distinct alternative ids


class InvalidQueryError(ValueError):
    """A query violating a size, membership, or arity contract."""


def kset(members: Iterable[int]) -> KSet:
    """Normalize an iterable of ids into a sorted, duplicate-free k-set."""
    ids = sorted(int(m) for m in members)
    if len(set(ids)) != len(ids):
        raise InvalidQueryError(f"duplicate ids in k-set: {ids}")
    return tuple(ids)


@dataclass(frozen=True)
class PositionSelector:
    """Choice rule picking the position-th smallest member of a k-set.

    position counts from the minimum of the embedding: position=1 always
    selects minima, position=k always selects maxima, and intermediate
    positions model compromise behavior.
    """

    k: int
    position: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"set size k must be >= 2, got {self.k}")
        if not 1 <= self.position <= self.k:
            raise ValueError(
                f"position must lie in [1, {self.k}], got {self.position}"
            )


class LatentOrder:
    """A hidden embedding of the universe, stored as a ranking.

    Immutable. ``ascending[r]`` is the id whose embedding rank is r
    (rank 0 = minimum). Safe to share across threads.
    """

    __slots__ = ("_ascending", "_rank")

    def __init__(self, ascending: Sequence[int]):
        order = np.asarray(ascending, dtype=np.int64)
        n = order.size
        if n == 0:
            raise ValueError("universe must be non-empty")
        counts = np.bincount(order, minlength=n) if order.min(initial=0) >= 0 else None
        if counts is None or counts.size != n or not (counts == 1).all():
            raise ValueError("ascending must be a permutation of [0, n)")
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.arange(n)
        self._ascending = order
        self._ascending.setflags(write=False)
        self._rank = rank
        self._rank.setflags(write=False)

    @classmethod
    def identity(cls, n: int) -> "LatentOrder":
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "LatentOrder":
        return cls(rng.permutation(n))

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "LatentOrder":
        """Order induced by real-valued embedding coordinates (must be distinct)."""
        vals = np.asarray(values, dtype=float)
        if np.unique(vals).size != vals.size:
            raise ValueError("embedding values must be distinct")
        return cls(np.argsort(vals))

    @property
    def n(self) -> int:
        return int(self._ascending.size)

    @property
    def ascending(self) -> np.ndarray:
        """Ids in ascending embedding order (read-only view)."""
        return self._ascending

    def rank_of(self, alternative: int) -> int:
        return int(self._rank[alternative])

    def ranks(self, ids) -> np.ndarray:
        """Vectorized rank lookup."""
        return self._rank[np.asarray(ids, dtype=np.int64)]

    def id_at(self, rank: int) -> int:
        return int(self._ascending[rank])

    def reversed(self) -> "LatentOrder":
        return LatentOrder(self._ascending[::-1])

    def __eq__(self, other) -> bool:
        return isinstance(other, LatentOrder) and np.array_equal(
            self._ascending, other._ascending
        )

    def __hash__(self) -> int:
        return hash(self._ascending.tobytes())

    def __repr__(self) -> str:
        ids = self._ascending.tolist()
        shown = ids if len(ids) <= 12 else ids[:12] + ["..."]
        return f"LatentOrder({shown})"

    def to_json(self) -> str:
        """JSON array of ids in ascending embedding order."""
        return json.dumps(self._ascending.tolist())

    @classmethod
    def from_json(cls, text: str) -> "LatentOrder":
        return cls(json.loads(text))


def _check_query(selector: PositionSelector, order: LatentOrder, s) -> KSet:
    s = kset(s)
    if len(s) != selector.k:
        raise InvalidQueryError(
            f"query has {len(s)} members, selector expects k={selector.k}"
        )
    if s[0] < 0 or s[-1] >= order.n:
        raise InvalidQueryError(f"ids out of range [0, {order.n}): {s}")
    return s


def evaluate(selector: PositionSelector, order: LatentOrder, s) -> Alternative:
    """Ground-truth choice: the member of s at the selector's position.

    Deterministic; always returns a member of s.
    """
    s = _check_query(selector, order, s)
    by_rank = sorted(s, key=order.rank_of)
    return by_rank[selector.position - 1]


def evaluate_many(
    selector: PositionSelector, order: LatentOrder, sets: np.ndarray
) -> np.ndarray:
    """Vectorized evaluate over an (m, k) array of k-sets."""
    sets = np.asarray(sets, dtype=np.int64)
    if sets.ndim != 2 or sets.shape[1] != selector.k:
        raise InvalidQueryError(
            f"expected (m, {selector.k}) array of k-sets, got shape {sets.shape}"
        )
    ranks = order.ranks(sets)
    idx = np.argsort(ranks, axis=1, kind="stable")[:, selector.position - 1]
    return sets[np.arange(sets.shape[0]), idx]


def ineligible_set(selector: PositionSelector, order: LatentOrder) -> frozenset:
    """The k-1 alternatives no k-set query can ever return.

    These are the position-1 globally minimal and k-position globally
    maximal alternatives: the former never have enough of the universe
    below them, the latter never enough above.
    """
    if order.n < selector.k:
        raise ValueError(f"universe size {order.n} smaller than k={selector.k}")
    low = selector.position - 1
    high = selector.k - selector.position
    asc = order.ascending
    bottom = asc[:low].tolist()
    top = asc[order.n - high :].tolist() if high else []
    return frozenset(bottom) | frozenset(top)


def canonical_position(selector: PositionSelector) -> int:
    """Reflection-equivalence representative: min(position, k-position+1)."""
    return min(selector.position, selector.k - selector.position + 1)


def exhibits_choice_set_effects(selector: PositionSelector) -> bool:
    """True iff the rule can flip a pairwise choice across contexts (2 <= position <= k-1)."""
    return 2 <= selector.position <= selector.k - 1
