"""Passive-stream recovery: infer choices from two phases of observed (set, choice) records.

Phase 1 flags the alternatives never observed as a choice; when exactly
k-1 such alternatives exist they are the ineligible set. Phase 2 reads
only the records whose set is a fixed k-2 anchor subset plus a free
pair; each such record orients the pair under one consistent (but
unknown) convention, so the transitive closure of those orientations is
a partial order that answers a query whenever all internal pairs are
resolved. Queries touching an anchor or an unresolved pair return
UNRESOLVED, which scoring counts as incorrect.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    InvalidQueryError,
    LatentOrder,
    PositionSelector,
    evaluate_many,
    kset,
)
from .oracles import ObservationBatch, unrank_combinations
from .stats import clopper_pearson

__all__ = [
    "InsufficientCoverageError",
    "InconsistentStreamError",
    "UNRESOLVED",
    "find_ineligible_passive",
    "InferredPartialOrder",
    "build_partial_order",
    "answer_query",
    "answer_many",
    "CoverageReport",
    "coverage_report",
    "revealing_set_count",
    "min_revealing_count",
    "count_revealing_brute_force",
]


class InsufficientCoverageError(RuntimeError):
    """Phase 1 did not pin down the ineligible set; no answer is produced."""

    def __init__(self, never_chosen):
        self.never_chosen = frozenset(never_chosen)
        super().__init__(
            f"{len(self.never_chosen)} never-chosen alternatives observed; "
            f"cannot identify the ineligible set"
        )


class InconsistentStreamError(RuntimeError):
    """Records contradict every deterministic position-selecting source."""


class _Unresolved:
    __slots__ = ()

    def __repr__(self):
        return "UNRESOLVED"

    def __bool__(self):
        return False


UNRESOLVED = _Unresolved()


def find_ineligible_passive(batch: ObservationBatch, universe_size: int) -> frozenset:
    """Alternatives never appearing as a choice in the batch.

    The true ineligible set is always a subset of the result; when the
    result has exactly k-1 members it equals the ineligible set. Any other
    size raises InsufficientCoverageError (the algorithm terminates with
    no answer rather than guessing).
    """
    k = batch.k
    chosen = np.unique(batch.choices) if len(batch) else np.empty(0, dtype=np.int64)
    never = np.setdiff1d(np.arange(universe_size), chosen, assume_unique=True)
    if never.size != k - 1:
        raise InsufficientCoverageError(int(x) for x in never)
    return frozenset(int(x) for x in never)


class InferredPartialOrder:
    """Transitive closure of the anchored-pair orientations.

    beats[i, j] means element i wins against j under the stream's
    consistent orientation (winner-is-greater by convention; the true
    reading may be the reflection). Antisymmetric and transitive by
    construction; construction fails on any cycle.
    """

    def __init__(self, elements: np.ndarray, beats: np.ndarray, anchors, position: int):
        self.elements = elements
        self.beats = beats
        self.anchors = kset(anchors)
        self.position = int(position)
        self._index = {int(e): i for i, e in enumerate(elements)}
        self.elements.setflags(write=False)
        self.beats.setflags(write=False)

    @property
    def universe_size(self) -> int:
        return len(self.elements) + len(self.anchors)

    @property
    def k(self) -> int:
        return len(self.anchors) + 2

    def covers(self, alternative: int) -> bool:
        return alternative in self._index

    def resolved(self, u: int, v: int) -> bool:
        if u == v:
            return True
        try:
            i, j = self._index[u], self._index[v]
        except KeyError:
            return False
        return bool(self.beats[i, j] or self.beats[j, i])

    def greater(self, u: int, v: int) -> bool:
        """u beats v under the stored orientation."""
        return bool(self.beats[self._index[u], self._index[v]])

    @property
    def unresolved_pair_count(self) -> int:
        m = len(self.elements)
        resolved = self.beats | self.beats.T
        return int(m * (m - 1) // 2 - np.triu(resolved, 1).sum())

    @property
    def resolved_pair_fraction(self) -> float:
        m = len(self.elements)
        total = m * (m - 1) // 2
        return 1.0 - self.unresolved_pair_count / total if total else 1.0


def _transitive_closure(direct: np.ndarray) -> np.ndarray:
    """Reachability of a DAG given as a boolean adjacency matrix.

    Processes vertices in reverse topological order, accumulating each
    vertex's reachable set as the union of its children's; O(V*E) bit
    operations.
    """
    v = direct.shape[0]
    indegree = direct.sum(axis=0)
    queue = [i for i in range(v) if indegree[i] == 0]
    topo = []
    remaining = direct.copy()
    while queue:
        node = queue.pop()
        topo.append(node)
        children = np.nonzero(remaining[node])[0]
        remaining[node, :] = False
        indegree[children] -= 1
        queue.extend(int(c) for c in children if indegree[c] == 0)
    if len(topo) != v:
        raise InconsistentStreamError("orientation cycle in observed comparisons")
    reach = direct.copy()
    for node in reversed(topo):
        children = np.nonzero(direct[node])[0]
        if children.size:
            reach[node] |= reach[children].any(axis=0)
    return reach


def build_partial_order(
    batch: ObservationBatch, anchors, position: int
) -> InferredPartialOrder:
    """Extract anchored-pair orientations from a phase-2 batch and close them.

    Only records whose set is exactly {u, v} plus the anchors contribute;
    the record's choice is the pair's winner under the stream's fixed
    convention. Contradictory orientations for one pair, a choice falling
    on an anchor, or any cycle raise InconsistentStreamError (impossible
    for a noiseless position-selecting source with correct anchors).
    """
    anchors = kset(anchors)
    k = batch.k
    if len(anchors) != k - 2:
        raise ValueError(f"need exactly k-2={k - 2} anchors, got {len(anchors)}")
    if not 2 <= position <= k - 1:
        raise ValueError(f"position must lie in [2, k-1], got {position}")
    universe = int(batch.sets.max(initial=-1)) + 1 if len(batch) else 0
    universe = max(universe, (max(anchors) + 1) if anchors else 0)
    elements = np.setdiff1d(np.arange(universe), np.asarray(anchors, dtype=np.int64))
    index = np.full(universe, -1, dtype=np.int64)
    index[elements] = np.arange(elements.size)

    anchor_arr = np.asarray(anchors, dtype=np.int64)
    free = ~np.isin(batch.sets, anchor_arr)
    mask = free.sum(axis=1) == 2
    pairs = batch.sets[mask][free[mask]].reshape(-1, 2)
    winners = batch.choices[mask]
    if pairs.size and not ((winners == pairs[:, 0]) | (winners == pairs[:, 1])).all():
        raise InconsistentStreamError("an anchored record chose an anchor")

    v = elements.size
    direct = np.zeros((v, v), dtype=bool)
    losers = np.where(winners == pairs[:, 0], pairs[:, 1], pairs[:, 0])
    wi, li = index[winners], index[losers]
    if np.any(direct[li, wi]):
        raise InconsistentStreamError("contradictory orientations for a pair")
    direct[wi, li] = True
    if np.any(direct & direct.T):
        raise InconsistentStreamError("contradictory orientations for a pair")

    reach = _transitive_closure(direct)
    if np.any(reach & reach.T):
        raise InconsistentStreamError("orientation cycle in observed comparisons")
    return InferredPartialOrder(elements, reach, anchors, position)


def answer_query(po: InferredPartialOrder, s, position: int | None = None):
    """The inferred choice for a k-set, or UNRESOLVED.

    UNRESOLVED whenever the set touches an anchor or contains an
    unresolved pair; otherwise the element at the requested position of
    the set under the stored orientation. Every resolved answer is correct
    under one global reading of the orientation (possibly the reflected
    position; the scorer tries both).
    """
    s = kset(s)
    if len(s) != po.k:
        raise InvalidQueryError(f"query has {len(s)} members, expected k={po.k}")
    position = po.position if position is None else position
    if not all(po.covers(x) for x in s):
        return UNRESOLVED
    idx = [po._index[x] for x in s]
    sub = po.beats[np.ix_(idx, idx)]
    if not (sub | sub.T | np.eye(len(s), dtype=bool)).all():
        return UNRESOLVED
    wins = sub.sum(axis=1)  # number of members each element beats
    target = position - 1  # ascending rank = wins under greater-convention
    return int(s[int(np.nonzero(wins == target)[0][0])])


def answer_many(po: InferredPartialOrder, sets: np.ndarray, position: int) -> np.ndarray:
    """Vectorized answer_query; -1 marks UNRESOLVED."""
    sets = np.asarray(sets, dtype=np.int64)
    m, k = sets.shape
    universe = po.universe_size
    covered = ~np.isin(sets, np.asarray(po.anchors, dtype=np.int64)).any(axis=1)
    covered &= (sets < universe).all(axis=1)

    idx = np.zeros_like(sets)
    lookup = np.full(universe, -1, dtype=np.int64)
    lookup[po.elements] = np.arange(po.elements.size)
    idx[covered] = lookup[sets[covered]]

    wins = np.zeros((m, k), dtype=np.int64)
    resolved = covered.copy()
    for a in range(k):
        for b in range(a + 1, k):
            ab = np.zeros(m, dtype=bool)
            ba = np.zeros(m, dtype=bool)
            ab[covered] = po.beats[idx[covered, a], idx[covered, b]]
            ba[covered] = po.beats[idx[covered, b], idx[covered, a]]
            resolved &= ab | ba
            wins[:, a] += ab
            wins[:, b] += ba

    out = np.full(m, -1, dtype=np.int64)
    hit = wins == (position - 1)
    rows = resolved
    out[rows] = sets[rows, np.argmax(hit[rows], axis=1)]
    return out


@dataclass(frozen=True)
class CoverageReport:
    """Scoring of a recovered passive model against ground truth."""

    n: int
    k: int
    position: int
    frac_correct: float
    frac_unresolved: float
    reading: str  # "stored" or "reflected" orientation reading
    sample_size: int
    exhaustive: bool
    ci_low: float
    ci_high: float
    b: float | None = None
    p1: float | None = None
    p2: float | None = None

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "n": self.n,
                "k": self.k,
                "ell": self.position,
                "b": self.b,
                "frac_correct": self.frac_correct,
                "frac_unresolved": self.frac_unresolved,
                "p1": self.p1,
                "p2": self.p2,
            }
        )


def coverage_report(
    po: InferredPartialOrder,
    selector: PositionSelector,
    order: LatentOrder,
    sample_size: int = 100_000,
    rng: np.random.Generator | None = None,
    exhaustive_limit: int = 1_000_000,
    b: float | None = None,
    p1: float | None = None,
    p2: float | None = None,
) -> CoverageReport:
    """Fraction of k-sets answered correctly, UNRESOLVED counted as incorrect.

    Exhaustive when C(n,k) is at most exhaustive_limit, otherwise a
    uniform sample of sample_size sets with a 95% Clopper-Pearson interval.
    Both readings of the stored orientation (position and its reflection)
    are scored globally and the consistent one is reported.
    """
    n, k = order.n, selector.k
    total = math.comb(n, k)
    if total <= exhaustive_limit:
        sets = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(n), k)),
            dtype=np.int64,
            count=total * k,
        ).reshape(total, k)
        exhaustive = True
    else:
        if rng is None:
            raise ValueError("sampled scoring needs an rng")
        idx = rng.integers(0, total, size=sample_size)
        sets = unrank_combinations(idx, n, k)
        exhaustive = False

    truth = evaluate_many(selector, order, sets)
    position = po.position
    best = None
    for reading, pos in (("stored", position), ("reflected", k - position + 1)):
        answers = answer_many(po, sets, pos)
        frac = float((answers == truth).mean())
        if best is None or frac > best[1]:
            best = (reading, frac, answers)
    reading, frac_correct, answers = best
    frac_unresolved = float((answers == -1).mean())
    count = len(sets)
    lo, hi = clopper_pearson(int(round(frac_correct * count)), count)
    return CoverageReport(
        n=n,
        k=k,
        position=position,
        frac_correct=frac_correct,
        frac_unresolved=frac_unresolved,
        reading=reading,
        sample_size=count,
        exhaustive=exhaustive,
        ci_low=lo,
        ci_high=hi,
        b=b,
        p1=p1,
        p2=p2,
    )


def revealing_set_count(n: int, k: int, position: int, rank: int) -> int:
    """Number of k-sets that reveal the rank-th lowest element as eligible.

    A revealing set contains the element plus exactly position-1 members
    below it and k-position above it; rank counts elements below.
    """
    return math.comb(rank, position - 1) * math.comb(n - 1 - rank, k - position)


def min_revealing_count(n: int, k: int, position: int) -> int:
    """Minimum revealing-set count over all eligible elements."""
    lo, hi = position - 1, n - 1 - (k - position)
    return min(revealing_set_count(n, k, position, r) for r in range(lo, hi + 1))


def count_revealing_brute_force(n: int, k: int, position: int, rank: int) -> int:
    """Independent oracle: enumerate every k-set containing the rank-th
    element and count those whose selected member is that element."""
    element = rank
    others = [x for x in range(n) if x != element]
    count = 0
    for combo in itertools.combinations(others, k - 1):
        members = sorted(combo + (element,))
        if members[position - 1] == element:
            count += 1
    return count
