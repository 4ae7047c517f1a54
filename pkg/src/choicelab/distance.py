"""Distance-comparison-based choice rules over metric embeddings.

The median rule repeatedly removes the farthest-apart pair of a k-set
(k odd) and returns the survivor; the outlier rule returns the member
farthest from that survivor, which on triplets models similarity
aversion. On triplets every element choice corresponds to a choice of
the complementary pairwise distance, and sorting all C(n,2) distances
through a pair oracle takes O(N log N) comparisons. All rules need every
pairwise distance distinct (general position); constructors reject ties
rather than breaking them silently.
"""

from __future__ import annotations

import itertools
import json
import math
from typing import Mapping, Sequence

import numpy as np

from .core import InvalidQueryError, kset
from .sorting import merge_sort

__all__ = [
    "AmbiguousDistancesError",
    "InvalidArityError",
    "MetricPoints",
    "PairId",
    "pair_id",
    "median_choice",
    "outlier_choice",
    "farthest_pair_removal_is_exact",
    "triplet_distance_correspondence",
    "PairDistanceOracle",
    "crowd_median_sort",
    "pairs_to_json",
    "feasibility_check",
]

PairId = tuple  # (i, j) with i < j, standing for the distance between i and j


class AmbiguousDistancesError(ValueError):
    """Two pairwise distances coincide; the removal rules are undefined."""


class InvalidArityError(ValueError):
    """A rule was applied to a set size it is not defined for."""


def pair_id(i: int, j: int) -> PairId:
    if i == j:
        raise InvalidQueryError(f"a pair needs two distinct ids, got ({i}, {j})")
    return (i, j) if i < j else (j, i)


class MetricPoints:
    """Euclidean embedding of alternatives, in general position.

    Construction fails if any two pairwise distances agree within 1e-9;
    silent tie-breaking would mask failures of the removal rules.
    """

    TOLERANCE = 1e-9

    def __init__(self, coords: Mapping[int, Sequence[float]]):
        if not coords:
            raise ValueError("need at least one point")
        ids = sorted(int(i) for i in coords)
        mat = np.asarray([coords[i] for i in ids], dtype=float)
        if mat.ndim == 1:
            mat = mat[:, None]
        if mat.ndim != 2:
            raise ValueError("coordinates must be vectors of a shared dimension")
        self.ids = tuple(ids)
        self._index = {i: r for r, i in enumerate(ids)}
        self.coords = mat
        self.coords.setflags(write=False)
        if len(ids) >= 2:
            diffs = mat[:, None, :] - mat[None, :, :]
            dmat = np.sqrt((diffs**2).sum(axis=2))
            iu = np.triu_indices(len(ids), 1)
            dists = np.sort(dmat[iu])
            if np.min(np.diff(dists), initial=np.inf) <= self.TOLERANCE:
                raise AmbiguousDistancesError(
                    "two pairwise distances coincide within 1e-9; points must "
                    "be in general position"
                )
            self._dmat = dmat
        else:
            self._dmat = np.zeros((1, 1))

    @property
    def dim(self) -> int:
        return int(self.coords.shape[1])

    def distance(self, i: int, j: int) -> float:
        return float(self._dmat[self._index[i], self._index[j]])

    def pair_distance(self, pair: PairId) -> float:
        return self.distance(pair[0], pair[1])

    @classmethod
    def from_json(cls, text: str) -> "MetricPoints":
        d = json.loads(text)
        dim = int(d["dim"])
        coords = {int(i): v for i, v in d["points"].items()}
        points = cls(coords)
        if points.dim != dim:
            raise ValueError(f"declared dim {dim} != coordinate dim {points.dim}")
        return points

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "points": {str(i): self.coords[self._index[i]].tolist() for i in self.ids},
            }
        )


def _check_members(points: MetricPoints, s) -> tuple:
    s = kset(s)
    missing = [x for x in s if x not in points._index]
    if missing:
        raise InvalidQueryError(f"no coordinates for {missing}")
    return s


def median_choice(points: MetricPoints, s) -> int:
    """Survivor of repeated farthest-pair removal; k must be odd.

    Equals the sum-of-distances minimizer for one-dimensional embeddings
    (any odd k) and for triplets (any dimension). For higher dimensions
    with k > 3 the same rule runs but is only a heuristic; see
    farthest_pair_removal_is_exact.
    """
    s = _check_members(points, s)
    if len(s) % 2 == 0:
        raise InvalidArityError(f"median rule needs odd set size, got {len(s)}")
    survivors = list(s)
    while len(survivors) > 1:
        far = max(
            itertools.combinations(survivors, 2),
            key=lambda p: points.distance(*p),
        )
        survivors = [x for x in survivors if x not in far]
    return survivors[0]


def outlier_choice(points: MetricPoints, s) -> int:
    """The member farthest from the median member; on triplets this is
    similarity aversion (two similar options lose to the dissimilar one)."""
    s = _check_members(points, s)
    center = median_choice(points, s)
    return max((x for x in s if x != center), key=lambda x: points.distance(x, center))


def farthest_pair_removal_is_exact(k: int, dim: int) -> bool:
    """Whether the removal rule provably returns the sum-of-distances
    minimizer (k=3 in any dimension, or any odd k in one dimension);
    outside these cases the rule's output is heuristic."""
    return k == 3 or dim == 1


def sum_of_distances_minimizer(points: MetricPoints, s) -> int:
    """Brute-force reference: the member minimizing total distance to the rest."""
    s = _check_members(points, s)
    return min(s, key=lambda x: sum(points.distance(x, y) for y in s if y != x))


def triplet_distance_correspondence(s, chosen: int) -> PairId:
    """On a triplet, a choice of an element is a choice of the distance
    between the two others: the outlier corresponds to the shortest
    distance, the median element to the longest. Involutive."""
    s = kset(s)
    if len(s) != 3:
        raise InvalidQueryError(f"correspondence is defined on triplets, got {len(s)}")
    if chosen not in s:
        raise InvalidQueryError(f"chosen element {chosen} not in {s}")
    rest = tuple(x for x in s if x != chosen)
    return pair_id(*rest)


class PairDistanceOracle:
    """Answers which of two pairwise distances is larger, with query accounting.

    restricted=True limits queries to the triangle form (the three pairs
    of one triplet, via largest_of_triangle); the unrestricted arity-2
    form is what the distance sort consumes.
    """

    def __init__(self, points: MetricPoints, restricted: bool = False):
        self.points = points
        self.restricted = restricted
        self._count = 0

    @property
    def query_count(self) -> int:
        return self._count

    def larger(self, a: PairId, b: PairId) -> PairId:
        if self.restricted:
            raise InvalidQueryError(
                "this oracle only answers triangle queries; use largest_of_triangle"
            )
        a, b = pair_id(*a), pair_id(*b)
        self._count += 1
        return a if self.points.pair_distance(a) > self.points.pair_distance(b) else b

    def largest_of_triangle(self, u: int, v: int, w: int) -> PairId:
        triplet = kset((u, v, w))
        pairs = [pair_id(*p) for p in itertools.combinations(triplet, 2)]
        self._count += 1
        return max(pairs, key=self.points.pair_distance)


def crowd_median_sort(pair_oracle: PairDistanceOracle, n: int):
    """Sort all C(n,2) pairs ascending by distance through the pair oracle.

    Deterministic merge sort: O(N log N) oracle calls for N = C(n,2).
    """
    pairs = [pair_id(*p) for p in itertools.combinations(range(n), 2)]

    def less(a, b):
        return pair_oracle.larger(a, b) == b

    ordered, _ = merge_sort(pairs, less)
    return ordered


def pairs_to_json(pairs) -> str:
    """Sorted pair output as a JSON array of [i, j] pairs."""
    return json.dumps([[int(i), int(j)] for i, j in pairs])


def feasibility_check(n: int) -> bool:
    """Whether exhaustive triplet queries supply fewer bits than sorting
    all pairwise distances requires: 2*C(n,3) < log2(C(n,2)!) - 1.

    Exact integer factorial, so the comparison is as sharp as float log2
    allows (margins here are far above rounding error).
    """
    if n < 3:
        raise ValueError("need n >= 3")
    lhs = 2 * math.comb(n, 3)
    rhs = math.log2(math.factorial(math.comb(n, 2))) - 1
    return lhs < rhs
