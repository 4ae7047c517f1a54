"""
Classifying a rule's position with k+1 queries
==============================================

Which position a rule selects (up to reflection of the hidden embedding)
can be read off without learning any of the ordering: query all k+1
k-subsets of any (k+1)-set. Only two alternatives ever come back, and
the rarer one's frequency is the position's reflection-free
representative min(position, k-position+1).
"""

import numpy as np

from choicelab import (
    DeterministicOracle,
    LatentOrder,
    PositionSelector,
    canonical_position,
    classify_type,
)

rng = np.random.default_rng(11)
n = 12
order = LatentOrder.random(n, rng)

print(" k  position  classified  canonical  queries")
for k in (3, 4, 5):
    for position in range(1, k + 1):
        oracle = DeterministicOracle(PositionSelector(k, position), order)
        got = classify_type(oracle)
        want = canonical_position(oracle.selector)
        print(f"{k:>2}  {position:>8}  {got:>10}  {want:>9}  {oracle.query_count:>7}")

print()
print("positions p and k-p+1 are indistinguishable: reversing the hidden")
print("embedding maps one rule onto the other, choice for choice.")
