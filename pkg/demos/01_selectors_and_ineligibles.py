"""
Position-selecting choice rules and their never-chosen alternatives
===================================================================

A choice rule over k-sets that only compares alternatives along a hidden
one-dimensional embedding always picks some fixed position of the set:
position 1 is a pure minimizer, position k a pure maximizer, and anything
in between is a compromise rule whose pairwise preferences flip with
context. This script shows:

1) a context flip (the signature of a choice-set effect), and
2) the k-1 alternatives such a rule can never return.
"""

import itertools

from choicelab import (
    LatentOrder,
    PositionSelector,
    evaluate,
    exhibits_choice_set_effects,
    ineligible_set,
)

# Four products A < B < C < D along a price/quality frontier.
order = LatentOrder.identity(4)
names = "ABCD"
middle = PositionSelector(k=3, position=2)

chosen_low = evaluate(middle, order, (0, 1, 2))   # {A, B, C}
chosen_high = evaluate(middle, order, (1, 2, 3))  # {B, C, D}
print("compromise rule on {A,B,C}:", names[chosen_low])
print("compromise rule on {B,C,D}:", names[chosen_high])
print("B beats C in one context, C beats B in the other ->",
      "choice-set effects:", exhibits_choice_set_effects(middle))
print("pure min rule has choice-set effects:",
      exhibits_choice_set_effects(PositionSelector(3, 1)))

# Never-chosen alternatives: the rule's position determines how many
# extremes at each end are unreachable.
print()
order6 = LatentOrder.identity(6)
for position in (1, 2, 3):
    selector = PositionSelector(3, position)
    dead = sorted(ineligible_set(selector, order6))
    print(f"k=3, position={position}: never chosen = u{dead}")

# Cross-check by enumerating all 20 3-sets of a 6-element universe.
selector = PositionSelector(3, 2)
seen = {evaluate(selector, order6, s) for s in itertools.combinations(range(6), 3)}
print("enumeration of all C(6,3) sets confirms:", sorted(set(range(6)) - seen))
