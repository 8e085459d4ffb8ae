"""Bars over the depth-3 tree: decidable bars, c-sets, and how many of each
kind are uniform."""
from fanmodels.bars import (
    FiniteBarSet, c_set_from, is_bar, is_extension_closed, is_weakly_uniform, show, strings_upto,
    uniform_witness,
)

D = 3
tree = strings_upto(D)

B = {"0", "10", "11"}
print("B =", sorted(map(show, B)))
print("  bar:", is_bar(B, D), " uniform witness:", uniform_witness(B, D))

# the c-set induced by a set C' keeps u when every extension of u lies in C'
Cp = set(strings_upto(2)) - {"11"}
C = c_set_from(Cp, 2)
print("c-set of 2^{<=2} minus 11:", sorted(map(show, C.members)))

counts = {"bar": 0, "uniform": 0, "weakly uniform": 0, "closed bar": 0}
for mask in range(1 << len(tree)):
    S = FiniteBarSet({u for i, u in enumerate(tree) if mask >> i & 1}, D)
    if is_bar(S, D):
        counts["bar"] += 1
        counts["closed bar"] += is_extension_closed(S, D)
    counts["uniform"] += uniform_witness(S, D) is not None
    counts["weakly uniform"] += is_weakly_uniform(S, D)
print(f"over all {1 << len(tree)} subsets:", counts)
