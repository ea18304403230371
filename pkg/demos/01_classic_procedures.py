"""Classic building blocks: the Simes test and the BH step-up rule.

Both are special cases of group-level selection with Simes p-values:
singleton groups give BH, one whole-set group gives the Simes test.
"""

import numpy as np

from pfilter import (
    bh_khat,
    bh_reject,
    coarsest_layer,
    finest_layer,
    group_simes,
    group_simes_bh,
    simes,
    Layer,
)

p = np.array([0.001, 0.008, 0.039, 0.041, 0.09, 0.35, 0.55, 0.68, 0.72, 0.94])
alpha = 0.1
print("p-values:", p.tolist())
print()

print("== Simes test of the global null ==")
print(f"Simes(P) = {simes(p):.4f}  ->",
      "reject the global null" if simes(p) <= alpha else "no evidence",
      f"at level {alpha}")
print()

print("== BH step-up at level", alpha, "==")
khat = bh_khat(p, alpha)
print(f"khat = {khat} rejections, cutoff alpha*khat/n = {alpha * khat / p.size:.4f}")
print("rejected indices:", sorted(bh_reject(p, alpha)))
print()

print("== group Simes + BH interpolates between the two ==")
blocks = Layer([range(1, 6), range(6, 11)], 10)
print("two blocks of five, per-group Simes:", np.round(group_simes(p, blocks), 4).tolist())
print("selected groups at", alpha, ":", sorted(group_simes_bh(p, blocks, alpha)))
print("singleton groups reproduce BH:",
      sorted(group_simes_bh(p, finest_layer(10), alpha)) == sorted(bh_reject(p, alpha)))
print("one big group reproduces the Simes test:",
      (group_simes_bh(p, coarsest_layer(10), alpha) == {1}) == (simes(p) <= alpha))
