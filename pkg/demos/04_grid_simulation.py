"""Row/column benchmark: 10000 hypotheses on a 100 x 100 grid.

Signals sit in two 15 x 15 blocks plus 15 isolated diagonal entries, so
they are sparse entry-wise, row-wise, and column-wise at once. Three
non-nested layers (entries, rows, columns) are controlled simultaneously
by the filter; BH and the two-step row screener each break at least one
of the three.
"""

from pfilter import design_grid, run_trials

ALPHAS = (0.2, 0.2, 0.2)
TRIALS = 30
MU = 3.0

pattern, layers = design_grid(MU)
truth = pattern.truth_set()
print(f"n = {pattern.n}, signals = {pattern.n_signals}")
bounds = [
    ALPHAS[0] * len(truth.nulls) / pattern.n,
    ALPHAS[1] * len(truth.null_groups(layers[1])) / layers[1].G,
    ALPHAS[2] * len(truth.null_groups(layers[2])) / layers[2].G,
]
print("guaranteed FDR bounds (entries, rows, columns):",
      [round(b, 3) for b in bounds])
print()

res = run_trials("grid", ["pfilter", "bh", "bb"], ALPHAS, MU, TRIALS, seed=515)
print(f"mu = {MU}, {TRIALS} trials")
print(f"  {'method':8} {'layer':8} {'FDR':>14} {'power':>14}")
for name in ("pfilter", "bh", "bb"):
    agg = res[name]
    for mi, layer_name in enumerate(("entries", "rows", "columns")):
        flag = " <-- exceeds its bound" if agg.fdr[mi] > bounds[mi] + 3 * agg.se_fdr[mi] else ""
        print(f"  {name:8} {layer_name:8} "
              f"{agg.fdr[mi]:.3f}+-{agg.se_fdr[mi]:.3f} "
              f"{agg.power[mi]:.3f}+-{agg.se_power[mi]:.3f}{flag}")
    print()

print("BH finds the isolated diagonal signals but floods rows and columns")
print("with false discoveries; the row screener fixes rows only. The filter")
print("keeps all three layers under control.")
