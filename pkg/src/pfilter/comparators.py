"""Two-step group screening baseline for empirical comparisons.

Step 1 screens groups by BH on their Simes p-values at a group-level
target; step 2 reruns BH inside each selected group at a level discounted
by the selected fraction of groups. Unlike the multi-layer filter, the two
steps are not forced to agree: a selected group may contain no within-group
rejections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classic import bh_reject, group_simes_bh
from .core import Layer, as_pvalues

__all__ = ["BBReport", "bb_procedure", "bb_flatten"]


@dataclass(frozen=True)
class BBReport:
    """Screened groups plus the within-group rejections for each of them.

    ``within`` has exactly the selected groups as keys; the value sets hold
    1-based hypothesis indices and may be empty.
    """

    selected_groups: frozenset[int]
    within: dict[int, frozenset[int]]


def bb_procedure(pvals, layer: Layer, alpha_grp, alpha_ov) -> BBReport:
    """Group screening at ``alpha_grp``, then within-group BH at
    ``alpha_ov * |selected groups| / G``.

    The within-group level uses the realized selection count from step 1.
    """
    p = as_pvalues(pvals)
    if layer.n != p.size:
        raise ValueError(f"layer partitions 1..{layer.n}, got {p.size} p-values")
    selected = group_simes_bh(p, layer, alpha_grp)
    level = float(alpha_ov) * len(selected) / layer.G
    within: dict[int, frozenset[int]] = {}
    for g in sorted(selected):
        members = layer._members[g - 1]
        local = bh_reject(p[members], level)
        within[g] = frozenset(int(members[j - 1]) + 1 for j in local)
    return BBReport(selected_groups=frozenset(selected), within=within)


def bb_flatten(report: BBReport) -> set[int]:
    """Union of all within-group rejections, as 1-based hypothesis indices."""
    out: set[int] = set()
    for sel in report.within.values():
        out |= sel
    return out
