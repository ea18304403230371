"""Simes global-null p-values and the Benjamini-Hochberg step-up rule.

Every threshold comparison in this package is non-strict (``<=``) and is
done in float64 with a single shared expression order, so that the engine,
the classical procedures, and the brute-force oracle agree bit for bit.
"""

from __future__ import annotations

import numpy as np

from .core import Layer, as_pvalues

__all__ = ["simes", "group_simes", "bh_khat", "bh_reject", "group_simes_bh"]


def _check_alpha(alpha) -> float:
    a = float(alpha)
    if not np.isfinite(a) or a < 0:
        raise ValueError(f"alpha must be a finite value >= 0, got {alpha!r}")
    return a


def _passing_levels(sorted_p: np.ndarray) -> np.ndarray:
    # fl(p_(k) * n / k); the op order is shared by every caller so the
    # resulting floats are identical across modules
    n = sorted_p.shape[-1]
    return sorted_p * n / np.arange(1, n + 1)


def simes(pvals) -> float:
    """Simes combination p-value: min over k of P_(k) * n / k.

    A valid p-value for the hypothesis that all inputs are null. The raw
    minimum is returned; it never exceeds 1 because P_(n) * n / n <= 1.
    Invariant under permutation of the input, and the identity on a
    single p-value.
    """
    p = as_pvalues(pvals)
    return float(_passing_levels(np.sort(p)).min())


def group_simes(pvals, layer: Layer) -> np.ndarray:
    """Per-group Simes p-values for one partition, as an array of length G."""
    p = as_pvalues(pvals)
    if layer.n != p.size:
        raise ValueError(f"layer partitions 1..{layer.n}, got {p.size} p-values")
    return _group_simes_checked(p, layer)


def _group_simes_checked(p: np.ndarray, layer: Layer) -> np.ndarray:
    # p already validated and sized for layer
    matrix = layer._index_matrix
    if matrix is not None:
        if matrix.shape[1] == 1:
            # singleton groups: Simes is the p-value itself
            return p[matrix[:, 0]].copy()
        rows = np.sort(p[matrix], axis=1)
        return _passing_levels(rows).min(axis=1)
    return np.array(
        [_passing_levels(np.sort(p[m])).min() for m in layer._members]
    )


def bh_khat(pvals, alpha) -> int:
    """Number of rejections of the BH step-up rule at level ``alpha``.

    The largest k with P_(k) <= alpha * k / n, or 0 when no k qualifies.
    Nondecreasing in alpha, nonincreasing under any coordinatewise increase
    of the p-values.
    """
    p = as_pvalues(pvals)
    a = _check_alpha(alpha)
    n = p.size
    ok = np.sort(p) <= a * np.arange(1, n + 1) / n
    if not ok.any():
        return 0
    return int(np.flatnonzero(ok)[-1] + 1)


def bh_reject(pvals, alpha) -> set[int]:
    """BH rejection set at level ``alpha``: all i with P_i <= alpha * khat / n.

    Returns 1-based indices. With distinct p-values the set has exactly
    ``bh_khat`` elements; ties at the cutoff are all included.
    """
    p = as_pvalues(pvals)
    a = _check_alpha(alpha)
    k = bh_khat(p, a)
    if k == 0:
        return set()
    cutoff = a * k / p.size
    return set((np.flatnonzero(p <= cutoff) + 1).tolist())


def group_simes_bh(pvals, layer: Layer, alpha) -> set[int]:
    """Group-level selection: BH applied to the per-group Simes p-values.

    With singleton groups this is exactly ``bh_reject`` on the raw p-values;
    with a single all-encompassing group it reduces to the Simes test.
    Returns 1-based group indices.
    """
    return bh_reject(group_simes(pvals, layer), alpha)
