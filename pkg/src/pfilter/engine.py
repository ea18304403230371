"""Multi-layer FDR filtering: threshold fixed point plus a brute-force oracle.

A hypothesis is selected iff, in every layer, its group's Simes p-value sits
below that layer's threshold. Each threshold t_m lives on the finite grid
{alpha_m * k / G_m : k = 0..G_m}; the filter lowers the thresholds from
alpha_m via coordinatewise updates until a full pass leaves them unchanged.
The fixed point is the coordinatewise-largest admissible threshold vector,
so the sweep order is irrelevant; ``brute_force_pfilter`` recomputes the
same corner by exhaustive grid enumeration for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .classic import _group_simes_checked
from .core import Layer, MultiLayerProblem, as_pvalues

__all__ = [
    "BRUTE_FORCE_LIMIT",
    "ThresholdVector",
    "DiscoveryReport",
    "selection_set",
    "layer_selection",
    "estimated_fdp",
    "threshold_update",
    "pfilter",
    "brute_force_pfilter",
    "random_problem",
]

BRUTE_FORCE_LIMIT = 10**7


@dataclass(frozen=True)
class ThresholdVector:
    """Per-layer thresholds with their exact grid indices.

    ``values[m]`` equals ``alpha_m * indices[m] / G_m`` in float64; the
    integer indices make cross-implementation comparisons float-free.
    """

    values: tuple[float, ...]
    indices: tuple[int, ...]


@dataclass(frozen=True)
class DiscoveryReport:
    """Outcome of one filter run.

    ``selected`` holds 1-based hypothesis indices; ``layer_selected[m]``
    the 1-based groups of layer m containing at least one selection. The
    two views are consistent by construction. ``trace`` records the grid
    indices after each pass of the outer loop.
    """

    thresholds: ThresholdVector
    selected: frozenset[int]
    layer_selected: tuple[frozenset[int], ...]
    estimated_fdps: tuple[float, ...]
    passes: int
    trace: tuple[tuple[int, ...], ...]


def _grid(alpha: float, G: int) -> np.ndarray:
    return alpha * np.arange(G + 1) / G


def _check_layers(p: np.ndarray, layers) -> tuple[Layer, ...]:
    layers = tuple(layers)
    if not layers:
        raise ValueError("need at least one layer")
    for pos, layer in enumerate(layers, start=1):
        if layer.n != p.size:
            raise ValueError(
                f"layer {pos} partitions 1..{layer.n}, but there are {p.size} p-values"
            )
    return layers


def _threshold_values(t, M: int) -> tuple[float, ...]:
    vals = tuple(float(x) for x in getattr(t, "values", t))
    if len(vals) != M:
        raise ValueError(f"{M} layers but {len(vals)} thresholds")
    return vals


def selection_set(pvals, layers, t) -> set[int]:
    """Hypotheses whose group passes every layer at thresholds ``t``.

    ``t`` may be a ThresholdVector or any sequence of M levels. Returns
    1-based indices. Nondecreasing in ``t`` coordinatewise.
    """
    p = as_pvalues(pvals)
    layers = _check_layers(p, layers)
    tvals = _threshold_values(t, len(layers))
    mask = np.ones(p.size, dtype=bool)
    for layer, tm in zip(layers, tvals):
        mask &= (_group_simes_checked(p, layer) <= tm)[layer._labels]
    return set((np.flatnonzero(mask) + 1).tolist())


def layer_selection(selected, layer: Layer) -> set[int]:
    """Groups of ``layer`` that contain at least one selected hypothesis."""
    if not selected:
        return set()
    idx = np.fromiter((int(i) for i in selected), dtype=np.intp)
    if idx.min() < 1 or idx.max() > layer.n:
        raise ValueError(f"selected indices must lie in 1..{layer.n}")
    return set((np.unique(layer._labels[idx - 1]) + 1).tolist())


def estimated_fdp(t_m: float, G_m: int, selected_count: int) -> float:
    """Estimated false discovery proportion G_m * t_m / max(1, selected)."""
    t = float(t_m)
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"threshold must be a finite value >= 0, got {t_m!r}")
    return G_m * t / max(1, int(selected_count))


def _update(
    mi: int,
    k_cur: int,
    gsimes_m: np.ndarray,
    grid_m: np.ndarray,
    layers: tuple[Layer, ...],
    pass_masks: list[np.ndarray],
) -> int:
    """Largest grid index k <= k_cur whose selected-group count covers it.

    A grid point k is admissible iff k <= max(1, |S_m|) where S_m counts the
    groups that pass layer mi at grid_m[k] while containing a hypothesis that
    passes every other layer. This integer form of the constraint
    G_m * T / (1 v |S_m|) <= alpha_m is exact, with no float division.
    Admissibility is not monotone in k, so every candidate is checked.
    """
    layer = layers[mi]
    other = np.ones(layer.n, dtype=bool)
    for m2, mask in enumerate(pass_masks):
        if m2 != mi:
            other &= mask
    alive = np.bincount(layer._labels[other], minlength=layer.G) > 0
    svals = np.sort(gsimes_m[alive])
    counts = np.searchsorted(svals, grid_m[: k_cur + 1], side="right")
    ks = np.arange(k_cur + 1)
    return int(ks[ks <= np.maximum(1, counts)].max())


def _pass_mask(gsimes_m: np.ndarray, threshold: float, layer: Layer) -> np.ndarray:
    return (gsimes_m <= threshold)[layer._labels]


def pfilter(problem: MultiLayerProblem) -> DiscoveryReport:
    """Run the multi-layer filter and report the selections at its fixed point.

    Thresholds start at the top of their grids (t_m = alpha_m) and only move
    down. Each pass applies the single-layer update to m = 1..M in turn; the
    loop stops when a full pass changes nothing. Per-group Simes p-values are
    computed once per layer and reused across all threshold probes.

    The run always terminates: the all-zeros point is admissible, and the
    number of passes is at most G_1 + ... + G_M + 1 (enforced; exceeding the
    bound would mean a broken update). At the fixed point every layer's
    estimated FDP is within its alpha_m.
    """
    p = problem.pvalues
    layers = problem.layers
    alphas = problem.alphas
    M = problem.M
    gsimes = [_group_simes_checked(p, layer) for layer in layers]
    grids = [_grid(a, layer.G) for a, layer in zip(alphas, layers)]
    k = [layer.G for layer in layers]
    pass_masks = [
        _pass_mask(gs, grid[kk], layer)
        for gs, grid, kk, layer in zip(gsimes, grids, k, layers)
    ]
    budget = sum(layer.G for layer in layers) + 1
    trace: list[tuple[int, ...]] = []
    passes = 0
    while True:
        passes += 1
        changed = False
        for mi in range(M):
            k_new = _update(mi, k[mi], gsimes[mi], grids[mi], layers, pass_masks)
            if k_new != k[mi]:
                k[mi] = k_new
                pass_masks[mi] = _pass_mask(gsimes[mi], grids[mi][k_new], layers[mi])
                changed = True
        trace.append(tuple(k))
        if not changed:
            break
        if passes >= budget:
            raise RuntimeError(
                f"no fixed point within {budget} passes; the update rule is broken"
            )

    selected_mask = pass_masks[0].copy()
    for mask in pass_masks[1:]:
        selected_mask &= mask
    selected = frozenset((np.flatnonzero(selected_mask) + 1).tolist())
    layer_selected = []
    fdps = []
    for mi, layer in enumerate(layers):
        gsel = np.unique(layer._labels[selected_mask])
        layer_selected.append(frozenset((gsel + 1).tolist()))
        # alpha * (k / count) rather than G*t/count: k <= max(1, count) holds
        # exactly, so the estimate cannot round above alpha_m
        fdps.append(alphas[mi] * (k[mi] / max(1, gsel.size)))
    return DiscoveryReport(
        thresholds=ThresholdVector(
            values=tuple(float(grid[kk]) for grid, kk in zip(grids, k)),
            indices=tuple(k),
        ),
        selected=selected,
        layer_selected=tuple(layer_selected),
        estimated_fdps=tuple(fdps),
        passes=passes,
        trace=tuple(trace),
    )


def threshold_update(pvals, layers, t, m: int, alpha_m) -> float:
    """One single-layer update: the largest on-grid T <= t_m keeping layer
    m's estimated FDP within ``alpha_m`` while the other layers stay at ``t``.

    ``m`` is the 1-based layer position. ``t`` may be a ThresholdVector or a
    sequence of levels; t_m is snapped down to its grid if off-grid.
    """
    p = as_pvalues(pvals)
    layers = _check_layers(p, layers)
    M = len(layers)
    tvals = _threshold_values(t, M)
    if not 1 <= m <= M:
        raise ValueError(f"m must be a 1-based layer position in 1..{M}")
    mi = m - 1
    a = float(alpha_m)
    if not np.isfinite(a) or a < 0:
        raise ValueError(f"alpha_m must be a finite value >= 0, got {alpha_m!r}")
    gsimes = [_group_simes_checked(p, layer) for layer in layers]
    grid = _grid(a, layers[mi].G)
    k_cur = max(int(np.searchsorted(grid, tvals[mi], side="right")) - 1, 0)
    pass_masks = [
        _pass_mask(gs, tv, layer) for gs, tv, layer in zip(gsimes, tvals, layers)
    ]
    k_new = _update(mi, k_cur, gsimes[mi], grid, layers, pass_masks)
    return float(grid[k_new])


def brute_force_pfilter(problem: MultiLayerProblem) -> ThresholdVector:
    """Exhaustive-grid oracle for the fixed point, for testing only.

    Enumerates every grid combination (k_1, ..., k_M), keeps the admissible
    ones (every layer's estimated FDP within its alpha, in the same integer
    form the filter uses), and returns the coordinatewise maximum. That the
    max corner is itself admissible is asserted, not assumed. Refuses when
    the grid has more than ``BRUTE_FORCE_LIMIT`` points.
    """
    p = problem.pvalues
    layers = problem.layers
    alphas = problem.alphas
    M = problem.M
    n = p.size
    sizes = [layer.G + 1 for layer in layers]
    total = math.prod(sizes)
    if total > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f"grid has {total} points; refusing above {BRUTE_FORCE_LIMIT}"
        )
    grids = [_grid(a, layer.G) for a, layer in zip(alphas, layers)]
    acc = np.ones(tuple(sizes) + (n,), dtype=bool)
    for mi, layer in enumerate(layers):
        per_hyp = _group_simes_checked(p, layer)[layer._labels]
        hyp_pass = per_hyp[None, :] <= grids[mi][:, None]
        shape = [1] * M + [n]
        shape[mi] = sizes[mi]
        acc &= hyp_pass.reshape(shape)
    admissible = np.ones(tuple(sizes), dtype=bool)
    for mi, layer in enumerate(layers):
        counts = np.zeros(tuple(sizes), dtype=np.int64)
        for members in layer._members:
            counts += acc[..., members].any(axis=-1)
        kshape = [1] * M
        kshape[mi] = sizes[mi]
        kk = np.arange(sizes[mi]).reshape(kshape)
        admissible &= kk <= np.maximum(1, counts)
    corner = []
    for mi in range(M):
        axes = tuple(ax for ax in range(M) if ax != mi)
        along = admissible.any(axis=axes) if axes else admissible
        corner.append(int(np.flatnonzero(along)[-1]))
    if not admissible[tuple(corner)]:
        raise AssertionError(
            "coordinatewise max of the admissible set is not itself admissible"
        )
    return ThresholdVector(
        values=tuple(float(grids[mi][corner[mi]]) for mi in range(M)),
        indices=tuple(corner),
    )


def random_problem(
    rng: np.random.Generator,
    max_n: int = 12,
    max_m: int = 3,
    alpha_choices: Sequence[float] = (0.05, 0.1, 0.2, 0.5),
) -> MultiLayerProblem:
    """Small random instance for oracle cross-checks.

    Draws n <= max_n hypotheses, M <= max_m random partitions, levels from
    ``alpha_choices``, and p-values that are sometimes rounded (forcing ties)
    or spiked to the endpoints 0 and 1.
    """
    n = int(rng.integers(1, max_n + 1))
    M = int(rng.integers(1, max_m + 1))
    p = rng.uniform(size=n)
    style = int(rng.integers(0, 4))
    if style == 1:
        p = np.round(p, 1)
    elif style == 2:
        p = np.round(p, 2)
    elif style == 3:
        spike = rng.uniform(size=n) < 0.2
        p[spike] = rng.integers(0, 2, size=int(spike.sum())).astype(float)
    layers = []
    for _ in range(M):
        target = int(rng.integers(1, n + 1))
        layers.append(Layer.from_labels(rng.integers(0, target, size=n)))
    alphas = tuple(float(a) for a in rng.choice(np.asarray(alpha_choices), size=M))
    return MultiLayerProblem(p, tuple(layers), alphas)
