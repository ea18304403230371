"""Core types: p-value vectors, partitions of hypotheses, and test problems.

All public surfaces speak 1-based hypothesis and group indices; internal
arrays are 0-based. Every type here is immutable after construction and
safe for concurrent shared reads.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "as_pvalues",
    "validate_layer",
    "Layer",
    "group_of",
    "finest_layer",
    "coarsest_layer",
    "MultiLayerProblem",
    "TruthSet",
]


def as_pvalues(values) -> np.ndarray:
    """Coerce ``values`` to a read-only float64 vector of p-values.

    Rejects anything that is not a nonempty 1-d collection of finite numbers
    in [0, 1]. Values exactly 0 or 1 are accepted.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"p-values must be one-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise ValueError("need at least one p-value")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"p-value at position {bad + 1} is not finite")
    out_of_range = (arr < 0.0) | (arr > 1.0)
    if out_of_range.any():
        bad = int(np.flatnonzero(out_of_range)[0])
        raise ValueError(
            f"p-value out of [0, 1] at position {bad + 1}: {arr[bad]!r}"
        )
    out = arr.copy()
    out.flags.writeable = False
    return out


def validate_layer(groups: Iterable[Iterable[int]], n: int) -> list[str]:
    """Check that ``groups`` is an exact partition of {1..n}.

    Returns a list of human-readable violations (empty when the partition is
    valid) instead of raising, so callers can decide severity. Group and
    hypothesis positions in the messages are 1-based.
    """
    violations: list[str] = []
    if n < 1:
        violations.append("n must be at least 1")
        return violations
    counts = np.zeros(n, dtype=np.intp)
    n_groups = 0
    for gi, group in enumerate(groups, start=1):
        n_groups += 1
        size = 0
        for raw in group:
            size += 1
            try:
                i = operator.index(raw)
            except TypeError:
                violations.append(f"group {gi} contains a non-integer index {raw!r}")
                continue
            if not 1 <= i <= n:
                violations.append(f"index {i} in group {gi} is outside 1..{n}")
            else:
                counts[i - 1] += 1
        if size == 0:
            violations.append(f"group {gi} is empty")
    if n_groups == 0:
        violations.append("a layer needs at least one group")
        return violations
    for i in np.flatnonzero(counts > 1):
        violations.append(f"index {int(i) + 1} appears in more than one group")
    for i in np.flatnonzero(counts == 0):
        violations.append(f"index {int(i) + 1} is not covered by any group")
    return violations


class Layer:
    """One partition of the hypotheses {1..n} into disjoint nonempty groups.

    Construction validates the partition and precomputes the index
    bookkeeping used by the selection machinery. Instances are immutable.
    """

    __slots__ = ("n", "groups", "_labels", "_members", "_index_matrix")

    def __init__(self, groups: Iterable[Iterable[int]], n: int):
        raw = [tuple(g) for g in groups]
        violations = validate_layer(raw, n)
        if violations:
            raise ValueError("invalid partition: " + "; ".join(violations))
        self.n = int(n)
        self.groups = tuple(tuple(sorted(operator.index(i) for i in g)) for g in raw)
        labels = np.empty(self.n, dtype=np.intp)
        members = []
        for g, idx in enumerate(self.groups):
            arr = np.asarray(idx, dtype=np.intp) - 1
            labels[arr] = g
            members.append(arr)
        self._labels = labels
        self._labels.flags.writeable = False
        self._members = members
        sizes = {m.size for m in members}
        if len(sizes) == 1:
            self._index_matrix = np.vstack(members)
        else:
            self._index_matrix = None

    @property
    def G(self) -> int:
        """Number of groups."""
        return len(self.groups)

    def group_of(self, i: int) -> int:
        """The 1-based group index containing hypothesis ``i`` (1-based)."""
        i = operator.index(i)
        if not 1 <= i <= self.n:
            raise IndexError(f"hypothesis index {i} outside 1..{self.n}")
        return int(self._labels[i - 1]) + 1

    def sizes(self) -> np.ndarray:
        return np.array([m.size for m in self._members], dtype=np.intp)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Layer":
        """Build a layer from one group label per hypothesis.

        Labels may be arbitrary hashables; group indices are assigned by
        first appearance in hypothesis order.
        """
        labels = list(labels)
        order: dict = {}
        groups: list[list[int]] = []
        for i, lab in enumerate(labels, start=1):
            g = order.get(lab)
            if g is None:
                g = len(groups)
                order[lab] = g
                groups.append([])
            groups[g].append(i)
        return cls(groups, len(labels))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Layer):
            return NotImplemented
        return self.n == other.n and self.groups == other.groups

    def __hash__(self) -> int:
        return hash((self.n, self.groups))

    def __repr__(self) -> str:
        return f"Layer(n={self.n}, G={self.G})"


def group_of(layer: Layer, i: int) -> int:
    """The unique group of ``layer`` containing hypothesis ``i`` (1-based)."""
    return layer.group_of(i)


def finest_layer(n: int) -> Layer:
    """The partition of {1..n} into n singleton groups, in index order."""
    return Layer(((i,) for i in range(1, n + 1)), n)


def coarsest_layer(n: int) -> Layer:
    """The partition of {1..n} into a single group."""
    return Layer((tuple(range(1, n + 1)),), n)


@dataclass(frozen=True)
class MultiLayerProblem:
    """p-values plus M layers and their per-layer target FDR levels.

    Levels above 1 are accepted; any ``alpha_m >= G_m`` makes layer m's
    constraint vacuous, which is the standard way to switch a layer off
    while keeping its bookkeeping.
    """

    pvalues: np.ndarray
    layers: tuple[Layer, ...]
    alphas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "pvalues", as_pvalues(self.pvalues))
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if len(self.layers) < 1:
            raise ValueError("need at least one layer")
        if len(self.alphas) != len(self.layers):
            raise ValueError(
                f"{len(self.layers)} layers but {len(self.alphas)} alphas"
            )
        n = self.pvalues.size
        for pos, layer in enumerate(self.layers, start=1):
            if not isinstance(layer, Layer):
                raise TypeError(f"layer {pos} is not a Layer")
            if layer.n != n:
                raise ValueError(
                    f"layer {pos} partitions 1..{layer.n}, but there are {n} p-values"
                )
        for pos, a in enumerate(self.alphas, start=1):
            if not np.isfinite(a) or a < 0:
                raise ValueError(f"alpha {pos} must be a finite value >= 0, got {a!r}")

    @property
    def n(self) -> int:
        return self.pvalues.size

    @property
    def M(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class TruthSet:
    """Ground-truth null hypotheses (1-based indices), for scoring."""

    nulls: frozenset[int]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "nulls", frozenset(int(i) for i in self.nulls))
        for i in self.nulls:
            if not 1 <= i <= self.n:
                raise ValueError(f"null index {i} outside 1..{self.n}")

    def null_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        if self.nulls:
            mask[np.fromiter(self.nulls, dtype=np.intp) - 1] = True
        return mask

    def null_groups(self, layer: Layer) -> frozenset[int]:
        """Groups of ``layer`` consisting entirely of true nulls (1-based)."""
        if layer.n != self.n:
            raise ValueError("layer size does not match truth set")
        signal = (~self.null_mask()).astype(np.intp)
        per_group = np.bincount(layer._labels, weights=signal, minlength=layer.G)
        return frozenset((np.flatnonzero(per_group == 0) + 1).tolist())
