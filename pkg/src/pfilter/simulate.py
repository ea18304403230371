"""Monte-Carlo harness: Gaussian one-sided p-values, benchmark signal
designs, per-layer FDP/power scoring, and empirical checks of the
distributional guarantees.

Every routine is deterministic given its seed. Trial k draws from a child
generator keyed by (seed, k), so aggregates do not depend on trial order
and trials can safely run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from .classic import bh_khat, bh_reject
from .comparators import bb_flatten, bb_procedure
from .core import Layer, MultiLayerProblem, TruthSet, coarsest_layer, finest_layer
from .engine import layer_selection, pfilter

__all__ = [
    "std_normal_cdf",
    "std_normal_sample",
    "SignalPattern",
    "gen_pvalues",
    "design_grouped",
    "design_grid",
    "fdp_and_power",
    "TrialMetrics",
    "AggregateMetrics",
    "McEstimate",
    "GlobalNullCheck",
    "trial_rng",
    "run_trials",
    "lemma1_check",
    "global_null_check",
]

METHOD_NAMES = ("pfilter", "bh", "bb")


def std_normal_cdf(x):
    """Standard normal CDF (erf-based; absolute error well below 1e-12)."""
    return ndtr(x)


def std_normal_sample(rng: np.random.Generator, size=None):
    """Standard normal draw(s) from the given generator."""
    return rng.standard_normal(size)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Child generator for one trial, independent of trial order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


@dataclass(frozen=True)
class SignalPattern:
    """Per-hypothesis signal strengths: 0 marks a true null, > 0 a signal."""

    mu: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.mu, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("mu must be a nonempty 1-d array")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("mu entries must be finite and >= 0")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "mu", arr)

    @property
    def n(self) -> int:
        return self.mu.size

    @property
    def n_signals(self) -> int:
        return int((self.mu > 0).sum())

    def truth_set(self) -> TruthSet:
        nulls = frozenset((np.flatnonzero(self.mu == 0) + 1).tolist())
        return TruthSet(nulls=nulls, n=self.n)


def gen_pvalues(pattern: SignalPattern, rng: np.random.Generator) -> np.ndarray:
    """One-sided p-values 1 - Phi(mu_i + Z_i) with independent normal noise.

    Null coordinates (mu = 0) are exactly Uniform[0, 1]; larger mu makes
    small p-values more likely.
    """
    x = pattern.mu + rng.standard_normal(pattern.n)
    return 1.0 - ndtr(x)


def design_grouped(mu: float = 1.0) -> tuple[SignalPattern, list[Layer]]:
    """Block-sparse benchmark: 1000 hypotheses in 100 contiguous groups of 10.

    Group j carries j signals in its first j positions, for j = 1..10, so
    there are 55 signals and 90 entirely-null groups. Layers: singletons,
    then the 100 groups.
    """
    n = 1000
    strengths = np.zeros(n)
    for j in range(1, 11):
        start = (j - 1) * 10
        strengths[start : start + j] = mu
    groups = [range(g * 10 + 1, g * 10 + 11) for g in range(100)]
    return SignalPattern(strengths), [finest_layer(n), Layer(groups, n)]


def design_grid(mu: float = 1.0) -> tuple[SignalPattern, list[Layer]]:
    """Row/column benchmark: 10000 hypotheses on a 100 x 100 grid, row-major.

    Signals: two 15 x 15 blocks (rows 1-15 x cols 1-15 and rows 16-30 x
    cols 16-30) plus 15 isolated signals at (31, 31), (33, 33), ..., (59, 59),
    each alone in its row and column. 465 signals total. Layers: entries,
    rows (100 groups), columns (100 groups).
    """
    side = 100
    n = side * side
    strengths = np.zeros((side, side))
    strengths[0:15, 0:15] = mu
    strengths[15:30, 15:30] = mu
    for k in range(15):
        rc = 30 + 2 * k
        strengths[rc, rc] = mu
    rows = [range(r * side + 1, (r + 1) * side + 1) for r in range(side)]
    cols = [range(c + 1, n + 1, side) for c in range(side)]
    return (
        SignalPattern(strengths.ravel()),
        [finest_layer(n), Layer(rows, n), Layer(cols, n)],
    )


_DESIGNS: dict[str, Callable] = {"grouped": design_grouped, "grid": design_grid}


def fdp_and_power(selected, layer: Layer, truth: TruthSet) -> tuple[float, float]:
    """Group-level false discovery proportion and power of a selection.

    FDP counts selected all-null groups over max(1, #selected groups);
    power counts selected non-null groups over max(1, #non-null groups).
    On a singleton layer these are the usual hypothesis-level quantities.
    """
    chosen = layer_selection(selected, layer)
    null_groups = truth.null_groups(layer)
    n_false = len(chosen & null_groups)
    n_nonnull = layer.G - len(null_groups)
    fdp = n_false / max(1, len(chosen))
    power = (len(chosen) - n_false) / max(1, n_nonnull)
    return fdp, power


@dataclass(frozen=True)
class TrialMetrics:
    """Per-layer scores for a single simulated trial."""

    fdp: tuple[float, ...]
    power: tuple[float, ...]
    selected_groups: tuple[int, ...]


@dataclass(frozen=True)
class AggregateMetrics:
    """Monte-Carlo means and standard errors, per layer."""

    fdr: tuple[float, ...]
    power: tuple[float, ...]
    se_fdr: tuple[float, ...]
    se_power: tuple[float, ...]
    trials: int


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    se: float
    trials: int


def _score_mask(
    sel_mask: np.ndarray, labels: np.ndarray, G: int, nullgrp: np.ndarray
) -> tuple[float, float, int]:
    gsel = np.bincount(labels[sel_mask], minlength=G) > 0
    n_sel = int(gsel.sum())
    n_false = int((gsel & nullgrp).sum())
    n_nonnull = int((~nullgrp).sum())
    fdp = n_false / max(1, n_sel)
    power = (n_sel - n_false) / max(1, n_nonnull)
    return fdp, power, n_sel


class _RunningMoments:
    """Sum-based accumulator, insensitive to accumulation order."""

    def __init__(self, m: int):
        self.n = 0
        self.s = np.zeros(m)
        self.ss = np.zeros(m)

    def add(self, x: np.ndarray):
        self.n += 1
        self.s += x
        self.ss += x * x

    def summary(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        mean = self.s / self.n
        if self.n > 1:
            var = np.maximum(self.ss - self.n * mean * mean, 0.0) / (self.n - 1)
            se = np.sqrt(var / self.n)
        else:
            se = np.zeros_like(mean)
        return tuple(float(v) for v in mean), tuple(float(v) for v in se)


def run_trials(
    design,
    methods: Sequence[str],
    alphas: Sequence[float],
    mu: float,
    n_trials: int,
    seed: int,
    on_trial: Callable[[int, np.ndarray, dict[str, set[int]]], None] | None = None,
) -> dict[str, AggregateMetrics]:
    """Score methods on shared p-value draws and aggregate per-layer metrics.

    Parameters
    ----------
    design : "grouped", "grid", or a callable mu -> (SignalPattern, layers).
    methods : subset of {"pfilter", "bh", "bb"}. "bh" runs at alphas[0] on
        the raw p-values; "bb" screens on layer 2 of the design at alphas[1]
        and tests within groups at a level derived from alphas[0].
    alphas : one target level per layer of the design.
    mu : signal strength passed to the design.
    n_trials, seed : trial k uses the child generator ``trial_rng(seed, k)``.
    on_trial : optional hook called with (k, pvalues, {method: selection})
        after each trial, e.g. for per-trial invariant checks.

    Returns a dict method -> AggregateMetrics. Deterministic given inputs.
    """
    make = _DESIGNS.get(design, design)
    if not callable(make):
        raise ValueError(f"unknown design {design!r}")
    methods = list(methods)
    for name in methods:
        if name not in METHOD_NAMES:
            raise ValueError(f"unknown method {name!r}; choose from {METHOD_NAMES}")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    pattern, layers = make(mu)
    layers = tuple(layers)
    M = len(layers)
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) != M:
        raise ValueError(f"design has {M} layers but {len(alphas)} alphas given")
    if "bb" in methods and M < 2:
        raise ValueError("bb needs the design's layer 2 as its grouping layer")
    truth = pattern.truth_set()
    n = pattern.n
    nullgrp = [
        np.isin(np.arange(1, layer.G + 1), sorted(truth.null_groups(layer)))
        for layer in layers
    ]
    acc = {name: _RunningMoments(2 * M) for name in methods}

    for k in range(n_trials):
        rng = trial_rng(seed, k)
        p = gen_pvalues(pattern, rng)
        selections: dict[str, set[int]] = {}
        for name in methods:
            if name == "pfilter":
                report = pfilter(MultiLayerProblem(p, layers, alphas))
                selections[name] = set(report.selected)
            elif name == "bh":
                selections[name] = bh_reject(p, alphas[0])
            else:
                selections[name] = bb_flatten(
                    bb_procedure(p, layers[1], alphas[1], alphas[0])
                )
        if on_trial is not None:
            on_trial(k, p, selections)
        for name in methods:
            sel_mask = np.zeros(n, dtype=bool)
            if selections[name]:
                sel_mask[np.fromiter(selections[name], dtype=np.intp) - 1] = True
            row = np.empty(2 * M)
            for mi, layer in enumerate(layers):
                fdp, power, _ = _score_mask(sel_mask, layer._labels, layer.G, nullgrp[mi])
                row[mi] = fdp
                row[M + mi] = power
            acc[name].add(row)

    out = {}
    for name in methods:
        mean, se = acc[name].summary()
        out[name] = AggregateMetrics(
            fdr=mean[:M],
            power=mean[M:],
            se_fdr=se[:M],
            se_power=se[M:],
            trials=n_trials,
        )
    return out


def lemma1_check(
    alpha: float,
    n: int,
    n_trials: int,
    seed: int,
    fixed_threshold: float | None = None,
) -> McEstimate:
    """Estimate E[ 1{P_1 <= f(P)} / f(P) ] under n independent uniforms.

    By default f is the realized BH cutoff alpha * khat / n, a nonincreasing
    function of P, so the true mean is at most 1; with ``fixed_threshold``
    set, f is that constant and the true mean is exactly 1. Terms with
    f = 0 score 0 (the 0/0 convention).
    """
    a = float(alpha)
    if a < 0:
        raise ValueError("alpha must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    P = rng.uniform(size=(n_trials, n))
    if fixed_threshold is None:
        S = np.sort(P, axis=1)
        ok = S <= a * np.arange(1, n + 1) / n
        khat = np.where(ok.any(axis=1), n - np.argmax(ok[:, ::-1], axis=1), 0)
        f = a * khat / n
    else:
        f = np.full(n_trials, float(fixed_threshold))
    terms = np.zeros(n_trials)
    hit = (f > 0) & (P[:, 0] <= f)
    terms[hit] = 1.0 / f[hit]
    mean = float(terms.mean())
    se = float(terms.std(ddof=1) / np.sqrt(n_trials)) if n_trials > 1 else 0.0
    return McEstimate(mean, se, n_trials)


@dataclass(frozen=True)
class GlobalNullCheck:
    """Any-rejection rates under the global null, with their targets."""

    target: float
    filter_rate: McEstimate
    bh_rate: McEstimate


def global_null_check(
    alpha1: float, alpha2: float, n: int, n_trials: int, seed: int
) -> GlobalNullCheck:
    """P(any rejection) under independent uniforms for the two-layer filter
    (singletons at alpha1 plus one whole-set group at alpha2) and for BH
    alone at alpha1.

    The filter's true rate is min(alpha1, alpha2); BH's is alpha1.
    """
    layers = (finest_layer(n), coarsest_layer(n))
    alphas = (float(alpha1), float(alpha2))
    hits_filter = 0
    hits_bh = 0
    for k in range(n_trials):
        rng = trial_rng(seed, k)
        p = rng.uniform(size=n)
        report = pfilter(MultiLayerProblem(p, layers, alphas))
        hits_filter += bool(report.selected)
        hits_bh += bh_khat(p, alphas[0]) >= 1

    def rate(hits: int) -> McEstimate:
        r = hits / n_trials
        return McEstimate(r, float(np.sqrt(r * (1.0 - r) / n_trials)), n_trials)

    return GlobalNullCheck(min(alphas), rate(hits_filter), rate(hits_bh))
