"""Simultaneous false-discovery-rate control across multiple partitions.

Given n p-values and M arbitrary (possibly non-hierarchical) partitions of
the hypotheses into groups, the filter selects a single set of discoveries
whose group-level FDR is controlled in every partition at once. With one
singleton partition it reduces exactly to the Benjamini-Hochberg procedure;
with one whole-set partition, to the Simes test of the global null.

The package also ships the classical building blocks (Simes, BH, group
Simes+BH), a two-step group-screening baseline, a brute-force oracle for
the threshold fixed point, and a seeded Monte-Carlo harness that verifies
the distributional guarantees empirically.
"""

from .classic import bh_khat, bh_reject, group_simes, group_simes_bh, simes
from .comparators import BBReport, bb_flatten, bb_procedure
from .core import (
    Layer,
    MultiLayerProblem,
    TruthSet,
    as_pvalues,
    coarsest_layer,
    finest_layer,
    group_of,
    validate_layer,
)
from .engine import (
    BRUTE_FORCE_LIMIT,
    DiscoveryReport,
    ThresholdVector,
    brute_force_pfilter,
    estimated_fdp,
    layer_selection,
    pfilter,
    random_problem,
    selection_set,
    threshold_update,
)
from .simulate import (
    AggregateMetrics,
    GlobalNullCheck,
    McEstimate,
    SignalPattern,
    TrialMetrics,
    design_grid,
    design_grouped,
    fdp_and_power,
    gen_pvalues,
    global_null_check,
    lemma1_check,
    run_trials,
    std_normal_cdf,
    std_normal_sample,
    trial_rng,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "as_pvalues",
    "validate_layer",
    "Layer",
    "group_of",
    "finest_layer",
    "coarsest_layer",
    "MultiLayerProblem",
    "TruthSet",
    # classic
    "simes",
    "group_simes",
    "bh_khat",
    "bh_reject",
    "group_simes_bh",
    # engine
    "ThresholdVector",
    "DiscoveryReport",
    "selection_set",
    "layer_selection",
    "estimated_fdp",
    "threshold_update",
    "pfilter",
    "brute_force_pfilter",
    "random_problem",
    "BRUTE_FORCE_LIMIT",
    # comparators
    "BBReport",
    "bb_procedure",
    "bb_flatten",
    # simulate
    "SignalPattern",
    "TrialMetrics",
    "AggregateMetrics",
    "McEstimate",
    "GlobalNullCheck",
    "std_normal_cdf",
    "std_normal_sample",
    "gen_pvalues",
    "design_grouped",
    "design_grid",
    "fdp_and_power",
    "trial_rng",
    "run_trials",
    "lemma1_check",
    "global_null_check",
]
