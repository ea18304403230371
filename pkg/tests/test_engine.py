import itertools

import numpy as np
import pytest

from pfilter import (
    Layer,
    MultiLayerProblem,
    bh_khat,
    bh_reject,
    brute_force_pfilter,
    coarsest_layer,
    estimated_fdp,
    finest_layer,
    group_simes,
    layer_selection,
    pfilter,
    random_problem,
    selection_set,
    simes,
    threshold_update,
)

TWO_LAYER = (finest_layer(2), coarsest_layer(2))


def two_layer_problem(alphas=(0.2, 0.2)):
    return MultiLayerProblem([0.05, 0.9], TWO_LAYER, alphas)


class TestSelectionSet:
    def test_single_finest_layer(self):
        assert selection_set([0.05, 0.9], [finest_layer(2)], [0.1]) == {1}

    def test_two_layers_derived(self):
        # Simes(P) = min(0.05*2/1, 0.9*2/2) = 0.1 <= 0.2, and 0.05 <= 0.1
        assert simes([0.05, 0.9]) == 0.1
        assert selection_set([0.05, 0.9], TWO_LAYER, [0.1, 0.2]) == {1}

    def test_all_zero_thresholds(self):
        assert selection_set([0.3, 0.4], TWO_LAYER, [0.0, 0.0]) == set()

    def test_zero_pvalue_passes_zero_threshold(self):
        assert selection_set([0.0, 0.5], [finest_layer(2)], [0.0]) == {1}

    def test_threshold_count_mismatch(self):
        with pytest.raises(ValueError):
            selection_set([0.1], [finest_layer(1)], [0.1, 0.2])

    def test_monotone_in_thresholds(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            prob = random_problem(rng)
            lo = [float(a * rng.integers(0, L.G + 1) / L.G)
                  for a, L in zip(prob.alphas, prob.layers)]
            hi = [v + float(rng.uniform(0, 0.3)) for v in lo]
            s_lo = selection_set(prob.pvalues, prob.layers, lo)
            s_hi = selection_set(prob.pvalues, prob.layers, hi)
            assert s_lo <= s_hi


class TestLayerSelection:
    def test_empty(self):
        assert layer_selection(set(), coarsest_layer(4)) == set()

    def test_single(self):
        assert layer_selection({1}, Layer([[1, 2], [3, 4]], 4)) == {1}

    def test_straddling(self):
        assert layer_selection({2, 3}, Layer([[1, 2], [3, 4]], 4)) == {1, 2}

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            layer_selection({9}, Layer([[1, 2], [3, 4]], 4))


class TestEstimatedFdp:
    def test_examples(self):
        assert estimated_fdp(0.2, 2, 1) == 0.4
        assert estimated_fdp(0.0, 5, 0) == 0.0
        assert estimated_fdp(0.2, 1, 1) == 0.2

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            estimated_fdp(-0.1, 1, 1)


class TestThresholdUpdate:
    def test_derived_two_layer_example(self):
        # k=2 infeasible (2 > |S_1|=1), k=1 feasible
        out = threshold_update([0.05, 0.9], TWO_LAYER, (0.2, 0.2), 1, 0.2)
        assert out == 0.2 * 1 / 2

    def test_already_feasible_state_unchanged(self):
        out = threshold_update([0.05, 0.9], TWO_LAYER, (0.1, 0.2), 1, 0.2)
        assert out == 0.1

    def test_all_ones_keeps_the_free_grid_step(self):
        # with no selections, T = alpha/G still satisfies G*T/(1 v 0) <= alpha,
        # so the update stops at grid index 1, not 0
        out = threshold_update([1.0, 1.0, 1.0], [finest_layer(3)], (0.2,), 1, 0.2)
        assert out == 0.2 * 1 / 3
        sel = selection_set([1.0, 1.0, 1.0], [finest_layer(3)], [out])
        assert sel == set()

    def test_accepts_threshold_vector(self):
        rep = pfilter(two_layer_problem())
        out = threshold_update([0.05, 0.9], TWO_LAYER, rep.thresholds, 2, 0.2)
        assert out == rep.thresholds.values[1]

    def test_bad_layer_position(self):
        with pytest.raises(ValueError):
            threshold_update([0.5], [finest_layer(1)], (0.1,), 0, 0.1)


class TestPfilter:
    def test_hand_traced_example(self):
        rep = pfilter(two_layer_problem())
        assert rep.thresholds.values == (0.1, 0.2)
        assert rep.thresholds.indices == (1, 1)
        assert rep.selected == frozenset({1})
        assert rep.layer_selected == (frozenset({1}), frozenset({1}))

    def test_single_finest_layer_equals_bh(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            n = int(rng.integers(1, 20))
            p = rng.uniform(size=n)
            if rng.integers(2):
                p = np.round(p, 1)
            alpha = float(rng.choice([0.05, 0.1, 0.2, 0.5]))
            rep = pfilter(MultiLayerProblem(p, (finest_layer(n),), (alpha,)))
            assert set(rep.selected) == bh_reject(p, alpha)

    def test_single_coarsest_layer_equals_simes_test(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            n = int(rng.integers(1, 20))
            p = rng.uniform(size=n)
            alpha = float(rng.choice([0.05, 0.1, 0.2, 0.5]))
            rep = pfilter(MultiLayerProblem(p, (coarsest_layer(n),), (alpha,)))
            assert bool(rep.selected) == (simes(p) <= alpha)

    def test_vacuous_extra_layers_equal_bh(self):
        rng = np.random.default_rng(14)
        for _ in range(200):
            n = int(rng.integers(2, 16))
            p = rng.uniform(size=n)
            alpha = float(rng.choice([0.05, 0.1, 0.2, 0.5]))
            extra = Layer.from_labels(rng.integers(0, max(2, n // 2), size=n))
            prob = MultiLayerProblem(
                p, (finest_layer(n), extra), (alpha, float(extra.G))
            )
            assert set(pfilter(prob).selected) == bh_reject(p, alpha)

    def test_alpha_zero_selects_nothing(self):
        rng = np.random.default_rng(15)
        p = rng.uniform(0.01, 1.0, size=8)
        prob = MultiLayerProblem(p, (finest_layer(8), coarsest_layer(8)), (0.0, 0.0))
        rep = pfilter(prob)
        assert rep.thresholds.values == (0.0, 0.0)
        assert rep.selected == frozenset()

    def test_conservative_vs_bh_per_instance(self):
        rng = np.random.default_rng(16)
        for _ in range(200):
            n = int(rng.integers(2, 16))
            p = rng.uniform(size=n)
            alpha = float(rng.choice([0.05, 0.1, 0.2, 0.5]))
            extra = Layer.from_labels(rng.integers(0, max(2, n // 3), size=n))
            prob = MultiLayerProblem(p, (finest_layer(n), extra), (alpha, alpha))
            assert set(pfilter(prob).selected) <= bh_reject(p, alpha)

    def test_report_internal_consistency(self):
        rng = np.random.default_rng(18)
        for _ in range(150):
            prob = random_problem(rng)
            rep = pfilter(prob)
            assert set(rep.selected) == selection_set(
                prob.pvalues, prob.layers, rep.thresholds
            )
            for mi, layer in enumerate(prob.layers):
                expected = layer_selection(rep.selected, layer)
                assert set(rep.layer_selected[mi]) == expected
                for i in rep.selected:
                    assert layer.group_of(i) in rep.layer_selected[mi]

    def test_output_contract(self):
        rng = np.random.default_rng(19)
        for _ in range(150):
            prob = random_problem(rng)
            rep = pfilter(prob)
            budget = sum(L.G for L in prob.layers) + 1
            assert 1 <= rep.passes <= budget
            assert len(rep.trace) == rep.passes
            for mi, (layer, alpha) in enumerate(zip(prob.layers, prob.alphas)):
                k = rep.thresholds.indices[mi]
                assert 0 <= k <= layer.G
                assert rep.thresholds.values[mi] == alpha * k / layer.G
                assert rep.estimated_fdps[mi] <= alpha
                assert rep.estimated_fdps[mi] == pytest.approx(
                    estimated_fdp(
                        rep.thresholds.values[mi], layer.G, len(rep.layer_selected[mi])
                    )
                )

    def test_layer_order_invariance(self):
        rng = np.random.default_rng(21)
        for _ in range(150):
            prob = random_problem(rng, max_m=3)
            if prob.M == 1:
                continue
            rep = pfilter(prob)
            perm = rng.permutation(prob.M)
            shuffled = MultiLayerProblem(
                prob.pvalues,
                tuple(prob.layers[i] for i in perm),
                tuple(prob.alphas[i] for i in perm),
            )
            rep2 = pfilter(shuffled)
            assert rep2.thresholds.indices == tuple(
                rep.thresholds.indices[i] for i in perm
            )
            assert rep2.selected == rep.selected


class TestBruteForce:
    def test_agrees_on_hand_traced_example(self):
        bf = brute_force_pfilter(two_layer_problem())
        assert bf.indices == (1, 1)
        assert bf.values == (0.1, 0.2)

    def test_single_finest_corner_tracks_bh(self):
        rng = np.random.default_rng(22)
        for _ in range(100):
            n = int(rng.integers(1, 12))
            p = rng.uniform(size=n)
            alpha = float(rng.choice([0.05, 0.1, 0.2, 0.5]))
            bf = brute_force_pfilter(MultiLayerProblem(p, (finest_layer(n),), (alpha,)))
            # the k=1 step is always admissible (its estimated FDP is exactly
            # alpha even with nothing selected), so the corner is max(khat, 1)
            assert bf.indices == (max(bh_khat(p, alpha), 1),)

    def test_all_ones_corner(self):
        prob = MultiLayerProblem(
            [1.0, 1.0, 1.0, 1.0], (finest_layer(4), coarsest_layer(4)), (0.2, 0.2)
        )
        bf = brute_force_pfilter(prob)
        assert bf.indices == (1, 1)
        assert pfilter(prob).thresholds == bf
        assert pfilter(prob).selected == frozenset()

    def test_oracle_equivalence_random(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            prob = random_problem(rng)
            assert pfilter(prob).thresholds == brute_force_pfilter(prob)

    def test_membership_definition_cross_check(self):
        # re-derive admissibility from public pieces on a tiny instance
        rng = np.random.default_rng(77)
        prob = random_problem(rng, max_n=6, max_m=2)
        bf = brute_force_pfilter(prob)
        best = [-1] * prob.M
        for ks in itertools.product(*[range(L.G + 1) for L in prob.layers]):
            t = [a * k / L.G for a, k, L in zip(prob.alphas, ks, prob.layers)]
            sel = selection_set(prob.pvalues, prob.layers, t)
            ok = True
            for mi, layer in enumerate(prob.layers):
                count = len(layer_selection(sel, layer))
                if estimated_fdp(t[mi], layer.G, count) > prob.alphas[mi] + 1e-12:
                    ok = False
            if ok:
                best = [max(b, k) for b, k in zip(best, ks)]
        assert tuple(best) == bf.indices

    def test_enumeration_guard(self):
        layers = (finest_layer(400), coarsest_layer(400))
        big = Layer.from_labels(np.arange(400) % 200)
        prob = MultiLayerProblem(
            np.full(400, 0.5), (layers[0], big, Layer.from_labels(np.arange(400) % 150)),
            (0.2, 0.2, 0.2),
        )
        with pytest.raises(ValueError, match="refusing"):
            brute_force_pfilter(prob)

    def test_grid_search_is_lossless(self):
        # any admissible real threshold for one layer is dominated by an
        # admissible grid point, so restricting the update to the grid
        # cannot change the fixed point
        rng = np.random.default_rng(55)
        for _ in range(100):
            prob = random_problem(rng, max_n=10, max_m=2)
            rep = pfilter(prob)
            for mi, layer in enumerate(prob.layers):
                alpha = prob.alphas[mi]
                tvals = list(rep.thresholds.values)
                for T in rng.uniform(0, max(alpha, 1e-9), size=8):
                    probe = list(tvals)
                    probe[mi] = float(T)
                    sel = selection_set(prob.pvalues, prob.layers, probe)
                    count = len(layer_selection(sel, layer))
                    if estimated_fdp(T, layer.G, count) <= alpha:
                        assert T <= rep.thresholds.values[mi] + 1e-12


class TestRandomProblem:
    def test_shapes_and_ranges(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            prob = random_problem(rng, max_n=12, max_m=3)
            assert 1 <= prob.n <= 12
            assert 1 <= prob.M <= 3
            for a in prob.alphas:
                assert a in (0.05, 0.1, 0.2, 0.5)
