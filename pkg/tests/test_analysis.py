from __future__ import annotations

import numpy as np
import pytest

from orderscope import (
    AnalysisError,
    aggregate_mean,
    distance_to_first,
    histogram,
    pca,
    recurrence_series,
)

from conftest import deterministic_features
from oracles import (
    histogram_counts_brute,
    random_unit_features,
    recurrence_brute,
    rotation_matrix,
    trapezoid_mean,
)


class TestRecurrence:
    def test_scalar_ramp_example(self):
        out = recurrence_series(np.array([0.0, 1.0, 2.0, 3.0, 4.0]), width=2)
        np.testing.assert_array_equal(out, [2.0, 2.0, 2.0, 2.0, 2.0])

    def test_alternating_is_zero(self):
        out = recurrence_series(np.array([0.0, 1.0, 0.0, 1.0, 0.0]), width=2)
        np.testing.assert_array_equal(out, np.zeros(5))

    def test_periodic_multivariate_is_zero(self):
        period = 25
        feats = deterministic_features(period, 4)
        tiled = np.tile(feats, (4, 1))
        out = recurrence_series(tiled, width=10)
        np.testing.assert_array_equal(out, np.zeros(100))

    def test_matches_brute_force_bitwise(self):
        rng = np.random.default_rng(7)
        for width in (1, 2, 3, 10, 25):
            steps = max(width * 2 + 5, 60)
            feats = random_unit_features(rng, steps, 7)
            fast = recurrence_series(feats, width)
            slow = recurrence_brute(feats, width)
            assert fast.tobytes() == slow.tobytes()

    def test_searches_both_directions(self):
        # The only near-return of step 0 lies forward; of the last, backward.
        x = np.array([0.0, 5.0, 10.0, 15.0, 0.5, 20.0, 30.0, 40.0])
        out = recurrence_series(x, width=2)
        assert out[0] == 0.5
        assert out[4] == 0.5

    def test_rotation_invariance(self):
        rng = np.random.default_rng(11)
        feats = random_unit_features(rng, 80, 5)
        rot = rotation_matrix(rng)
        blocks = feats.reshape(80, 5, 3) @ rot.T
        rotated = blocks.reshape(80, 15)
        base = recurrence_series(feats, 10)
        turned = recurrence_series(rotated, 10)
        assert np.abs(base - turned).max() <= 1e-9

    def test_width_validation(self):
        with pytest.raises(AnalysisError):
            recurrence_series(np.zeros((30, 3)), width=0)

    def test_short_window_rejected(self):
        # Below max(width + 2, 2 * width) some step has no admissible pair.
        with pytest.raises(AnalysisError):
            recurrence_series(np.zeros((3, 3)), width=2)
        with pytest.raises(AnalysisError):
            recurrence_series(np.zeros((19, 3)), width=10)
        recurrence_series(np.zeros((20, 3)), width=10)

    def test_minimum_length_boundary(self):
        for width in (1, 2, 3, 5):
            need = max(width + 2, 2 * width)
            feats = deterministic_features(need, 2)
            out = recurrence_series(feats, width)
            assert np.isfinite(out).all()
            with pytest.raises(AnalysisError):
                recurrence_series(feats[: need - 1], width)


class TestDistanceToFirst:
    def test_scalar_example(self):
        out = distance_to_first(np.array([3.0, 4.0, 1.0]))
        np.testing.assert_array_equal(out, [0.0, 1.0, 2.0])

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(3)
        feats = random_unit_features(rng, 50, 7)
        expected = np.sqrt(((feats - feats[0]) ** 2).sum(axis=1))
        assert distance_to_first(feats).tobytes() == expected.tobytes()


class TestPca:
    def test_line_segment_is_one_dimensional(self):
        t = np.linspace(0, 1, 50)
        direction = np.array([3.0, 0.0, 4.0]) / 5.0
        feats = np.outer(t, direction)
        result = pca(feats)
        assert result.intrinsic_dim == 1
        assert result.explained_variance_ratio[0] == pytest.approx(1.0)
        assert not result.degenerate

    def test_circle_embedded_in_high_dim(self):
        t = np.linspace(0, 2 * np.pi, 200, endpoint=False)
        rng = np.random.default_rng(0)
        basis, _ = np.linalg.qr(rng.normal(size=(21, 2)))
        feats = np.cos(t)[:, None] * basis[:, 0] + np.sin(t)[:, None] * basis[:, 1]
        result = pca(feats, var_threshold=0.999)
        assert result.intrinsic_dim == 2

    def test_components_are_orthonormal(self):
        rng = np.random.default_rng(5)
        feats = random_unit_features(rng, 100, 7)
        result = pca(feats)
        gram = result.components @ result.components.T
        assert np.abs(gram - np.eye(21)).max() <= 1e-9

    def test_full_reconstruction(self):
        rng = np.random.default_rng(6)
        feats = random_unit_features(rng, 60, 4)
        result = pca(feats)
        centered = feats - result.mean
        scores = centered @ result.components.T
        rebuilt = scores @ result.components + result.mean
        assert np.abs(rebuilt - feats).max() <= 1e-9

    def test_ratios_sorted_and_sum_to_one(self):
        rng = np.random.default_rng(8)
        feats = random_unit_features(rng, 90, 5)
        ratio = pca(feats).explained_variance_ratio
        assert np.all(np.diff(ratio) <= 1e-15)
        assert ratio.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(ratio >= 0.0)

    def test_projection_cap(self):
        rng = np.random.default_rng(9)
        feats = random_unit_features(rng, 80, 7)
        capped = pca(feats, var_threshold=1.0, max_components=3)
        assert capped.projected.shape == (80, 3)
        assert capped.intrinsic_dim > 3
        assert capped.components.shape == (21, 21)

    def test_sign_convention_is_deterministic(self):
        rng = np.random.default_rng(10)
        feats = random_unit_features(rng, 70, 3)
        a = pca(feats)
        b = pca(feats.copy())
        assert a.components.tobytes() == b.components.tobytes()
        pivots = np.argmax(np.abs(a.components), axis=1)
        assert np.all(a.components[np.arange(9), pivots] > 0)

    def test_constant_trajectory_is_degenerate(self):
        feats = np.ones((10, 6))
        result = pca(feats)
        assert result.degenerate
        assert result.intrinsic_dim == 0
        assert result.projected.shape == (10, 0)
        np.testing.assert_array_equal(result.explained_variance_ratio, np.zeros(6))

    def test_sample_permutation_changes_nothing_spectral(self):
        rng = np.random.default_rng(12)
        feats = random_unit_features(rng, 40, 4)
        perm = rng.permutation(40)
        a = pca(feats)
        b = pca(feats[perm])
        assert np.abs(a.explained_variance_ratio - b.explained_variance_ratio).max() <= 1e-12
        assert a.intrinsic_dim == b.intrinsic_dim

    def test_parameter_validation(self):
        feats = np.ones((10, 3))
        with pytest.raises(AnalysisError):
            pca(feats, var_threshold=0.0)
        with pytest.raises(AnalysisError):
            pca(feats, var_threshold=1.5)
        with pytest.raises(AnalysisError):
            pca(feats, max_components=0)
        with pytest.raises(AnalysisError):
            pca(np.ones((1, 3)))


class TestHistogram:
    def test_two_bin_example(self):
        h = histogram(np.array([0.0, 0.0, 1.0, 1.0]), bins=2)
        np.testing.assert_array_equal(h.bin_edges, [0.0, 0.5, 1.0])
        np.testing.assert_array_equal(h.counts, [2, 2])

    def test_maximum_lands_in_last_bin(self):
        h = histogram(np.array([0.0, 0.25, 0.5, 0.75, 1.0]), bins=4)
        np.testing.assert_array_equal(h.counts, [1, 1, 1, 2])

    def test_degenerate_range_single_bin(self):
        h = histogram(np.full(7, 3.0), bins=20)
        np.testing.assert_array_equal(h.bin_edges, [2.5, 3.5])
        np.testing.assert_array_equal(h.counts, [7])

    def test_counts_conserved_and_match_brute(self):
        rng = np.random.default_rng(13)
        values = rng.normal(size=500)
        h = histogram(values, bins=17)
        assert h.counts.sum() == 500
        np.testing.assert_array_equal(
            h.counts, histogram_counts_brute(values, h.bin_edges)
        )

    def test_validation(self):
        with pytest.raises(AnalysisError):
            histogram(np.array([]), bins=4)
        with pytest.raises(AnalysisError):
            histogram(np.array([1.0]), bins=0)


class TestAggregateMean:
    def test_plain_mean(self):
        assert aggregate_mean(np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, 2.0])) == 2.0

    def test_time_weighted_uniform_equals_trapezoid(self):
        values = np.array([1.0, 2.0, 3.0, 4.0])
        times = np.array([0.0, 1.0, 2.0, 3.0])
        got = aggregate_mean(values, times, time_weighted=True)
        # Uniform sampling: weights [1/2, 1, 1, 1/2] * dt.
        expected = (0.5 * 1 + 1 * 2 + 1 * 3 + 0.5 * 4) / 3.0
        assert got == pytest.approx(expected, abs=1e-15)

    def test_time_weighted_constant_series(self):
        times = np.array([0.0, 0.1, 5.0, 5.1, 9.0])
        assert aggregate_mean(np.full(5, 2.5), times, time_weighted=True) == pytest.approx(
            2.5, abs=1e-15
        )

    def test_time_weighted_emphasizes_long_intervals(self):
        values = np.array([0.0, 10.0])
        times = np.array([0.0, 1.0])
        assert aggregate_mean(values, times, time_weighted=True) == pytest.approx(5.0)
        got = aggregate_mean(
            np.array([0.0, 0.0, 10.0]), np.array([0.0, 9.0, 10.0]), time_weighted=True
        )
        assert got < 2.0

    def test_matches_reference_trapezoid(self):
        rng = np.random.default_rng(14)
        values = rng.normal(size=30)
        times = np.cumsum(rng.uniform(0.1, 2.0, size=30))
        got = aggregate_mean(values, times, time_weighted=True)
        assert got == pytest.approx(trapezoid_mean(values, times), abs=1e-12)

    def test_validation(self):
        with pytest.raises(AnalysisError):
            aggregate_mean(np.array([]), np.array([]))
        with pytest.raises(AnalysisError):
            aggregate_mean(np.array([1.0]), np.array([1.0, 2.0]))
