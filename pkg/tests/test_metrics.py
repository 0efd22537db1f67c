import numpy as np
import pytest

from ganens import (
    EmbeddingSet,
    GaussianSummary,
    MetricConfig,
    MetricKind,
    NumericError,
    Orientation,
    ParameterError,
    coverage,
    density,
    density_coverage,
    frechet_distance,
    gaussian_summary,
    harmonic_d,
    knn_radii,
    metric_d,
    pairwise_distances,
)


def brute_force_density_coverage(ref, cand, k):
    """Independent all-pairs oracle; per-point loops, sort-based radii."""
    n, m = len(ref), len(cand)
    radii = np.empty(n)
    for i in range(n):
        d = np.sqrt(((ref[i] - ref) ** 2).sum(axis=1))
        radii[i] = np.sort(np.delete(d, i))[k - 1]
    inside = np.empty((n, m), dtype=bool)
    for i in range(n):
        inside[i] = np.sqrt(((ref[i] - cand) ** 2).sum(axis=1)) <= radii[i]
    return float(inside.sum()) / (k * m), float(inside.any(axis=1).mean())


class TestKnnRadii:
    def test_hand_example(self):
        profile = knn_radii(np.array([[0.0], [1.0], [3.0]]), 1)
        assert profile.radii.tolist() == [1.0, 1.0, 2.0]

    def test_duplicate_points_give_zero_radius(self):
        profile = knn_radii(np.array([[2.0, 2.0], [2.0, 2.0]]), 1)
        assert profile.radii.tolist() == [0.0, 0.0]

    def test_k_equal_to_n_is_an_error(self):
        with pytest.raises(ParameterError, match="1 <= k < N"):
            knn_radii(np.zeros((3, 2)), 3)
        with pytest.raises(ParameterError):
            knn_radii(np.zeros((3, 2)), 0)

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(20, 3))
        assert np.array_equal(knn_radii(x, 4).radii, knn_radii(x, 4).radii)


class TestDensityCoverage:
    def test_density_hand_examples(self):
        ref = np.array([[0.0], [1.0]])
        assert density(ref, np.array([[0.1]]), 1) == 2.0
        assert density(ref, ref, 1) == 2.0
        assert density(ref, np.array([[100.0]]), 1) == 0.0

    def test_coverage_hand_examples(self):
        ref = np.array([[0.0], [1.0]])
        assert coverage(ref, ref, 1) == 1.0
        assert coverage(ref, np.array([[0.1]]), 1) == 1.0
        assert coverage(ref, np.array([[5.0]]), 1) == 0.0

    def test_coverage_self_is_one_even_with_duplicates(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(15, 4))
        x = np.vstack([x, x[:3]])
        assert coverage(x, x, 3) == 1.0

    def test_coverage_bounded(self):
        rng = np.random.default_rng(2)
        for seed in range(5):
            r = np.random.default_rng(seed)
            ref = r.normal(size=(25, 3))
            cand = r.normal(size=(18, 3)) + r.normal(0, 2, 3)
            cvg = coverage(ref, cand, 3)
            assert 0.0 <= cvg <= 1.0

    def test_zero_when_disjoint_beyond_max_radius(self):
        rng = np.random.default_rng(3)
        ref = rng.normal(size=(30, 4))
        cand = rng.normal(size=(20, 4)) + 100.0
        radii = knn_radii(ref, 5).radii
        assert pairwise_distances(ref, cand).min() > radii.max()
        dns, cvg = density_coverage(ref, cand, 5)
        assert dns == 0.0 and cvg == 0.0

    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_brute_force_equivalence(self, k):
        rng = np.random.default_rng(100 + k)
        for _ in range(40):
            n = int(rng.integers(k + 1, 51))
            m = int(rng.integers(1, 51))
            d = int(rng.integers(1, 9))
            ref = rng.standard_normal((n, d))
            cand = rng.standard_normal((m, d)) + rng.normal(0, 1, d)
            assert density_coverage(ref, cand, k) == brute_force_density_coverage(ref, cand, k)

    def test_translation_invariance_exact(self):
        # continuous data: no comparison sits on a representability boundary
        rng = np.random.default_rng(4)
        for _ in range(20):
            n, m, d = int(rng.integers(6, 30)), int(rng.integers(3, 30)), int(rng.integers(1, 6))
            ref = rng.standard_normal((n, d))
            cand = rng.standard_normal((m, d)) * 2
            shift = rng.normal(0, 10, d)
            assert density_coverage(ref, cand, 2) == density_coverage(ref + shift, cand + shift, 2)

    def test_precomputed_radii_match(self):
        rng = np.random.default_rng(5)
        ref = EmbeddingSet(rng.normal(size=(30, 4)), "r")
        cand = EmbeddingSet(rng.normal(size=(20, 4)), "c")
        profile = knn_radii(ref, 3)
        assert density_coverage(ref, cand, 3, profile) == density_coverage(ref, cand, 3)
        with pytest.raises(ParameterError, match="radius profile"):
            density_coverage(ref, cand, 4, profile)

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError, match="dimension mismatch"):
            density_coverage(np.zeros((4, 2)), np.zeros((4, 3)), 1)


class TestHarmonicD:
    def test_equal_inputs_return_the_value(self):
        for c in (0.1, 0.5, 1.0, 2.5):
            assert harmonic_d(c, c) == pytest.approx(c)

    def test_zero_annihilates(self):
        assert harmonic_d(0.0, 1.0) == 0.0
        assert harmonic_d(0.0, 0.0) == 0.0

    def test_worked_example(self):
        # density 0.886, coverage 1.000 combine to 0.9396 (4 significant digits)
        assert harmonic_d(0.886, 1.0) == pytest.approx(0.93955, abs=5e-6)

    def test_negative_rejected(self):
        with pytest.raises(ParameterError):
            harmonic_d(-0.1, 0.5)

    def test_min_preserving_bound(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            a, b = rng.uniform(0, 3, 2)
            assert harmonic_d(a, b) <= 2 * min(a, b) + 1e-12


class TestGaussianSummary:
    def test_hand_covariance(self):
        summary = gaussian_summary(np.array([[0.0, 0.0], [2.0, 0.0]]))
        assert summary.mean.tolist() == [1.0, 0.0]
        assert summary.covariance.tolist() == [[2.0, 0.0], [0.0, 0.0]]

    def test_single_point_rejected(self):
        with pytest.raises(ParameterError, match="at least 2 rows"):
            gaussian_summary(np.array([[1.0, 2.0]]))

    def test_identical_points_zero_covariance(self):
        summary = gaussian_summary(np.ones((10, 3)))
        assert np.allclose(summary.covariance, 0.0)

    def test_symmetric(self):
        rng = np.random.default_rng(7)
        summary = gaussian_summary(rng.normal(size=(40, 6)))
        assert np.array_equal(summary.covariance, summary.covariance.T)


class TestFrechet:
    def test_scalar_mean_shift(self):
        a = GaussianSummary(np.array([0.0]), np.array([[1.0]]))
        b = GaussianSummary(np.array([1.0]), np.array([[1.0]]))
        assert frechet_distance(a, b) == pytest.approx(1.0, abs=1e-9)

    def test_scalar_variance_gap(self):
        a = GaussianSummary(np.array([0.0]), np.array([[4.0]]))
        b = GaussianSummary(np.array([0.0]), np.array([[1.0]]))
        assert frechet_distance(a, b) == pytest.approx(1.0, abs=1e-9)

    def test_identical_is_zero(self):
        rng = np.random.default_rng(8)
        summary = gaussian_summary(rng.normal(size=(50, 5)))
        assert frechet_distance(summary, summary) <= 1e-6

    def test_symmetry(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            a = gaussian_summary(rng.standard_normal((60, 6)) * rng.uniform(0.5, 2))
            b = gaussian_summary(rng.standard_normal((50, 6)) + rng.normal(0, 2, 6))
            assert abs(frechet_distance(a, b) - frechet_distance(b, a)) <= 1e-8

    def test_dim_mismatch(self):
        a = GaussianSummary(np.zeros(2), np.eye(2))
        b = GaussianSummary(np.zeros(3), np.eye(3))
        with pytest.raises(ParameterError):
            frechet_distance(a, b)

    def test_non_finite_covariance_raises_numeric(self):
        a = GaussianSummary(np.zeros(2), np.array([[np.nan, 0.0], [0.0, 1.0]]))
        with pytest.raises(NumericError):
            frechet_distance(a, a)


class TestMetricD:
    def test_identical_sets_density_coverage(self):
        x = EmbeddingSet(np.array([[0.0], [1.0]]), "x")
        assert metric_d(x, x, MetricConfig(k=1)) == pytest.approx(4.0 / 3.0)

    def test_identical_sets_frechet(self):
        rng = np.random.default_rng(9)
        x = EmbeddingSet(rng.normal(size=(30, 4)), "x")
        assert metric_d(x, x, MetricConfig(kind="fid")) <= 1e-6

    def test_disjoint_clusters_zero(self):
        rng = np.random.default_rng(10)
        x = EmbeddingSet(rng.normal(size=(20, 3)), "x")
        y = EmbeddingSet(rng.normal(size=(20, 3)) + 500.0, "y")
        assert metric_d(x, y, MetricConfig(k=2)) == 0.0

    def test_asymmetric_in_general(self):
        x = np.array([[0.0], [1.0]])
        y = np.array([[0.0], [0.1]])
        cfg = MetricConfig(k=1)
        forward = metric_d(x, y, cfg)
        backward = metric_d(y, x, cfg)
        assert forward == pytest.approx(4.0 / 3.0)
        assert backward == pytest.approx(1.0)
        assert forward != backward

    def test_standardize_matches_manual(self):
        rng = np.random.default_rng(11)
        ref = rng.normal(size=(40, 3)) * np.array([1.0, 10.0, 0.1])
        cand = rng.normal(size=(30, 3)) * np.array([1.0, 10.0, 0.1])
        mean, std = ref.mean(axis=0), ref.std(axis=0)
        manual = metric_d((ref - mean) / std, (cand - mean) / std, MetricConfig(k=3))
        assert metric_d(ref, cand, MetricConfig(k=3, standardize=True)) == manual


class TestMetricConfig:
    def test_orientation_follows_kind(self):
        assert MetricConfig(kind="dnc").orientation is Orientation.HIGHER_IS_BETTER
        assert MetricConfig(kind="fid").orientation is Orientation.LOWER_IS_BETTER

    def test_kind_normalized_from_string(self):
        assert MetricConfig(kind="fid").kind is MetricKind.FRECHET

    def test_bad_k(self):
        with pytest.raises(ParameterError):
            MetricConfig(k=0)
