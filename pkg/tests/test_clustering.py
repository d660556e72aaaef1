import numpy as np
import pytest

from evidence_gate.clustering import dbscan, pairwise_distances
from oracles import brute_dbscan, same_partition


def random_instance(rng, metric):
    n = rng.integers(1, 51)
    if metric == "euclidean":
        pts = rng.uniform(0, 20, size=(n, 2))
    else:
        pts = rng.normal(size=(n, 8))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    eps = float(rng.uniform(0.05, 3.0 if metric == "euclidean" else 1.0))
    min_samples = int(rng.integers(1, 6))
    return pts, eps, min_samples


class TestExamples:
    def test_coincident_points_one_cluster(self):
        pts = [[1.0, 1.0]] * 3
        assert dbscan(pts, "euclidean", 0.1, 3).labels == (0, 0, 0)

    def test_isolated_points_are_noise(self):
        pts = [[0.0, 0.0], [10.0, 0.0]]
        assert dbscan(pts, "euclidean", 1.0, 2).labels == (-1, -1)

    def test_line_with_outlier(self):
        pts = [[0.0], [0.5], [1.0], [9.0]]
        assert dbscan(pts, "euclidean", 0.6, 3).labels == (0, 0, 0, -1)

    def test_empty_input(self):
        assert dbscan([], "euclidean", 1.0, 2).labels == ()


class TestValidation:
    def test_rejects_bad_eps(self):
        with pytest.raises(ValueError):
            dbscan([[0.0]], "euclidean", 0.0, 1)

    def test_rejects_non_unit_cosine_vectors(self):
        with pytest.raises(ValueError, match="unit-norm"):
            dbscan([[1.0, 1.0]], "cosine", 0.5, 1)

    def test_rejects_unknown_metric(self):
        with pytest.raises(ValueError):
            pairwise_distances(np.zeros((2, 2)), "manhattan")


class TestCosineDistances:
    def test_identical_unit_vectors(self):
        v = np.array([[0.6, 0.8], [0.6, 0.8]])
        d = pairwise_distances(v, "cosine")
        assert d[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_unit_vectors(self):
        v = np.array([[1.0, 0.0], [0.0, 1.0]])
        d = pairwise_distances(v, "cosine")
        assert d[0, 1] == pytest.approx(1.0, abs=1e-12)


class TestOracleEquivalence:
    @pytest.mark.parametrize("metric", ["euclidean", "cosine"])
    def test_matches_brute_force_reference(self, metric):
        rng = np.random.default_rng(42)
        for _ in range(100):
            pts, eps, min_samples = random_instance(rng, metric)
            fast = dbscan(pts, metric, eps, min_samples).labels
            ref = brute_dbscan(pts.tolist(), metric, eps, min_samples)
            assert same_partition(fast, ref), (pts, eps, min_samples)


class TestProperties:
    def test_translation_invariance(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(0, 10, size=(30, 2))
        base = dbscan(pts, "euclidean", 1.2, 3).labels
        shifted = dbscan(pts + [113.0, -48.5], "euclidean", 1.2, 3).labels
        assert base == shifted

    def test_noise_monotone_in_eps(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            pts = rng.uniform(0, 10, size=(rng.integers(2, 40), 2))
            eps_lo, eps_hi = sorted(rng.uniform(0.1, 4.0, size=2))
            noise_lo = sum(
                1 for l in dbscan(pts, "euclidean", eps_lo, 3).labels if l == -1
            )
            noise_hi = sum(
                1 for l in dbscan(pts, "euclidean", eps_hi, 3).labels if l == -1
            )
            assert noise_hi <= noise_lo

    def test_cluster_ids_contiguous(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 10, size=(40, 2))
        labeling = dbscan(pts, "euclidean", 1.0, 2)
        ids = sorted({l for l in labeling.labels if l != -1})
        assert ids == list(range(labeling.n_clusters))
