import numpy as np
import pytest

from evidence_gate.gating import (
    MissingEmbeddingError,
    Group,
    TableEmbeddingProvider,
    adaptive_spatial_eps,
    normalize_embedding,
    semantic_gate,
    spatial_gate,
)
from evidence_gate.geometry import BBox, Detection


def det(x1, y1, x2, y2, label=0, score=0.5, id=0):
    return Detection(BBox(x1, y1, x2, y2), label=label, score=score, id=id)


class TestNormalizeEmbedding:
    def test_rescales_to_unit(self):
        v = normalize_embedding([3.0, 4.0])
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        assert v == pytest.approx([0.6, 0.8])

    def test_rejects_zero_vector(self):
        with pytest.raises(ValueError):
            normalize_embedding([0.0, 0.0])


class TestProvider:
    def test_lookup_and_missing(self):
        p = TableEmbeddingProvider({1: np.array([2.0, 0.0])})
        assert p.lookup(1) == pytest.approx([1.0, 0.0])
        with pytest.raises(MissingEmbeddingError):
            p.lookup(99)

    def test_rejects_mixed_dimensions(self):
        with pytest.raises(ValueError):
            TableEmbeddingProvider({1: np.ones(3), 2: np.ones(4)})

    def test_dimension(self):
        p = TableEmbeddingProvider({1: np.ones(8)})
        assert p.dimension == 8 and len(p) == 1


class TestAdaptiveEps:
    def test_single_box_example(self):
        # one 3x4 box: diagonal 5, eps = 1.5 * 5 = 7.5
        assert adaptive_spatial_eps([det(0, 0, 3, 4)], 1.5) == pytest.approx(7.5)

    def test_mean_over_pool(self):
        pool = [det(0, 0, 3, 4, id=0), det(0, 0, 6, 8, id=1)]
        assert adaptive_spatial_eps(pool, 1.0) == pytest.approx(7.5)

    def test_empty_pool_errors(self):
        with pytest.raises(ValueError):
            adaptive_spatial_eps([])

    def test_scales_with_multiplier(self):
        pool = [det(0, 0, 3, 4)]
        assert adaptive_spatial_eps(pool, 2.0) == pytest.approx(10.0)


class TestSpatialGate:
    def test_tight_cluster_kept(self):
        pool = [det(i, 0, i + 2, 2, id=i) for i in range(4)]
        groups = spatial_gate(pool, eps=2.0, min_samples=3)
        assert len(groups) == 1
        assert groups[0].member_ids == (0, 1, 2, 3)
        assert groups[0].stage == "spatial"

    def test_isolated_boxes_dropped(self):
        pool = [det(0, 0, 2, 2, id=0), det(100, 100, 102, 102, id=1)]
        assert spatial_gate(pool, eps=2.0, min_samples=2) == []

    def test_empty_pool(self):
        assert spatial_gate([], eps=1.0) == []

    def test_two_separated_clusters(self):
        left = [det(i, 0, i + 2, 2, id=i) for i in range(3)]
        right = [det(100 + i, 0, 102 + i, 2, id=10 + i) for i in range(3)]
        groups = spatial_gate(left + right, eps=2.0, min_samples=3)
        assert [g.member_ids for g in groups] == [(0, 1, 2), (10, 11, 12)]


class TestSemanticGate:
    def _provider(self, table):
        return TableEmbeddingProvider(table)

    def test_consistent_group_survives_whole(self):
        base = np.array([1.0, 0.0, 0.0])
        table = {i: base + 0.01 * np.array([0.0, 1.0, 0.0]) * i for i in range(3)}
        group = Group(id=5, member_ids=(0, 1, 2), stage="spatial")
        subs = semantic_gate(group, self._provider(table), 0.35, 3)
        assert len(subs) == 1
        assert subs[0].member_ids == (0, 1, 2)
        assert subs[0].parent == 5 and subs[0].stage == "semantic"

    def test_mixed_group_splits(self):
        table = {
            0: np.array([1.0, 0.0]), 1: np.array([1.0, 0.0]),
            2: np.array([0.0, 1.0]), 3: np.array([0.0, 1.0]),
        }
        group = Group(id=0, member_ids=(0, 1, 2, 3), stage="spatial")
        subs = semantic_gate(group, self._provider(table), 0.35, 2)
        assert [s.member_ids for s in subs] == [(0, 1), (2, 3)]

    def test_semantic_noise_dropped(self):
        table = {
            0: np.array([1.0, 0.0, 0.0]), 1: np.array([1.0, 0.0, 0.0]),
            2: np.array([0.0, 0.0, 1.0]),
        }
        group = Group(id=0, member_ids=(0, 1, 2), stage="spatial")
        subs = semantic_gate(group, self._provider(table), 0.35, 2)
        assert [s.member_ids for s in subs] == [(0, 1)]

    def test_missing_embedding_raises(self):
        group = Group(id=0, member_ids=(0, 7), stage="spatial")
        provider = self._provider({0: np.array([1.0, 0.0])})
        with pytest.raises(MissingEmbeddingError):
            semantic_gate(group, provider)

    def test_eps_range_validated(self):
        group = Group(id=0, member_ids=(0,), stage="spatial")
        provider = self._provider({0: np.array([1.0, 0.0])})
        with pytest.raises(ValueError):
            semantic_gate(group, provider, eps_semantic=2.0)
