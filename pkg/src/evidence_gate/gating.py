"""Spatial-semantic dual gate over the tile candidate pool."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .clustering import dbscan
from .geometry import Detection, centroid, diagonal

UNIT_NORM_TOL = 1e-6

SPATIAL = "spatial"
SEMANTIC = "semantic"


class MissingEmbeddingError(KeyError):
    """Raised when the semantic gate finds no embedding for a member."""


@dataclass(frozen=True)
class Group:
    id: int
    member_ids: tuple
    stage: str
    parent: Optional[int] = None

    def __len__(self) -> int:
        return len(self.member_ids)


def normalize_embedding(raw) -> np.ndarray:
    vec = np.asarray(raw, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero embedding vector")
    return vec / norm


class TableEmbeddingProvider:
    """Embedding lookup backed by a precomputed id -> vector table.

    Used both for file-loaded embeddings and for synthetic in-memory ones.
    Vectors are re-normalized on ingestion.
    """

    def __init__(self, table: Dict[int, np.ndarray]):
        self._table = {
            det_id: normalize_embedding(vec) for det_id, vec in table.items()
        }
        dims = {v.shape[0] for v in self._table.values()}
        if len(dims) > 1:
            raise ValueError(f"mixed embedding dimensions: {sorted(dims)}")
        self.dimension = dims.pop() if dims else 0

    def lookup(self, detection_id: int) -> np.ndarray:
        try:
            return self._table[detection_id]
        except KeyError:
            raise MissingEmbeddingError(
                f"no embedding for detection id {detection_id}"
            ) from None

    def __len__(self) -> int:
        return len(self._table)


def adaptive_spatial_eps(pool, multiplier: float = 1.5) -> float:
    """Clustering radius tied to the pool's mean box diagonal."""
    if not pool:
        raise ValueError("empty candidate pool: no scale to adapt to")
    mean_diag = sum(diagonal(d.box) for d in pool) / len(pool)
    return multiplier * mean_diag


def spatial_gate(pool, eps: float, min_samples: int = 3) -> list:
    """DBSCAN on box centroids; noise and undersized clusters are dropped."""
    if not pool:
        return []
    points = np.array([centroid(d.box) for d in pool])
    labeling = dbscan(points, "euclidean", eps, min_samples)
    groups = []
    for cid in range(labeling.n_clusters):
        members = tuple(pool[i].id for i in labeling.members(cid))
        if len(members) >= min_samples:
            groups.append(Group(id=cid, member_ids=members, stage=SPATIAL))
    return groups


def semantic_gate(group: Group, provider, eps_semantic: float = 0.35,
                  min_samples: int = 3) -> list:
    """Split one spatial group into appearance-consistent sub-groups.

    DBSCAN under cosine distance on the members' unit embeddings; noise is
    dropped. Sub-group ids are local (0..k-1); callers renumber if they need
    global ids.
    """
    if not 0.0 < eps_semantic < 2.0:
        raise ValueError(f"eps_semantic {eps_semantic} outside (0, 2)")
    vectors = np.array([provider.lookup(i) for i in group.member_ids])
    labeling = dbscan(vectors, "cosine", eps_semantic, min_samples)
    subgroups = []
    for cid in range(labeling.n_clusters):
        members = tuple(group.member_ids[i] for i in labeling.members(cid))
        subgroups.append(
            Group(id=cid, member_ids=members, stage=SEMANTIC, parent=group.id)
        )
    return subgroups
