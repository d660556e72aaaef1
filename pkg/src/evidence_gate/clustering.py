"""Deterministic, metric-generic DBSCAN.

Brute-force O(n^2) neighborhoods only: the point sets this pipeline clusters
(per-image candidate pools, group members) are small. Expansion scans points
in ascending index order and uses a FIFO seed queue, so the labeling is fully
reproducible: cluster ids are 0..K-1 in order of discovery, -1 is noise.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

UNIT_NORM_TOL = 1e-6

NOISE = -1
_UNVISITED = -2


@dataclass(frozen=True)
class ClusterLabeling:
    labels: tuple

    @property
    def n_clusters(self) -> int:
        return max(self.labels, default=-1) + 1

    def members(self, cluster_id: int) -> list:
        return [i for i, lab in enumerate(self.labels) if lab == cluster_id]


def pairwise_distances(points: np.ndarray, metric: str) -> np.ndarray:
    """Full distance matrix under 'euclidean' or 'cosine' (unit vectors)."""
    pts = np.asarray(points, dtype=float)
    if metric == "euclidean":
        diff = pts[:, None, :] - pts[None, :, :]
        return np.sqrt((diff * diff).sum(axis=2))
    if metric == "cosine":
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            bad = int(np.argmax(np.abs(norms - 1.0)))
            raise ValueError(
                f"cosine metric requires unit-norm vectors; index {bad} has "
                f"norm {norms[bad]:.8f}"
            )
        return np.clip(1.0 - pts @ pts.T, 0.0, None)
    raise ValueError(f"unknown metric: {metric!r}")


def dbscan(points, metric: str, eps: float, min_samples: int) -> ClusterLabeling:
    """Classic DBSCAN over a small point set.

    A point is core iff its closed eps-ball (including itself) holds at least
    `min_samples` points. Border points attach to the first cluster whose
    expansion reaches them.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if min_samples < 1:
        raise ValueError(f"min_samples must be >= 1, got {min_samples}")
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n == 0:
        return ClusterLabeling(labels=())

    dist = pairwise_distances(pts, metric)
    neighbor = dist <= eps
    core = neighbor.sum(axis=1) >= min_samples

    labels = [_UNVISITED] * n
    cluster = 0
    for i in range(n):
        if labels[i] != _UNVISITED:
            continue
        if not core[i]:
            labels[i] = NOISE
            continue
        labels[i] = cluster
        queue = deque([i])
        while queue:
            p = queue.popleft()
            for q in np.flatnonzero(neighbor[p]):
                if labels[q] == NOISE:
                    labels[q] = cluster  # noise promoted to border
                elif labels[q] == _UNVISITED:
                    labels[q] = cluster
                    if core[q]:
                        queue.append(q)
        cluster += 1
    return ClusterLabeling(labels=tuple(labels))
