"""Independent brute-force references used to check the fast paths.

These deliberately avoid the package's algorithms: IoU is checked against
pixel rasterization, DBSCAN against a union-find/components formulation,
NMS against a naive per-class loop, and the greedy matcher against an
optimal bipartite matching.
"""

import math


def raster_iou(a, b):
    """IoU by counting unit pixels; exact for integer-coordinate boxes."""
    def cells(box):
        return {
            (i, j)
            for i in range(int(box.x1), int(box.x2))
            for j in range(int(box.y1), int(box.y2))
        }

    ca, cb = cells(a), cells(b)
    inter = len(ca & cb)
    union = len(ca | cb)
    return inter / union


def _distance(u, v, metric):
    if metric == "euclidean":
        return math.sqrt(sum((x - y) ** 2 for x, y in zip(u, v)))
    return 1.0 - sum(x * y for x, y in zip(u, v))


def brute_dbscan(points, metric, eps, min_samples):
    """Reference DBSCAN: components of the core graph, borders attached to
    the candidate component with the smallest minimum core index."""
    n = len(points)
    neighbors = [
        [j for j in range(n) if _distance(points[i], points[j], metric) <= eps]
        for i in range(n)
    ]
    core = [len(neighbors[i]) >= min_samples for i in range(n)]

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for i in range(n):
        if not core[i]:
            continue
        for j in neighbors[i]:
            if core[j]:
                union(i, j)

    # cluster ids in order of each component's smallest core index
    component_min = {}
    for i in range(n):
        if core[i]:
            root = find(i)
            component_min.setdefault(root, i)
    ordered_roots = sorted(component_min, key=lambda r: component_min[r])
    cluster_of_root = {root: cid for cid, root in enumerate(ordered_roots)}

    labels = [-1] * n
    for i in range(n):
        if core[i]:
            labels[i] = cluster_of_root[find(i)]
    for i in range(n):
        if core[i]:
            continue
        candidate_cores = [j for j in neighbors[i] if core[j]]
        if candidate_cores:
            best = min(candidate_cores, key=lambda j: component_min[find(j)])
            labels[i] = cluster_of_root[find(best)]
    return labels


def same_partition(labels_a, labels_b):
    """True when two labelings agree up to cluster-id renaming, with
    identical noise sets."""
    if len(labels_a) != len(labels_b):
        return False
    mapping = {}
    reverse = {}
    for a, b in zip(labels_a, labels_b):
        if (a == -1) != (b == -1):
            return False
        if a == -1:
            continue
        if mapping.setdefault(a, b) != b or reverse.setdefault(b, a) != a:
            return False
    return True


def _iou(a, b):
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    area_a = (a.x2 - a.x1) * (a.y2 - a.y1)
    area_b = (b.x2 - b.x1) * (b.y2 - b.y1)
    return inter / (area_a + area_b - inter)


def brute_cb_nms_ids(dets, iou_threshold):
    """Survivor id set of per-class greedy NMS, naive implementation."""
    survivors = set()
    for label in {d.label for d in dets}:
        group = [d for d in dets if d.label == label]
        group.sort(key=lambda d: (-d.adjusted_score, -d.score, d.id))
        suppressed = set()
        for i, d in enumerate(group):
            if d.id in suppressed:
                continue
            survivors.add(d.id)
            for other in group[i + 1:]:
                if other.id in suppressed:
                    continue
                if _iou(d.box, other.box) > iou_threshold:
                    suppressed.add(other.id)
    return survivors


def optimal_match_count(preds, gts, iou_min):
    """Maximum-cardinality matching between predictions and same-label
    ground truths at iou >= iou_min (augmenting-path bipartite matching)."""
    feasible = [
        [
            j
            for j, gt in enumerate(gts)
            if gt.label == p.label and _iou(p.box, gt.box) >= iou_min
        ]
        for p in preds
    ]
    gt_owner = [-1] * len(gts)

    def try_assign(i, visited):
        for j in feasible[i]:
            if j in visited:
                continue
            visited.add(j)
            if gt_owner[j] == -1 or try_assign(gt_owner[j], visited):
                gt_owner[j] = i
                return True
        return False

    count = 0
    for i in range(len(preds)):
        if try_assign(i, set()):
            count += 1
    return count
