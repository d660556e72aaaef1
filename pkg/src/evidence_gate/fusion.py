"""Class-balanced NMS fusion of baseline and validated candidates."""

from __future__ import annotations

from collections import defaultdict

from .geometry import Detection, iou


def _rank_key(det: Detection):
    # adjusted score desc, then raw score desc, then id asc
    return (-det.adjusted_score, -det.score, det.id)


def cb_nms(dets, iou_threshold: float = 0.55) -> list:
    """Greedy NMS applied independently per class.

    Suppression is strict: iou > threshold suppresses, iou == threshold
    survives. Survivors are kept verbatim (no box merging) and re-merged
    sorted by adjusted score descending.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold {iou_threshold} outside (0, 1)")
    by_label = defaultdict(list)
    for det in dets:
        by_label[det.label].append(det)

    survivors = []
    for label in sorted(by_label):
        remaining = sorted(by_label[label], key=_rank_key)
        while remaining:
            top = remaining.pop(0)
            survivors.append(top)
            remaining = [
                d for d in remaining if iou(top.box, d.box) <= iou_threshold
            ]
    survivors.sort(key=_rank_key)
    return survivors


def fuse(baseline, validated, iou_threshold: float = 0.55) -> list:
    """Final fusion: union of both sets through class-balanced NMS."""
    return cb_nms(list(baseline) + list(validated), iou_threshold)
