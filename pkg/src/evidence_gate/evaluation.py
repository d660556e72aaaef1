"""IoU matching, per-image precision/recall/F1, aggregation and stage timing."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .geometry import BBox, Detection, iou


@dataclass(frozen=True)
class GroundTruthBox:
    box: BBox
    label: int


@dataclass(frozen=True)
class ImageEval:
    image_id: str
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    per_image: tuple
    mean_precision: float
    mean_recall: float
    mean_f1: float
    stage_latency: dict  # stage name -> mean seconds per image


def match(preds, gts, iou_min: float = 0.5):
    """Greedy confidence-descending matching against same-label ground truth.

    Returns (tp, fp, fn, assignment) where assignment maps prediction id to
    the matched ground-truth index. Each ground truth matches at most once;
    IoU ties between ground truths break toward the lower index.
    """
    if not 0.0 < iou_min < 1.0:
        raise ValueError(f"iou_min {iou_min} outside (0, 1)")
    order = sorted(preds, key=lambda d: (-d.adjusted_score, d.id))
    matched_gt = [False] * len(gts)
    assignment = {}
    for pred in order:
        best_iou = 0.0
        best_j = None
        for j, gt in enumerate(gts):
            if matched_gt[j] or gt.label != pred.label:
                continue
            v = iou(pred.box, gt.box)
            if v >= iou_min and v > best_iou:
                best_iou = v
                best_j = j
        if best_j is not None:
            matched_gt[best_j] = True
            assignment[pred.id] = best_j
    tp = len(assignment)
    return tp, len(preds) - tp, len(gts) - tp, assignment


def prf(tp: int, fp: int, fn: int):
    """Precision/recall/F1 with the empty-side convention P (or R) = 1."""
    precision = tp / (tp + fp) if tp + fp > 0 else 1.0
    recall = tp / (tp + fn) if tp + fn > 0 else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def evaluate_image(image_id, preds, gts, iou_min: float = 0.5) -> ImageEval:
    tp, fp, fn, _ = match(preds, gts, iou_min)
    precision, recall, f1 = prf(tp, fp, fn)
    return ImageEval(image_id, tp, fp, fn, precision, recall, f1)


def aggregate(per_image, stage_latencies=None) -> EvalReport:
    """Unweighted per-image (macro) means; latency means per stage."""
    per_image = tuple(per_image)
    if not per_image:
        raise ValueError("cannot aggregate an empty dataset")
    n = len(per_image)
    latency = {}
    if stage_latencies:
        stages = []
        for timings in stage_latencies:
            for key in timings:
                if key not in stages:
                    stages.append(key)
        for key in stages:
            latency[key] = sum(t.get(key, 0.0) for t in stage_latencies) / n
    return EvalReport(
        per_image=per_image,
        mean_precision=sum(e.precision for e in per_image) / n,
        mean_recall=sum(e.recall for e in per_image) / n,
        mean_f1=sum(e.f1 for e in per_image) / n,
        stage_latency=latency,
    )


class StageTimer:
    """Accumulates wall-clock seconds per named pipeline stage."""

    def __init__(self):
        self.totals: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.totals[name] = self.totals.get(name, 0.0) + elapsed

    @property
    def total(self) -> float:
        return sum(self.totals.values())
