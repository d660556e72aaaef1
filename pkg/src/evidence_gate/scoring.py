"""Cluster quality assessment and quality-aware confidence reweighting."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class QualityReport:
    group_id: int
    q_score: float        # mean member confidence
    q_consistency: float  # majority-label fraction
    q_total: float        # w1 * q_score + w2 * q_consistency
    retained: bool        # q_total strictly above the quality threshold
    majority_label: int


def quality(members, w1: float = 0.7, w2: float = 0.3,
            threshold: float = 0.3, group_id: int = -1) -> QualityReport:
    """Score a group given its members as (confidence, label) pairs.

    Majority ties break toward the smaller label id; the tie only affects the
    reported label, never the consistency value.
    """
    if not members:
        raise ValueError("cannot score an empty group")
    scores = [s for s, _ in members]
    labels = [l for _, l in members]
    q_score = sum(scores) / len(scores)
    counts = Counter(labels)
    top = max(counts.values())
    majority_label = min(l for l, c in counts.items() if c == top)
    q_consistency = top / len(labels)
    q_total = w1 * q_score + w2 * q_consistency
    return QualityReport(
        group_id=group_id,
        q_score=q_score,
        q_consistency=q_consistency,
        q_total=q_total,
        retained=q_total > threshold,
        majority_label=majority_label,
    )


def quality_gate(reports, threshold: float) -> list:
    """Ids of groups whose q_total is strictly above the threshold."""
    return [r.group_id for r in reports if r.q_total > threshold]


def reweight(members, group_size: int, q_total: float, beta: float = 0.1) -> list:
    """Boost each member's ranking score by group size and quality.

    adjusted = score * (1 + beta * ln(1 + group_size) * q_total). The raw
    score field is untouched; adjusted scores may exceed 1 and are used for
    ranking only.
    """
    factor = 1.0 + beta * math.log(1.0 + group_size) * q_total
    return [replace(d, adjusted_score=d.score * factor) for d in members]
