"""Axis-aligned box primitives and the metrics every later stage consumes."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BBox:
    """Continuous-coordinate box, origin top-left, corners (x1,y1)-(x2,y2)."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for v in (self.x1, self.y1, self.x2, self.y2):
            if not math.isfinite(v):
                raise ValueError(f"non-finite box coordinate: {v!r}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(
                f"degenerate box ({self.x1}, {self.y1}, {self.x2}, {self.y2}): "
                "width and height must be strictly positive"
            )

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def translated(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)


BASELINE = "baseline"


def tile_source(index: int) -> str:
    """Source tag for a detection produced on tile `index`."""
    return f"tile:{index}"


def is_tile_source(source: str) -> bool:
    return source.startswith("tile:")


def tile_index_of(source: str) -> int:
    if not is_tile_source(source):
        raise ValueError(f"not a tile source: {source!r}")
    return int(source.split(":", 1)[1])


@dataclass(frozen=True)
class Detection:
    """One candidate box with class label, confidence and provenance.

    `adjusted_score` is the ranking score used by NMS and matching; it equals
    `score` until reweighting runs and may exceed 1.0 afterwards.
    """

    box: BBox
    label: int
    score: float
    id: int
    source: str = BASELINE
    adjusted_score: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.adjusted_score is None:
            object.__setattr__(self, "adjusted_score", self.score)
        if self.adjusted_score < 0.0:
            raise ValueError(f"adjusted_score {self.adjusted_score} negative")
        if self.source != BASELINE and not is_tile_source(self.source):
            raise ValueError(f"bad source tag: {self.source!r}")

    @property
    def from_tile(self) -> bool:
        return is_tile_source(self.source)


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0 when disjoint."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def centroid(b: BBox) -> tuple:
    return ((b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0)


def diagonal(b: BBox) -> float:
    return math.hypot(b.x2 - b.x1, b.y2 - b.y1)
