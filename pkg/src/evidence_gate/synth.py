"""Seeded synthetic benchmark: scenes, simulated detector outputs, embeddings.

Everything is driven by numpy's PCG64 generator through SeedSequence, so a
(spec, seed) pair reproduces byte-identical scenes, detections and embeddings
on any platform. The detector simulator is deliberately biased the way dense
aerial scenes behave: full-image inference misses small objects, tile
inference sees them better but floods the pool with low-confidence clutter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .evaluation import GroundTruthBox
from .geometry import BBox, Detection, iou
from .pipeline import ImageCase
from .tiling import plan_tiles

# Stream tags keeping the per-purpose RNG streams disjoint.
_STREAM_SCENE = 11
_STREAM_FULL = 101
_STREAM_TILE = 211
_STREAM_PROTO = 7

# A synthetic detection is treated as a true object (class-coherent
# embedding) when it overlaps a same-label ground truth at least this much.
TRUTH_IOU = 0.25


@dataclass(frozen=True)
class SceneSpec:
    """Layout and detector-bias knobs for one synthetic scene family."""

    seed: int = 2025
    width: int = 1600
    height: int = 1200
    n_rows: int = 4
    objects_per_row: int = 26
    object_size_range: Tuple[float, float] = (16.0, 36.0)
    n_large_objects: int = 3
    large_size_range: Tuple[float, float] = (90.0, 140.0)
    n_classes: int = 5
    clutter_rate: float = 12.0        # expected false positives per image
    clutter_conf_mean: float = 0.22
    clutter_conf_sd: float = 0.08
    miss_curve: Tuple[float, float] = (20.0, 6.0)  # (size_50, steepness)
    conf_curve: Tuple[float, float] = (28.0, 6.0)  # confidence vs size
    confidence_noise_sd: float = 0.05
    box_jitter_frac: float = 0.05     # jitter sd as a fraction of box size
    margin: float = 80.0

    def __post_init__(self):
        if self.object_size_range[0] <= 0 or self.large_size_range[0] <= 0:
            raise ValueError("object sizes must be positive")
        if self.clutter_rate < 0:
            raise ValueError("clutter_rate must be >= 0")
        if not 0 < self.n_classes:
            raise ValueError("need at least one class")


DEFAULT_SCENE_SPEC = SceneSpec()


@dataclass(frozen=True)
class Scene:
    spec: SceneSpec
    gts: tuple  # GroundTruthBox, rows first then large objects

    @property
    def width(self) -> int:
        return self.spec.width

    @property
    def height(self) -> int:
        return self.spec.height


def _gt_size(gt: GroundTruthBox) -> float:
    return math.sqrt(gt.box.area)


def _logistic(z: float) -> float:
    if z > 40.0:
        return 1.0
    if z < -40.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-z))


def miss_probability(size: float, spec: SceneSpec, tiled: bool = False) -> float:
    """Logistic miss probability by object size; tiles halve the miss rate."""
    size_50, steepness = spec.miss_curve
    p = _logistic((size_50 - size) / steepness)
    return 0.5 * p if tiled else p


def base_confidence(size: float, spec: SceneSpec) -> float:
    """Detector confidence before noise; grows with object size."""
    size_50, steepness = spec.conf_curve
    return 0.12 + 0.75 * _logistic((size - size_50) / steepness)


def gen_scene(spec: SceneSpec) -> Scene:
    """Dense object rows plus scattered large objects, deterministic by seed."""
    rng = np.random.default_rng([spec.seed, _STREAM_SCENE])
    lo, hi = spec.object_size_range
    usable_w = spec.width - 2 * spec.margin
    usable_h = spec.height - 2 * spec.margin
    if spec.objects_per_row > 0 and usable_w / spec.objects_per_row < hi:
        raise ValueError(
            f"infeasible packing: {spec.objects_per_row} objects of size up "
            f"to {hi} cannot fit {usable_w:.0f}px of row width"
        )
    if spec.n_rows > 0 and usable_h / (spec.n_rows + 1) < hi:
        raise ValueError("infeasible packing: rows too close for object size")

    gts = []
    for row in range(spec.n_rows):
        label = int(rng.integers(0, spec.n_classes))
        y_center = spec.margin + usable_h * (row + 1) / (spec.n_rows + 1)
        pitch = usable_w / spec.objects_per_row
        for k in range(spec.objects_per_row):
            x_center = spec.margin + (k + 0.5) * pitch
            w = rng.uniform(lo, hi)
            h = w * rng.uniform(0.85, 1.15)
            gts.append(
                GroundTruthBox(
                    BBox(x_center - w / 2, y_center - h / 2,
                         x_center + w / 2, y_center + h / 2),
                    label,
                )
            )

    big_lo, big_hi = spec.large_size_range
    for _ in range(spec.n_large_objects):
        for attempt in range(100):
            size = rng.uniform(big_lo, big_hi)
            x1 = rng.uniform(spec.margin, spec.width - spec.margin - size)
            y1 = rng.uniform(spec.margin, spec.height - spec.margin - size)
            label = int(rng.integers(0, spec.n_classes))
            box = BBox(x1, y1, x1 + size, y1 + size)
            clash = any(
                gt.label == label and iou(gt.box, box) > 0.3 for gt in gts
            )
            if not clash:
                gts.append(GroundTruthBox(box, label))
                break
        else:
            raise ValueError("infeasible packing: could not place large object")
    return Scene(spec=spec, gts=tuple(gts))


def _jitter_box(box: BBox, frac: float, rng) -> BBox:
    if frac == 0.0:
        return box
    sx = frac * box.width
    sy = frac * box.height
    x1 = box.x1 + rng.normal(0.0, sx)
    x2 = box.x2 + rng.normal(0.0, sx)
    y1 = box.y1 + rng.normal(0.0, sy)
    y2 = box.y2 + rng.normal(0.0, sy)
    if x2 <= x1:
        x2 = x1 + 0.1
    if y2 <= y1:
        y2 = y1 + 0.1
    return BBox(x1, y1, x2, y2)


def _clamp_box(box: BBox, x_max: float, y_max: float) -> BBox:
    return BBox(
        min(max(box.x1, 0.0), x_max - 0.1),
        min(max(box.y1, 0.0), y_max - 0.1),
        max(min(box.x2, x_max), 0.1),
        max(min(box.y2, y_max), 0.1),
    )


def simulate_detections(scene: Scene, spec: SceneSpec,
                        tile: Optional[Tuple[float, float, float]] = None,
                        id_start: int = 0) -> list:
    """Simulated detector output for the full image or one tile.

    `tile` is (origin_x, origin_y, tile_size); tile mode halves the miss rate
    for objects fully inside the tile, skips the rest, and reports tile-local
    coordinates. Detection ids start at `id_start`.
    """
    if tile is None:
        rng = np.random.default_rng([spec.seed, _STREAM_FULL])
        ox, oy = 0.0, 0.0
        extent_x, extent_y = float(scene.width), float(scene.height)
        area_frac = 1.0
    else:
        ox, oy, tsize = tile
        rng = np.random.default_rng([spec.seed, _STREAM_TILE, int(ox), int(oy)])
        extent_x = extent_y = float(tsize)
        area_frac = (tsize * tsize) / (scene.width * scene.height)

    dets = []
    next_id = id_start
    for gt in scene.gts:
        b = gt.box
        if tile is not None:
            fully_inside = (
                b.x1 >= ox and b.y1 >= oy
                and b.x2 <= ox + extent_x and b.y2 <= oy + extent_y
            )
            if not fully_inside:
                continue
        size = _gt_size(gt)
        if rng.random() < miss_probability(size, spec, tiled=tile is not None):
            continue
        local = b.translated(-ox, -oy)
        jittered = _clamp_box(
            _jitter_box(local, spec.box_jitter_frac, rng), extent_x, extent_y
        )
        conf = base_confidence(size, spec)
        if spec.confidence_noise_sd > 0:
            conf += rng.normal(0.0, spec.confidence_noise_sd)
        dets.append(
            Detection(box=jittered, label=gt.label,
                      score=float(np.clip(conf, 0.0, 1.0)), id=next_id)
        )
        next_id += 1

    n_clutter = rng.poisson(spec.clutter_rate * area_frac)
    lo, hi = spec.object_size_range
    for _ in range(n_clutter):
        w = rng.uniform(lo, hi) * rng.uniform(0.7, 1.8)
        h = w * rng.uniform(0.8, 1.25)
        x1 = rng.uniform(0.0, max(extent_x - w, 1.0))
        y1 = rng.uniform(0.0, max(extent_y - h, 1.0))
        conf = rng.normal(spec.clutter_conf_mean, spec.clutter_conf_sd)
        dets.append(
            Detection(
                box=_clamp_box(BBox(x1, y1, x1 + w, y1 + h), extent_x, extent_y),
                label=int(rng.integers(0, spec.n_classes)),
                score=float(np.clip(conf, 0.0, 1.0)),
                id=next_id,
            )
        )
        next_id += 1
    return dets


@dataclass(frozen=True)
class SyntheticEmbeddingModel:
    """Class-prototype embedding simulator standing in for a neural encoder."""

    seed: int = 2025
    dimension: int = 512
    n_classes: int = 5
    noise_sd: float = 0.028  # calibrated: intra-class cosine distance < 0.35
                             # with empirical frequency >= 0.95

    def prototypes(self) -> np.ndarray:
        rng = np.random.default_rng([self.seed, _STREAM_PROTO])
        protos = rng.normal(size=(self.n_classes, self.dimension))
        return protos / np.linalg.norm(protos, axis=1, keepdims=True)


def embed(det: Detection, scene: Scene, model: SyntheticEmbeddingModel,
          prototypes: Optional[np.ndarray] = None) -> np.ndarray:
    """Unit embedding for one detection (image-global coordinates).

    True-object detections get their class prototype plus angular noise;
    clutter gets an isotropic direction. Deterministic in (seed, detection id).
    """
    if prototypes is None:
        prototypes = model.prototypes()
    rng = np.random.default_rng([model.seed, det.id])
    is_true = any(
        gt.label == det.label and iou(gt.box, det.box) >= TRUTH_IOU
        for gt in scene.gts
    )
    if is_true:
        vec = prototypes[det.label % model.n_classes] + rng.normal(
            0.0, model.noise_sd, size=model.dimension
        )
    else:
        vec = rng.normal(size=model.dimension)
    return vec / np.linalg.norm(vec)


def build_case(spec: SceneSpec, image_id: str,
               tile_size: int = 640, tile_overlap: int = 160,
               embedding_model: Optional[SyntheticEmbeddingModel] = None) -> ImageCase:
    """Generate one complete ImageCase with embeddings for all tile detections."""
    scene = gen_scene(spec)
    baseline = simulate_detections(scene, spec, tile=None, id_start=0)
    next_id = len(baseline)

    grid = plan_tiles(spec.width, spec.height, tile_size, tile_overlap, True)
    tile_dets = []
    for origin in grid.origins:
        dets = simulate_detections(
            scene, spec, tile=(origin[0], origin[1], tile_size), id_start=next_id
        )
        next_id += len(dets)
        tile_dets.append((origin, tuple(dets)))

    if embedding_model is None:
        embedding_model = SyntheticEmbeddingModel(
            seed=spec.seed, n_classes=spec.n_classes
        )
    protos = embedding_model.prototypes()
    embeddings = {}
    for origin, dets in tile_dets:
        for det in dets:
            global_det = replace(det, box=det.box.translated(origin[0], origin[1]))
            embeddings[det.id] = embed(global_det, scene, embedding_model, protos)

    return ImageCase(
        image_id=image_id,
        width=spec.width,
        height=spec.height,
        baseline_dets=tuple(baseline),
        tile_dets=tuple(tile_dets),
        gts=scene.gts,
        embeddings=embeddings,
    )


def scene_seed(base_seed: int, index: int) -> int:
    """Stable per-scene seed derived from the benchmark seed."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


def make_benchmark(base_seed: int = 2025, n_scenes: int = 50,
                   spec: SceneSpec = DEFAULT_SCENE_SPEC,
                   tile_size: int = 640, tile_overlap: int = 160) -> list:
    """The frozen regression benchmark: n seeded scenes as ImageCases."""
    cases = []
    for i in range(n_scenes):
        case_spec = replace(spec, seed=scene_seed(base_seed, i))
        cases.append(
            build_case(case_spec, image_id=f"scene_{i:04d}",
                       tile_size=tile_size, tile_overlap=tile_overlap)
        )
    return cases
