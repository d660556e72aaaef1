"""End-to-end orchestration of the group-evidence post-processing pipeline."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional, Tuple

from .evaluation import EvalReport, StageTimer, aggregate, evaluate_image
from .fusion import fuse
from .gating import (
    SPATIAL,
    Group,
    TableEmbeddingProvider,
    adaptive_spatial_eps,
    semantic_gate,
    spatial_gate,
)
from .scoring import quality, reweight
from .tiling import dedup, pool_candidates

DEFAULT_SEED = 2025

# Stages that are always part of a run; the four toggles add the rest.
ALWAYS_ON_STAGES = ("baseline", "fusion")


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class Config:
    """Every pipeline hyperparameter, defaulting to the standard recipe."""

    tau_base: float = 0.30
    tau_tile: float = 0.15
    tile_size: int = 640
    tile_overlap: int = 160
    spatial_eps_multiplier: float = 1.5
    spatial_min_samples: int = 3
    semantic_eps: float = 0.35
    semantic_min_samples: int = 3
    quality_w1: float = 0.7
    quality_w2: float = 0.3
    quality_threshold: float = 0.30
    beta: float = 0.1
    nms_iou: float = 0.55
    enable_tiling: bool = True
    enable_spatial: bool = True
    enable_semantic: bool = True
    enable_reweighting: bool = True
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        for name in ("tau_base", "tau_tile", "quality_threshold", "nms_iou"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v} outside [0, 1]")
        if self.tile_overlap >= self.tile_size:
            raise ValueError(
                f"tile_overlap {self.tile_overlap} must be below "
                f"tile_size {self.tile_size}"
            )
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    def enabled_stages(self) -> tuple:
        stages = ["baseline"]
        for stage, on in (
            ("tiling", self.enable_tiling),
            ("spatial", self.enable_spatial),
            ("semantic", self.enable_semantic),
            ("reweighting", self.enable_reweighting),
        ):
            if on:
                stages.append(stage)
        stages.append("fusion")
        return tuple(stages)


CONFIG_FIELD_NAMES = tuple(f.name for f in fields(Config))


@dataclass(frozen=True)
class ImageCase:
    """One image's cached inputs: detections, ground truth and embeddings."""

    image_id: str
    width: int
    height: int
    baseline_dets: tuple
    tile_dets: tuple  # ((origin_x, origin_y), detections) per tile, in order
    gts: tuple
    embeddings: Optional[dict] = None  # detection id -> vector


def provider_for_case(case: ImageCase) -> Optional[TableEmbeddingProvider]:
    if case.embeddings is None:
        return None
    return TableEmbeddingProvider(case.embeddings)


def run_pipeline(case: ImageCase, cfg: Config, provider=None):
    """Run one image through the configured stages.

    Returns (final detections, stage timings). Baseline detections bypass all
    gates; with tiling disabled the validated set is empty and the output is
    exactly the baseline path.
    """
    if cfg.enable_semantic and provider is None and case.embeddings is None:
        raise PipelineError(
            f"semantic gate enabled but case {case.image_id!r} has no "
            "embeddings and no provider was given"
        )

    timer = StageTimer()
    with timer.stage("baseline"):
        baseline = [d for d in case.baseline_dets if d.score >= cfg.tau_base]

    pool: list = []
    groups = None  # None = no gate ran; list = current surviving groups
    if cfg.enable_tiling:
        with timer.stage("tiling"):
            pool = dedup(
                pool_candidates(case.tile_dets, cfg.tau_tile, tile=cfg.tile_size)
            )
    if cfg.enable_spatial:
        with timer.stage("spatial"):
            if pool:
                eps = adaptive_spatial_eps(pool, cfg.spatial_eps_multiplier)
                groups = spatial_gate(pool, eps, cfg.spatial_min_samples)
            else:
                groups = []
    if cfg.enable_semantic:
        with timer.stage("semantic"):
            if provider is None:
                # embedding ingestion/normalization is semantic-stage work
                provider = provider_for_case(case)
            parents = groups
            if parents is None:
                # no spatial gate: the whole pool is one implicit group
                parents = (
                    [Group(id=0, member_ids=tuple(d.id for d in pool), stage=SPATIAL)]
                    if pool
                    else []
                )
            sem = []
            for parent in parents:
                for sub in semantic_gate(
                    parent, provider, cfg.semantic_eps, cfg.semantic_min_samples
                ):
                    sem.append(
                        Group(
                            id=len(sem),
                            member_ids=sub.member_ids,
                            stage=sub.stage,
                            parent=parent.id,
                        )
                    )
            groups = sem

    by_id = {d.id: d for d in pool}
    if cfg.enable_reweighting:
        with timer.stage("reweighting"):
            current = groups
            if current is None:
                current = (
                    [Group(id=0, member_ids=tuple(d.id for d in pool), stage=SPATIAL)]
                    if pool
                    else []
                )
            validated = []
            for g in current:
                members = [(by_id[i].score, by_id[i].label) for i in g.member_ids]
                report = quality(
                    members,
                    cfg.quality_w1,
                    cfg.quality_w2,
                    cfg.quality_threshold,
                    group_id=g.id,
                )
                if report.retained:
                    dets = [by_id[i] for i in g.member_ids]
                    validated.extend(
                        reweight(dets, len(g), report.q_total, cfg.beta)
                    )
    elif groups is not None:
        validated = [by_id[i] for g in groups for i in g.member_ids]
    else:
        validated = pool

    with timer.stage("fusion"):
        final = fuse(baseline, validated, cfg.nms_iou)
    return final, timer.totals


def evaluate_case(case: ImageCase, cfg: Config, provider=None, iou_min: float = 0.5):
    """Pipeline + matching for one image: (ImageEval, timings, detections)."""
    final, timings = run_pipeline(case, cfg, provider)
    image_eval = evaluate_image(case.image_id, final, case.gts, iou_min)
    return image_eval, timings, final


def _evaluate_case_args(args):
    case, cfg = args
    return evaluate_case(case, cfg)


def default_workers() -> int:
    env = os.environ.get("EVIDENCE_GATE_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def run_dataset(cases, cfg: Config, workers: int = 1):
    """Evaluate a config over a case list.

    Returns (EvalReport, per-image final detections in input order). Results
    are merged in input order, so reports are identical for any worker count.
    """
    if not cases:
        raise ValueError("cannot evaluate an empty dataset")
    jobs = [(case, cfg) for case in cases]
    if workers <= 1 or len(cases) == 1:
        results = [_evaluate_case_args(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_case_args, jobs))
    per_image = [r[0] for r in results]
    timings = [r[1] for r in results]
    detections = [r[2] for r in results]
    return aggregate(per_image, timings), detections


# Cumulative toggle ladder: Baseline -> Tiling -> Spatial -> Semantic -> Reweighting.
ABLATION_LADDER = (
    ("baseline", dict(enable_tiling=False, enable_spatial=False,
                      enable_semantic=False, enable_reweighting=False)),
    ("+tiling", dict(enable_tiling=True, enable_spatial=False,
                     enable_semantic=False, enable_reweighting=False)),
    ("+spatial", dict(enable_tiling=True, enable_spatial=True,
                      enable_semantic=False, enable_reweighting=False)),
    ("+semantic", dict(enable_tiling=True, enable_spatial=True,
                       enable_semantic=True, enable_reweighting=False)),
    ("+reweighting", dict(enable_tiling=True, enable_spatial=True,
                          enable_semantic=True, enable_reweighting=True)),
)


def run_ablation(cases, cfg: Config, workers: int = 1):
    """Evaluate the five cumulative configurations in ladder order."""
    if not cases:
        raise ValueError("cannot ablate an empty dataset")
    rows = []
    for name, toggles in ABLATION_LADDER:
        report, _ = run_dataset(cases, replace(cfg, **toggles), workers)
        rows.append((name, report))
    return rows
