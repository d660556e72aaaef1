"""Detector-agnostic post-processing that turns overlapping-tile redundancy
into group evidence: spatial/semantic clustering gates, quality-aware
confidence reweighting, and class-balanced NMS fusion."""

from .clustering import ClusterLabeling, dbscan
from .evaluation import EvalReport, GroundTruthBox, aggregate, match, prf
from .fusion import cb_nms, fuse
from .gating import (
    Group,
    TableEmbeddingProvider,
    adaptive_spatial_eps,
    normalize_embedding,
    semantic_gate,
    spatial_gate,
)
from .geometry import BBox, Detection, centroid, diagonal, iou
from .pipeline import Config, ImageCase, run_ablation, run_dataset, run_pipeline
from .scoring import QualityReport, quality, quality_gate, reweight
from .search import pareto_front, sensitivity, stage_a_grid, stage_b_random
from .synth import SceneSpec, gen_scene, make_benchmark, simulate_detections
from .tiling import TileGrid, dedup, globalize, plan_tiles, pool_candidates

__version__ = "0.1.0"
