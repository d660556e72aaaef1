"""Two-stage parameter study: coarse grid, seeded random refinement,
Pareto extraction and per-parameter sensitivity summaries."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Dict, List, Sequence

import numpy as np

from .pipeline import Config, run_dataset

# Stage-A coarse grid over the four primary parameters (24 configurations).
STAGE_A_AXES = (
    ("tau_base", (0.25, 0.30)),
    ("spatial_eps_multiplier", (1.0, 1.5, 2.0)),
    ("tau_tile", (0.15, 0.20)),
    ("semantic_eps", (0.30, 0.40)),
)

# Stage-B sampling ranges over the secondary parameters.
STAGE_B_UNIFORM = (
    ("beta", (0.05, 0.2)),
    ("quality_threshold", (0.2, 0.4)),
    ("nms_iou", (0.45, 0.65)),
)
STAGE_B_CHOICES = (("semantic_min_samples", (2, 3, 4)),)

DEFAULT_STAGE_B_N = 18


@dataclass(frozen=True)
class SearchResult:
    config_id: str
    config: Config
    mean_precision: float
    mean_recall: float
    mean_f1: float
    mean_time_s: float


def stage_a_grid(base: Config = None) -> List[Config]:
    """Full Cartesian product of the Stage-A axes in lexicographic order.

    Secondary parameters stay at the base config's (default) values.
    """
    if base is None:
        base = Config()
    names = [name for name, _ in STAGE_A_AXES]
    configs = []
    for combo in itertools.product(*(values for _, values in STAGE_A_AXES)):
        configs.append(replace(base, **dict(zip(names, combo))))
    return configs


def stage_b_random(seed: int, n: int = DEFAULT_STAGE_B_N,
                   base: Config = None) -> List[Config]:
    """n seeded random configs; primary params stay fixed to `base`."""
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    if base is None:
        base = Config()
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(n):
        overrides = {}
        for name, (lo, hi) in STAGE_B_UNIFORM:
            overrides[name] = float(rng.uniform(lo, hi))
        for name, choices in STAGE_B_CHOICES:
            overrides[name] = int(choices[rng.integers(0, len(choices))])
        configs.append(replace(base, **overrides))
    return configs


def evaluate_configs(cases, configs: Sequence[Config], prefix: str,
                     workers: int = 1) -> List[SearchResult]:
    """Run every config over the case set, in order, tagging ids prefix+NN."""
    results = []
    for i, cfg in enumerate(configs):
        report, _ = run_dataset(cases, cfg, workers)
        results.append(
            SearchResult(
                config_id=f"{prefix}{i:02d}",
                config=cfg,
                mean_precision=report.mean_precision,
                mean_recall=report.mean_recall,
                mean_f1=report.mean_f1,
                mean_time_s=sum(report.stage_latency.values()),
            )
        )
    return results


def best_result(results: Sequence[SearchResult]) -> SearchResult:
    """Highest mean F1; ties break toward higher recall, then lower id."""
    return min(
        results, key=lambda r: (-r.mean_f1, -r.mean_recall, r.config_id)
    )


def _dominates(a: SearchResult, b: SearchResult) -> bool:
    return (
        a.mean_precision >= b.mean_precision
        and a.mean_recall >= b.mean_recall
        and (a.mean_precision > b.mean_precision or a.mean_recall > b.mean_recall)
    )


def pareto_front(results: Sequence[SearchResult]) -> List[SearchResult]:
    """Non-dominated set in the (precision, recall) plane.

    Duplicated points keep one representative (lowest config_id). Output is
    sorted by recall descending.
    """
    front = []
    for r in results:
        if any(_dominates(other, r) for other in results):
            continue
        twin = next(
            (
                f
                for f in front
                if f.mean_precision == r.mean_precision
                and f.mean_recall == r.mean_recall
            ),
            None,
        )
        if twin is not None:
            if r.config_id < twin.config_id:
                front[front.index(twin)] = r
            continue
        front.append(r)
    front.sort(key=lambda r: (-r.mean_recall, -r.mean_precision, r.config_id))
    return front


def sensitivity(results: Sequence[SearchResult], param: str) -> Dict:
    """Five-number F1 summary per distinct value of one config field.

    Quartiles use linear interpolation. Returns {value: (min, q1, median,
    q3, max)} with values in ascending order.
    """
    if not results:
        raise ValueError("no results to summarize")
    if not hasattr(results[0].config, param):
        raise ValueError(f"unknown config parameter: {param!r}")
    groups: Dict = {}
    for r in results:
        groups.setdefault(getattr(r.config, param), []).append(r.mean_f1)
    summary = {}
    for value in sorted(groups):
        f1s = np.array(groups[value])
        q = np.percentile(f1s, [0, 25, 50, 75, 100], method="linear")
        summary[value] = tuple(float(v) for v in q)
    return summary


@dataclass(frozen=True)
class SearchOutcome:
    stage_a: tuple
    stage_b: tuple
    best_stage_a: SearchResult
    front: tuple  # Pareto front over stage A + B combined

    @property
    def all_results(self) -> tuple:
        return self.stage_a + self.stage_b


def run_search(cases, seed: int, base: Config = None,
               stage_b_n: int = DEFAULT_STAGE_B_N,
               workers: int = 1) -> SearchOutcome:
    """Stage-A grid, then Stage-B random search around the best grid config."""
    stage_a = evaluate_configs(cases, stage_a_grid(base), "A", workers)
    best_a = best_result(stage_a)
    stage_b_cfgs = stage_b_random(seed, stage_b_n, base=best_a.config)
    stage_b = evaluate_configs(cases, stage_b_cfgs, "B", workers)
    front = pareto_front(list(stage_a) + list(stage_b))
    return SearchOutcome(
        stage_a=tuple(stage_a),
        stage_b=tuple(stage_b),
        best_stage_a=best_a,
        front=tuple(front),
    )
