"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or malformed
inputs). Reports are written as delimited text plus rendered figures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import fileio, plots
from .fileio import DataError
from .pipeline import (
    Config,
    default_workers,
    run_ablation,
    run_dataset,
    run_pipeline,
)
from .render import render_overlay
from .search import DEFAULT_STAGE_B_N, run_search, sensitivity
from .synth import DEFAULT_SCENE_SPEC, make_benchmark

PRIMARY_PARAMS = ("tau_base", "spatial_eps_multiplier", "tau_tile", "semantic_eps")
SECONDARY_PARAMS = ("beta", "quality_threshold", "nms_iou", "semantic_min_samples")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _common_flags(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="random seed (default: config seed)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: $EVIDENCE_GATE_WORKERS or 1)")


def build_parser() -> _Parser:
    parser = _Parser(prog="evidence-gate",
                     description="Group-evidence detection post-processing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[], help="generate a synthetic benchmark")
    _common_flags(p)
    p.add_argument("--scenes", type=int, default=50)

    p = sub.add_parser("pipeline", help="run one config over a case set")
    _common_flags(p)
    p.add_argument("--cases", required=True, help="directory of .case files")

    p = sub.add_parser("ablate", help="cumulative module ablation ladder")
    _common_flags(p)
    p.add_argument("--cases", required=True)

    p = sub.add_parser("search", help="two-stage parameter study")
    _common_flags(p)
    p.add_argument("--cases", required=True)
    p.add_argument("--stage-b-n", type=int, default=DEFAULT_STAGE_B_N)
    p.add_argument("--subset", default=None,
                   help="comma-separated image ids to search on")

    p = sub.add_parser("eval", help="metrics for an existing detections file")
    _common_flags(p)
    p.add_argument("--cases", required=True)
    p.add_argument("--dets", required=True, help="detections .tsv file")

    p = sub.add_parser("render", help="SVG overlays, baseline vs full pipeline")
    _common_flags(p)
    p.add_argument("--cases", required=True)
    return parser


def _load_config(args) -> Config:
    cfg = fileio.load_config(args.config) if args.config else Config()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _workers(args) -> int:
    return args.workers if args.workers is not None else default_workers()


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_embeddings(cases, semantic_needed: bool):
    """Surface a missing-embeddings error at load time, not mid-run."""
    if not semantic_needed:
        return
    missing = [c.image_id for c in cases if c.embeddings is None]
    if missing:
        raise DataError(
            "semantic gate enabled but these cases carry no embeddings: "
            + ", ".join(missing[:5])
            + ("..." if len(missing) > 5 else "")
        )


def _cmd_synth(args) -> int:
    cfg = _load_config(args)
    cases = make_benchmark(
        base_seed=cfg.seed,
        n_scenes=args.scenes,
        spec=DEFAULT_SCENE_SPEC,
        tile_size=cfg.tile_size,
        tile_overlap=cfg.tile_overlap,
    )
    paths = fileio.save_cases(cases, _out_dir(args))
    print(f"wrote {len(paths)} cases to {args.out}")
    return 0


def _cmd_pipeline(args) -> int:
    cfg = _load_config(args)
    cases = fileio.load_cases(args.cases)
    _require_embeddings(cases, cfg.enable_semantic)
    report, detections = run_dataset(cases, cfg, _workers(args))
    out = _out_dir(args)
    fileio.save_report_text(report, out / "report.txt")
    fileio.save_report_json(report, out / "report.json")
    fileio.save_timing_json(report, out / "timing.json")
    records = []
    for case, dets in zip(cases, detections):
        records.extend((case.image_id, det, None) for det in dets)
    fileio.save_detections(out / "detections.tsv", records)
    plots.save_metrics_figure(report, out / "metrics.png")
    print(
        f"P {report.mean_precision:.4f}  R {report.mean_recall:.4f}  "
        f"F1 {report.mean_f1:.4f}  ({len(cases)} images)"
    )
    return 0


def _ablation_tsv(rows, path):
    lines = ["config\tprecision\trecall\tf1\ttime_s"]
    for name, rep in rows:
        total = sum(rep.stage_latency.values())
        lines.append(
            f"{name}\t{rep.mean_precision:.6f}\t{rep.mean_recall:.6f}\t"
            f"{rep.mean_f1:.6f}\t{total:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _cmd_ablate(args) -> int:
    cfg = _load_config(args)
    cases = fileio.load_cases(args.cases)
    _require_embeddings(cases, True)  # the ladder always reaches +semantic
    rows = run_ablation(cases, cfg, _workers(args))
    out = _out_dir(args)
    _ablation_tsv(rows, out / "ablation.tsv")
    plots.save_ablation_figure(rows, out / "ablation.png")
    for name, rep in rows:
        fileio.save_report_json(rep, out / f"report_{name.lstrip('+')}.json")
        print(
            f"{name:13s} P {rep.mean_precision:.4f} R {rep.mean_recall:.4f} "
            f"F1 {rep.mean_f1:.4f}"
        )
    return 0


def _results_tsv(results, path, with_time=True):
    cols = ["config_id", "tau_base", "tau_tile", "spatial_eps_multiplier",
            "semantic_eps", "beta", "quality_threshold", "nms_iou",
            "semantic_min_samples", "precision", "recall", "f1"]
    if with_time:
        cols.append("time_s")
    lines = ["\t".join(cols)]
    for r in results:
        c = r.config
        row = [
            r.config_id, f"{c.tau_base:.6f}", f"{c.tau_tile:.6f}",
            f"{c.spatial_eps_multiplier:.6f}", f"{c.semantic_eps:.6f}",
            f"{c.beta:.6f}", f"{c.quality_threshold:.6f}", f"{c.nms_iou:.6f}",
            str(c.semantic_min_samples), f"{r.mean_precision:.6f}",
            f"{r.mean_recall:.6f}", f"{r.mean_f1:.6f}",
        ]
        if with_time:
            row.append(f"{r.mean_time_s:.6f}")
        lines.append("\t".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def _sensitivity_tsv(summaries, path):
    lines = ["param\tvalue\tmin\tq1\tmedian\tq3\tmax"]
    for param, summary in summaries:
        for value, (mn, q1, med, q3, mx) in summary.items():
            lines.append(
                f"{param}\t{value}\t{mn:.6f}\t{q1:.6f}\t{med:.6f}\t"
                f"{q3:.6f}\t{mx:.6f}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def _cmd_search(args) -> int:
    cfg = _load_config(args)
    cases = fileio.load_cases(args.cases)
    _require_embeddings(cases, True)  # both search stages use the full pipeline
    if args.subset:
        wanted = args.subset.split(",")
        by_id = {c.image_id: c for c in cases}
        missing = [w for w in wanted if w not in by_id]
        if missing:
            raise DataError(f"subset ids not found: {', '.join(missing)}")
        cases = [by_id[w] for w in wanted]
    outcome = run_search(cases, seed=cfg.seed, base=cfg,
                         stage_b_n=args.stage_b_n, workers=_workers(args))
    out = _out_dir(args)
    results = list(outcome.all_results)
    _results_tsv(results, out / "results.tsv", with_time=True)
    # time is wall-clock and non-reproducible, so the front table omits it
    _results_tsv(outcome.front, out / "pareto.tsv", with_time=False)
    summaries = [(p, sensitivity(outcome.stage_a, p)) for p in PRIMARY_PARAMS]
    summaries += [(p, sensitivity(outcome.stage_b, p)) for p in SECONDARY_PARAMS]
    _sensitivity_tsv(summaries, out / "sensitivity.tsv")
    plots.save_pareto_figure(results, list(outcome.front), out / "pareto.png")
    plots.save_sensitivity_figure(outcome.stage_a, PRIMARY_PARAMS,
                                  out / "sensitivity_primary.png")
    plots.save_sensitivity_figure(outcome.stage_b, SECONDARY_PARAMS,
                                  out / "sensitivity_secondary.png")
    best = outcome.front[0] if outcome.front else None
    print(f"stage A: {len(outcome.stage_a)} configs, "
          f"stage B: {len(outcome.stage_b)} configs, "
          f"pareto front: {len(outcome.front)}")
    if best:
        print(f"top-recall front member {best.config_id}: "
              f"P {best.mean_precision:.4f} R {best.mean_recall:.4f}")
    return 0


def _cmd_eval(args) -> int:
    from .evaluation import aggregate, evaluate_image

    cases = fileio.load_cases(args.cases)
    records = fileio.load_detections(args.dets)
    by_image = {}
    for image_id, det, _ in records:
        by_image.setdefault(image_id, []).append(det)
    per_image = [
        evaluate_image(c.image_id, by_image.get(c.image_id, []), c.gts)
        for c in cases
    ]
    report = aggregate(per_image)
    out = _out_dir(args)
    fileio.save_report_text(report, out / "report.txt")
    fileio.save_report_json(report, out / "report.json")
    plots.save_metrics_figure(report, out / "metrics.png")
    print(f"P {report.mean_precision:.4f}  R {report.mean_recall:.4f}  "
          f"F1 {report.mean_f1:.4f}")
    return 0


def _cmd_render(args) -> int:
    cfg = _load_config(args)
    cases = fileio.load_cases(args.cases)
    _require_embeddings(cases, cfg.enable_semantic)
    out = _out_dir(args)
    for case in cases:
        final, _ = run_pipeline(case, cfg)
        render_overlay(case, final, out / f"{case.image_id}.svg",
                       tau_base=cfg.tau_base)
    print(f"rendered {len(cases)} overlays to {args.out}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "pipeline": _cmd_pipeline,
    "ablate": _cmd_ablate,
    "search": _cmd_search,
    "eval": _cmd_eval,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (DataError, FileNotFoundError) as exc:
        print(f"evidence-gate: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
