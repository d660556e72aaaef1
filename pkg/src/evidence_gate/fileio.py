"""File formats: cases, detections, embeddings, configs, reports, VisDrone.

All writers are deterministic (fixed field order, 6-decimal coordinates,
fixed line order) so identical inputs produce byte-identical files. Every
loader rejects files whose version header differs from the writer's.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .evaluation import EvalReport, GroundTruthBox
from .geometry import BASELINE, BBox, Detection, is_tile_source, tile_index_of
from .pipeline import CONFIG_FIELD_NAMES, Config, ImageCase

log = logging.getLogger(__name__)

CASE_HEADER = "#evidence-case v1"
DETECTIONS_HEADER = "#evidence-detections v1"
EMBEDDINGS_HEADER = "#evidence-embeddings v1"
REPORT_HEADER = "#evidence-report v1"

EMBEDDING_NORM_TOL = 1e-4
VISDRONE_IGNORED_CATEGORY = 0


class DataError(Exception):
    """A file could not be parsed or violates its format contract."""


def _fmt(value: float) -> str:
    return f"{value:.6f}"


# --- detection records -------------------------------------------------

def format_detection(image_id: str, det: Detection,
                     tile_origin: Optional[Tuple[float, float]] = None) -> str:
    b = det.box
    if tile_origin is None:
        ox = oy = "-"
    else:
        ox, oy = _fmt(tile_origin[0]), _fmt(tile_origin[1])
    return "\t".join(
        [
            image_id,
            str(det.id),
            _fmt(b.x1),
            _fmt(b.y1),
            _fmt(b.x2),
            _fmt(b.y2),
            str(det.label),
            _fmt(det.score),
            det.source,
            ox,
            oy,
        ]
    )


def parse_detection(line: str, lineno: int):
    """Returns (image_id, Detection, tile_origin or None)."""
    parts = line.split("\t")
    if len(parts) != 11:
        raise DataError(f"line {lineno}: expected 11 fields, got {len(parts)}")
    try:
        image_id = parts[0]
        det = Detection(
            box=BBox(*(float(v) for v in parts[2:6])),
            label=int(parts[6]),
            score=float(parts[7]),
            id=int(parts[1]),
            source=parts[8],
        )
        origin = None
        if parts[9] != "-":
            origin = (float(parts[9]), float(parts[10]))
    except (ValueError, TypeError) as exc:
        raise DataError(f"line {lineno}: {exc}") from exc
    return image_id, det, origin


def save_detections(path, records, header: str = DETECTIONS_HEADER):
    """records: iterable of (image_id, Detection, tile_origin or None)."""
    lines = [header]
    lines.extend(format_detection(*rec) for rec in records)
    Path(path).write_text("\n".join(lines) + "\n")


def load_detections(path) -> List[Tuple[str, Detection, Optional[Tuple]]]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != DETECTIONS_HEADER:
        raise DataError(f"{path}: missing or mismatched header "
                        f"(expected {DETECTIONS_HEADER!r})")
    return [parse_detection(line, i + 1) for i, line in enumerate(lines[1:]) if line]


# --- embeddings --------------------------------------------------------

def format_embedding(image_id: str, det_id: int, vector) -> str:
    vals = "\t".join(_fmt(v) for v in np.asarray(vector, dtype=float))
    return f"{image_id}\t{det_id}\t{vals}"


def parse_embedding(line: str, lineno: int):
    parts = line.split("\t")
    if len(parts) < 3:
        raise DataError(f"line {lineno}: embedding record too short")
    try:
        det_id = int(parts[1])
        vec = np.array(parts[2:], dtype=float)
    except ValueError as exc:
        raise DataError(f"line {lineno}: {exc}") from exc
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > EMBEDDING_NORM_TOL:
        raise DataError(
            f"line {lineno}: embedding norm {norm:.6f} deviates from 1 by "
            f"more than {EMBEDDING_NORM_TOL}"
        )
    return parts[0], det_id, vec / norm


def save_embeddings(path, image_id: str, table: Dict[int, np.ndarray]):
    lines = [EMBEDDINGS_HEADER]
    for det_id in sorted(table):
        lines.append(format_embedding(image_id, det_id, table[det_id]))
    Path(path).write_text("\n".join(lines) + "\n")


def load_embeddings(path) -> Dict[int, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != EMBEDDINGS_HEADER:
        raise DataError(f"{path}: missing or mismatched embeddings header")
    table = {}
    for i, line in enumerate(lines[1:]):
        if line:
            _, det_id, vec = parse_embedding(line, i + 1)
            table[det_id] = vec
    return table


# --- image cases -------------------------------------------------------

def save_case(case: ImageCase, path):
    lines = [CASE_HEADER]
    lines.append(f"image_id\t{case.image_id}")
    lines.append(f"width\t{case.width}")
    lines.append(f"height\t{case.height}")
    origins = ";".join(f"{_fmt(ox)},{_fmt(oy)}" for (ox, oy), _ in case.tile_dets)
    lines.append(f"tiles\t{origins}")
    lines.append("[detections]")
    for det in case.baseline_dets:
        lines.append(format_detection(case.image_id, det, None))
    for tile_index, (origin, dets) in enumerate(case.tile_dets):
        for det in dets:
            # boxes stay tile-local; the source tag records the tile index
            tagged = replace(det, source=f"tile:{tile_index}")
            lines.append(format_detection(case.image_id, tagged, origin))
    lines.append("[ground_truth]")
    for gt in case.gts:
        b = gt.box
        lines.append("\t".join(
            [_fmt(b.x1), _fmt(b.y1), _fmt(b.x2), _fmt(b.y2), str(gt.label)]
        ))
    if case.embeddings is not None:
        lines.append("[embeddings]")
        for det_id in sorted(case.embeddings):
            lines.append(
                format_embedding(case.image_id, det_id, case.embeddings[det_id])
            )
    Path(path).write_text("\n".join(lines) + "\n")


def load_case(path, expected_grid=None) -> ImageCase:
    """Parse a case file. If `expected_grid` (tile origins) is given and the
    case was saved with a different grid, a warning is logged and the case's
    own grid wins."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CASE_HEADER:
        raise DataError(
            f"{path}: missing or mismatched case header (expected {CASE_HEADER!r})"
        )
    header: Dict[str, str] = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("["):
        if lines[i]:
            try:
                key, value = lines[i].split("\t", 1)
            except ValueError:
                raise DataError(f"{path} line {i + 1}: malformed header line")
            header[key] = value
        i += 1
    for key in ("image_id", "width", "height", "tiles"):
        if key not in header:
            raise DataError(f"{path}: header missing {key!r}")
    image_id = header["image_id"]
    origins = []
    if header["tiles"]:
        for token in header["tiles"].split(";"):
            ox, oy = token.split(",")
            origins.append((float(ox), float(oy)))
    if expected_grid is not None and list(expected_grid) != origins:
        log.warning(
            "%s: case tile grid differs from the active config; the case's "
            "own grid wins", path
        )

    section = None
    baseline: List[Detection] = []
    per_tile: Dict[int, List[Detection]] = {k: [] for k in range(len(origins))}
    gts: List[GroundTruthBox] = []
    embeddings: Optional[Dict[int, np.ndarray]] = None
    for lineno in range(i, len(lines)):
        line = lines[lineno]
        if not line:
            continue
        if line.startswith("["):
            section = line
            if section == "[embeddings]":
                embeddings = {}
            continue
        if section == "[detections]":
            rec_id, det, origin = parse_detection(line, lineno + 1)
            if rec_id != image_id:
                raise DataError(
                    f"{path} line {lineno + 1}: image_id {rec_id!r} does not "
                    f"match header {image_id!r}"
                )
            if det.source == BASELINE:
                baseline.append(det)
            else:
                idx = tile_index_of(det.source)
                if idx not in per_tile:
                    raise DataError(
                        f"{path} line {lineno + 1}: tile index {idx} not in "
                        "the declared grid"
                    )
                # stored tile-local; strip the source tag so pooling re-tags
                per_tile[idx].append(replace(det, source=BASELINE))
        elif section == "[ground_truth]":
            parts = line.split("\t")
            if len(parts) != 5:
                raise DataError(f"{path} line {lineno + 1}: bad ground-truth row")
            try:
                gts.append(
                    GroundTruthBox(
                        BBox(*(float(v) for v in parts[:4])), int(parts[4])
                    )
                )
            except ValueError as exc:
                raise DataError(f"{path} line {lineno + 1}: {exc}") from exc
        elif section == "[embeddings]":
            _, det_id, vec = parse_embedding(line, lineno + 1)
            embeddings[det_id] = vec
        else:
            raise DataError(f"{path} line {lineno + 1}: data outside a section")

    tile_dets = tuple(
        (origins[k], tuple(per_tile[k])) for k in range(len(origins))
    )
    return ImageCase(
        image_id=image_id,
        width=int(header["width"]),
        height=int(header["height"]),
        baseline_dets=tuple(baseline),
        tile_dets=tile_dets,
        gts=tuple(gts),
        embeddings=embeddings,
    )


def save_cases(cases, out_dir) -> List[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for case in cases:
        path = out / f"{case.image_id}.case"
        save_case(case, path)
        paths.append(path)
    return paths


def load_cases(case_dir, expected_grid=None) -> List[ImageCase]:
    paths = sorted(Path(case_dir).glob("*.case"))
    if not paths:
        raise DataError(f"no .case files found in {case_dir}")
    return [load_case(p, expected_grid) for p in paths]


# --- config files ------------------------------------------------------

def _coerce_config_value(name: str, raw: str):
    target = Config.__dataclass_fields__[name].type
    raw = raw.strip()
    if "bool" in target:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise DataError(f"bad boolean for {name}: {raw!r}")
    if "int" in target:
        return int(raw)
    return float(raw)


def load_config(path) -> Config:
    """Flat key=value config; unknown keys are errors (typo protection)."""
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise DataError(f"{path} line {lineno}: expected key = value")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in CONFIG_FIELD_NAMES:
            raise DataError(f"{path} line {lineno}: unknown config key {key!r}")
        try:
            overrides[key] = _coerce_config_value(key, raw)
        except ValueError as exc:
            raise DataError(f"{path} line {lineno}: {exc}") from exc
    try:
        return Config(**overrides)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def save_config(cfg: Config, path):
    lines = [f"{name} = {getattr(cfg, name)}" for name in CONFIG_FIELD_NAMES]
    Path(path).write_text("\n".join(lines) + "\n")


# --- VisDrone annotations ----------------------------------------------

def load_visdrone_annotations(path) -> List[GroundTruthBox]:
    """Parse one VisDrone annotation file: x,y,w,h,score,category,trunc,occl.

    Degenerate boxes (w <= 0 or h <= 0) and the ignored-regions category are
    dropped with a counted warning.
    """
    boxes = []
    dropped = 0
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.strip().rstrip(",")
        if not stripped:
            continue
        parts = stripped.split(",")
        if len(parts) < 6:
            raise DataError(f"{path} line {lineno}: expected >= 6 fields")
        try:
            x, y, w, h = (float(v) for v in parts[:4])
            category = int(parts[5])
        except ValueError as exc:
            raise DataError(f"{path} line {lineno}: {exc}") from exc
        if w <= 0 or h <= 0:
            dropped += 1
            continue
        if category == VISDRONE_IGNORED_CATEGORY:
            dropped += 1
            continue
        boxes.append(GroundTruthBox(BBox(x, y, x + w, y + h), category))
    if dropped:
        log.warning("%s: dropped %d degenerate/ignored annotations", path, dropped)
    return boxes


# --- reports -----------------------------------------------------------

def save_report_text(report: EvalReport, path):
    lines = [REPORT_HEADER]
    lines.append("image_id\ttp\tfp\tfn\tprecision\trecall\tf1")
    for e in report.per_image:
        lines.append(
            f"{e.image_id}\t{e.tp}\t{e.fp}\t{e.fn}\t"
            f"{_fmt(e.precision)}\t{_fmt(e.recall)}\t{_fmt(e.f1)}"
        )
    lines.append(
        f"MEAN\t-\t-\t-\t{_fmt(report.mean_precision)}\t"
        f"{_fmt(report.mean_recall)}\t{_fmt(report.mean_f1)}"
    )
    Path(path).write_text("\n".join(lines) + "\n")


def save_report_json(report: EvalReport, path):
    """Machine-readable metrics; latency is excluded (see save_timing_json)
    so the file is bitwise reproducible across runs and worker counts."""
    payload = {
        "mean_precision": report.mean_precision,
        "mean_recall": report.mean_recall,
        "mean_f1": report.mean_f1,
        "per_image": [
            {
                "image_id": e.image_id,
                "tp": e.tp,
                "fp": e.fp,
                "fn": e.fn,
                "precision": e.precision,
                "recall": e.recall,
                "f1": e.f1,
            }
            for e in report.per_image
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def save_timing_json(report: EvalReport, path):
    Path(path).write_text(
        json.dumps({"stage_latency_s": report.stage_latency}, indent=2,
                   sort_keys=True) + "\n"
    )
