"""SVG overlay renderer: side-by-side baseline vs full-pipeline panels."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

from .pipeline import ImageCase

SVG_NS = "http://www.w3.org/2000/svg"

# stroke styles per element kind
STYLES = {
    "gt": dict(stroke="#2ca02c", dasharray="6,4"),
    "baseline": dict(stroke="#1f77b4", dasharray=None),
    "recovered": dict(stroke="#d62728", dasharray=None),
}

PANEL_MAX_W = 640.0
GUTTER = 24.0
TITLE_H = 28.0


def _add_box(parent, box, kind: str, scale: float, dx: float, dy: float,
             label_text: str = None):
    style = STYLES[kind]
    attrs = {
        "class": kind,
        "x": f"{dx + box.x1 * scale:.2f}",
        "y": f"{dy + box.y1 * scale:.2f}",
        "width": f"{box.width * scale:.2f}",
        "height": f"{box.height * scale:.2f}",
        "fill": "none",
        "stroke": style["stroke"],
        "stroke-width": "1.2",
    }
    if style["dasharray"]:
        attrs["stroke-dasharray"] = style["dasharray"]
    ET.SubElement(parent, "rect", attrs)
    if label_text:
        text = ET.SubElement(
            parent,
            "text",
            {
                "class": f"{kind}-label",
                "x": f"{dx + box.x1 * scale:.2f}",
                "y": f"{max(dy + box.y1 * scale - 2.0, dy + 8.0):.2f}",
                "font-size": "8",
                "fill": style["stroke"],
            },
        )
        text.text = label_text


def _panel_title(parent, text, x, y):
    el = ET.SubElement(
        parent, "text",
        {"x": f"{x:.2f}", "y": f"{y:.2f}", "font-size": "14", "fill": "#333"},
    )
    el.text = text


def render_overlay(case: ImageCase, final_dets, path, tau_base: float = 0.30):
    """Write a two-panel SVG: baseline-path output left, fused output right.

    Ground truth is dashed green in both panels; baseline-sourced detections
    are blue; tile-sourced (recovered) survivors are red.
    """
    scale = min(1.0, PANEL_MAX_W / case.width)
    pw = case.width * scale
    ph = case.height * scale
    total_w = 2 * pw + GUTTER
    total_h = ph + TITLE_H

    ET.register_namespace("", SVG_NS)
    svg = ET.Element(
        f"{{{SVG_NS}}}svg",
        {
            "width": f"{total_w:.0f}",
            "height": f"{total_h:.0f}",
            "viewBox": f"0 0 {total_w:.0f} {total_h:.0f}",
        },
    )
    ET.SubElement(
        svg, "rect",
        {"x": "0", "y": "0", "width": f"{total_w:.0f}",
         "height": f"{total_h:.0f}", "fill": "#ffffff"},
    )
    panels = (
        ("baseline", 0.0),
        ("full pipeline", pw + GUTTER),
    )
    baseline_dets = [d for d in case.baseline_dets if d.score >= tau_base]
    for title, dx in panels:
        _panel_title(svg, f"{case.image_id} — {title}", dx + 4.0, 18.0)
        ET.SubElement(
            svg, "rect",
            {"x": f"{dx:.2f}", "y": f"{TITLE_H:.2f}", "width": f"{pw:.2f}",
             "height": f"{ph:.2f}", "fill": "none", "stroke": "#999"},
        )
        for gt in case.gts:
            _add_box(svg, gt.box, "gt", scale, dx, TITLE_H)

    # left: the baseline path only
    for det in baseline_dets:
        _add_box(svg, det.box, "baseline", scale, 0.0, TITLE_H,
                 f"{det.label}:{det.score:.2f}")
    # right: fused output, styled by provenance
    dx = pw + GUTTER
    for det in final_dets:
        kind = "recovered" if det.from_tile else "baseline"
        _add_box(svg, det.box, kind, scale, dx, TITLE_H,
                 f"{det.label}:{det.score:.2f}")

    Path(path).write_bytes(
        ET.tostring(svg, encoding="utf-8", xml_declaration=True) + b"\n"
    )
