"""Overlapping tile grid planning, coordinate lifting, pooling and dedup."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .geometry import BBox, Detection, tile_source

TILE_EXTENT_TOL = 1e-6
DEDUP_DECIMALS = 3  # dedup key rounds coordinates to 1e-3 px


@dataclass(frozen=True)
class TileGrid:
    image_w: int
    image_h: int
    tile: int
    overlap: int
    origins: tuple  # (x, y) top-left corners, row-major

    @property
    def stride(self) -> int:
        return self.tile - self.overlap


def plan_tiles(image_w, image_h, tile, overlap, complete_coverage=True) -> TileGrid:
    """Anchor grid {0, S, 2S, ...} clipped to [0, W-T] x [0, H-T].

    With `complete_coverage`, an extra anchor at exactly W-T (resp. H-T) is
    appended whenever the raw grid stops short, so the tile union covers the
    whole image.
    """
    if overlap < 0:
        raise ValueError(f"overlap must be >= 0, got {overlap}")
    if overlap >= tile:
        raise ValueError(f"overlap {overlap} must be smaller than tile {tile}")
    if tile > min(image_w, image_h):
        raise ValueError(
            f"tile {tile} exceeds image dimension {image_w}x{image_h}"
        )
    stride = tile - overlap

    def axis_anchors(extent):
        last = extent - tile
        anchors = list(range(0, last + 1, stride))
        if complete_coverage and anchors[-1] < last:
            anchors.append(last)
        return anchors

    xs = axis_anchors(image_w)
    ys = axis_anchors(image_h)
    origins = tuple((x, y) for y in ys for x in xs)
    return TileGrid(image_w, image_h, tile, overlap, origins)


def globalize(origin, det: Detection, tile_index: int, tile: float = None) -> Detection:
    """Lift a tile-local detection into image coordinates."""
    ox, oy = origin
    b = det.box
    if tile is not None:
        lo, hi = -TILE_EXTENT_TOL, tile + TILE_EXTENT_TOL
        if b.x1 < lo or b.y1 < lo or b.x2 > hi or b.y2 > hi:
            raise ValueError(
                f"detection {det.id} box ({b.x1}, {b.y1}, {b.x2}, {b.y2}) "
                f"extends beyond the {tile}px tile extent"
            )
    return replace(det, box=b.translated(ox, oy), source=tile_source(tile_index))


def pool_candidates(per_tile, tau_tile: float, tile: float = None) -> list:
    """Union of globalized tile detections with score >= tau_tile.

    `per_tile` is a list of (origin, detections) in tile-index order; output
    order is tile index, then input order within each tile.
    """
    pool = []
    for tile_index, (origin, dets) in enumerate(per_tile):
        for det in dets:
            if det.score >= tau_tile:
                pool.append(globalize(origin, det, tile_index, tile=tile))
    return pool


def _dedup_key(det: Detection):
    b = det.box
    return (
        round(b.x1, DEDUP_DECIMALS),
        round(b.y1, DEDUP_DECIMALS),
        round(b.x2, DEDUP_DECIMALS),
        round(b.y2, DEDUP_DECIMALS),
        det.label,
    )


def dedup(pool) -> list:
    """Collapse exact (box, label) repeats, keeping the highest-scoring one.

    First-seen order is preserved; near-duplicates are deliberately left for
    the gates and NMS.
    """
    best = {}
    order = []
    for det in pool:
        key = _dedup_key(det)
        if key not in best:
            best[key] = det
            order.append(key)
        elif det.score > best[key].score:
            best[key] = det
    return [best[key] for key in order]
