"""Slice analytics: label stats, edge-anchored annotations, picking,
and highlight recoloring.

Pixel coordinates are (x, y) with x along columns; a pixel's center is
(x + 0.5, y + 0.5). Edge anchors live on the image boundary rectangle,
parameterized by perimeter arc length running clockwise from (0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .slicer import PlaneGeometry, PlaneSlicer, SliceImage, plane_world_to_pixel
from .volume import DomainError


@dataclass
class LabelStats:
    counts: dict[int, int] = field(default_factory=dict)
    centroids: dict[int, tuple[float, float]] = field(default_factory=dict)
    total: int = 0               # non-background pixels


def analyze_slice_labels(labels: np.ndarray) -> LabelStats:
    labels = np.asarray(labels)
    stats = LabelStats()
    if labels.size == 0:
        return stats
    flat = labels.reshape(-1)
    counts = np.bincount(flat)
    h, w = labels.shape
    ys, xs = np.divmod(np.arange(flat.size), w)
    sx = np.bincount(flat, weights=xs + 0.5)
    sy = np.bincount(flat, weights=ys + 0.5)
    for lid in np.nonzero(counts)[0]:
        if lid == 0:
            continue
        c = int(counts[lid])
        stats.counts[int(lid)] = c
        stats.centroids[int(lid)] = (sx[lid] / c, sy[lid] / c)
        stats.total += c
    return stats


def select_key_labels(stats: LabelStats, min_fraction: float = 0.01,
                      max_count: int = 8) -> list[int]:
    """Labels covering at least min_fraction of non-background pixels,
    largest first (ties to the smaller id), at most max_count of them."""
    if not (0 <= min_fraction <= 1) or max_count < 0:
        raise DomainError("bad selection parameters")
    if stats.total == 0:
        return []
    cut = min_fraction * stats.total
    eligible = [lid for lid, c in stats.counts.items() if c >= cut]
    eligible.sort(key=lambda lid: (-stats.counts[lid], lid))
    return eligible[:max_count]


@dataclass
class LabelAnnotation:
    label_id: int
    name: str
    count: int
    centroid: tuple[float, float]
    anchor: tuple[float, float]

    @property
    def leader(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (self.anchor, self.centroid)


class PlacementError(RuntimeError):
    """Edge-label anchors cannot be separated on this perimeter."""


def _perimeter_point(s: float, w: float, h: float) -> tuple[float, float]:
    """Point at arc length s, clockwise from (0,0): top, right, bottom, left."""
    s = s % (2 * (w + h))
    if s < w:
        return (s, 0.0)
    s -= w
    if s < h:
        return (w, s)
    s -= h
    if s < w:
        return (w - s, h)
    s -= w
    return (0.0, h - s)


def _boundary_hit_arclen(cx: float, cy: float, tx: float, ty: float,
                         w: float, h: float) -> float:
    """Arc length of the first boundary hit of the ray center->target."""
    dx, dy = tx - cx, ty - cy
    if dx == 0 and dy == 0:
        dx = 1.0                         # degenerate: +x direction
    best_t = math.inf
    hit = (w, cy)
    for t, px, py in (
        ((0 - cx) / dx if dx else math.inf, 0.0, None),
        ((w - cx) / dx if dx else math.inf, w, None),
        ((0 - cy) / dy if dy else math.inf, None, 0.0),
        ((h - cy) / dy if dy else math.inf, None, h),
    ):
        if t <= 0 or not math.isfinite(t):
            continue
        x = px if px is not None else cx + t * dx
        y = py if py is not None else cy + t * dy
        if -1e-9 <= x <= w + 1e-9 and -1e-9 <= y <= h + 1e-9 and t < best_t:
            best_t = t
            hit = (min(max(x, 0.0), w), min(max(y, 0.0), h))
    x, y = hit
    # invert _perimeter_point
    if y <= 0:
        return x
    if x >= w:
        return w + y
    if y >= h:
        return w + h + (w - x)
    return 2 * w + h + (h - y)


def _circ_dist(a: float, b: float, per: float) -> float:
    d = abs(a - b) % per
    return min(d, per - d)


def place_edge_labels(selected: list[tuple[int, str, int, tuple[float, float]]],
                      width: int, height: int,
                      min_sep_px: float = 24.0) -> list[LabelAnnotation]:
    """Anchor each label on the image edge along the center->centroid ray.

    Conflicting anchors shift forward along the perimeter (wrapping) until
    they are at least min_sep_px from every placed anchor, in selection
    order. ``selected`` entries are (label_id, name, count, centroid).
    """
    if width < 1 or height < 1 or min_sep_px < 0:
        raise DomainError("bad placement parameters")
    per = 2.0 * (width + height)
    if selected and min_sep_px * len(selected) > per:
        raise PlacementError("perimeter too short for requested separation")

    placed: list[float] = []
    out: list[LabelAnnotation] = []
    cx, cy = width / 2.0, height / 2.0
    for lid, name, count, centroid in selected:
        s = _boundary_hit_arclen(cx, cy, centroid[0], centroid[1],
                                 float(width), float(height))
        guard = 4 * len(placed) + 8
        while True:
            conflict = next((p for p in placed
                             if _circ_dist(s, p, per) < min_sep_px), None)
            if conflict is None:
                break
            s = (conflict + min_sep_px) % per
            guard -= 1
            if guard <= 0:
                raise PlacementError("could not separate edge anchors")
        placed.append(s)
        out.append(LabelAnnotation(lid, name, count, centroid,
                                   _perimeter_point(s, width, height)))
    return out


@dataclass
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64)
        self.direction = np.asarray(self.direction, dtype=np.float64)
        if np.linalg.norm(self.direction) <= 0:
            raise DomainError("ray direction must be nonzero")


@dataclass
class PickResult:
    world: np.ndarray
    pixel: tuple[int, int]
    label_id: int
    name: str


def pick_plane(ray: Ray, p: PlaneSlicer, slice_: SliceImage,
               palette_names: dict[int, str] | None = None):
    """Intersect a ray with the slicer rectangle; None means a miss.

    The label comes from the slice's raster, so picks agree with what the
    viewer actually displays at reduced resolution.
    """
    geom = slice_.geometry
    if (np.max(np.abs(np.asarray(geom.center) - p.center)) > 1e-9
            or np.max(np.abs(np.asarray(geom.u) - p.u)) > 1e-9
            or np.max(np.abs(np.asarray(geom.v) - p.v)) > 1e-9
            or abs(geom.hu - p.hu) > 1e-9 or abs(geom.hv - p.hv) > 1e-9):
        raise DomainError("slice geometry does not match the plane")

    n = p.normal
    d = ray.direction
    dn = float(d @ n)
    if abs(dn) < 1e-9 * float(np.linalg.norm(d)):
        return None
    t = float((p.center - ray.origin) @ n) / dn
    if t < 0:
        return None
    q = ray.origin + t * d
    a = float((q - p.center) @ p.u)
    b = float((q - p.center) @ p.v)
    if abs(a) > p.hu or abs(b) > p.hv:
        return None
    i, j = plane_world_to_pixel(geom, slice_.width, slice_.height, q)
    lid = int(slice_.labels[j, i])
    name = (palette_names or {}).get(lid, "")
    return PickResult(q, (i, j), lid, name)


@dataclass
class HighlightParams:
    selected: frozenset[int] = frozenset()
    color: tuple[int, int, int] = (255, 64, 64)
    alpha: float = 0.6
    dim: float = 0.55

    def __post_init__(self):
        self.selected = frozenset(self.selected)
        if not (0 <= self.alpha <= 1 and 0 <= self.dim <= 1):
            raise DomainError("alpha and dim must be in [0, 1]")


def apply_highlight(slice_: SliceImage, params: HighlightParams) -> SliceImage:
    """Blend selected labels toward the highlight color, dim the rest."""
    rgba = slice_.rgba.copy()
    visible = rgba[..., 3] > 0
    sel = np.isin(slice_.labels, list(params.selected)) & visible
    rest = visible & ~sel

    rgb = rgba[..., :3].astype(np.float64)
    hi = np.asarray(params.color, dtype=np.float64)
    rgb[sel] = (1 - params.alpha) * rgb[sel] + params.alpha * hi
    rgb[rest] *= params.dim
    rgba[..., :3] = np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)
    return SliceImage(rgba, slice_.labels.copy(), slice_.geometry)


def annotations_payload(annos: list[LabelAnnotation]) -> list[dict]:
    """Wire form used by the session protocol."""
    return [{"id": a.label_id, "name": a.name, "count": a.count,
             "centroid": [a.centroid[0], a.centroid[1]],
             "anchor": [a.anchor[0], a.anchor[1]]} for a in annos]
