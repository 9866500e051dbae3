"""Sparse multi-class label state: rasterized edits and training extraction.

Coordinates are pixel indices; integer coordinates coincide with pixel
centers for the brush, while polygon containment tests the center point
(px+0.5, py+0.5) under the even-odd rule. Manual tools (brush/polygon)
overwrite prior labels, the eraser clears to 0, and accepted smart-label
masks fill only still-unlabeled pixels.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import (
    DegeneratePolygon,
    DimensionMismatch,
    EmptyPath,
    NoLabels,
    OutOfBounds,
)
from .features import FeatureStack

SOURCES = ("brush", "polygon", "smart_mask", "eraser")

# Per-class cap on training samples; beyond it a seeded deterministic
# subsample is kept (see rng.subsample_keys).
CLASS_SAMPLE_CAP = 50_000


@dataclass
class LabelMap:
    """Dense class-id raster; 0 = unlabeled, 1..K = semantic classes."""

    width: int
    height: int
    classes: np.ndarray = None
    slice_index: int = 0

    def __post_init__(self):
        if self.classes is None:
            self.classes = np.zeros((self.height, self.width), dtype=np.uint8)
        self.classes = np.ascontiguousarray(self.classes, dtype=np.uint8)
        if self.classes.shape != (self.height, self.width):
            raise ValueError("classes shape inconsistent with dimensions")

    def labelled_count(self) -> int:
        return int(np.count_nonzero(self.classes))

    def copy(self) -> "LabelMap":
        return LabelMap(
            width=self.width,
            height=self.height,
            classes=self.classes.copy(),
            slice_index=self.slice_index,
        )


@dataclass
class LabelDelta:
    """A batch of pixel edits; pixels are deduplicated (x, y) pairs."""

    pixels: np.ndarray  # (N, 2) int64, columns x, y
    class_id: int
    source: str

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.source == "eraser":
            self.class_id = 0
        if not 0 <= self.class_id <= 255:
            raise ValueError("class_id must fit in [0, 255]")
        if self.source != "eraser" and self.class_id == 0:
            raise ValueError("class_id 0 is reserved for the eraser")
        px = np.asarray(self.pixels, dtype=np.int64).reshape(-1, 2)
        if px.shape[0]:
            order = np.lexsort((px[:, 0], px[:, 1]))
            px = px[order]
            keep = np.ones(px.shape[0], dtype=bool)
            keep[1:] = np.any(px[1:] != px[:-1], axis=1)
            px = px[keep]
        self.pixels = px

    @property
    def n_pixels(self) -> int:
        return self.pixels.shape[0]


@dataclass
class TrainingSet:
    """Feature vectors and class ids for every sampled labelled pixel."""

    features: np.ndarray  # (n, F) float64
    classes: np.ndarray  # (n,) int64, values 1..K
    feature_names: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.classes = np.ascontiguousarray(self.classes, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] != self.classes.shape[0]:
            raise ValueError("features/classes shape mismatch")
        if self.features.shape[1] != len(self.feature_names):
            raise ValueError("feature count does not match names")
        if self.classes.size and self.classes.min() < 1:
            raise ValueError("training classes must be >= 1")

    @property
    def n_samples(self) -> int:
        return self.classes.shape[0]


def _segment_disk_pixels(p, q, radius, width, height):
    """Integer pixels whose center is within `radius` of segment p-q."""
    x0 = max(0, math.floor(min(p[0], q[0]) - radius))
    x1 = min(width - 1, math.ceil(max(p[0], q[0]) + radius))
    y0 = max(0, math.floor(min(p[1], q[1]) - radius))
    y1 = min(height - 1, math.ceil(max(p[1], q[1]) + radius))
    if x1 < x0 or y1 < y0:
        return np.empty((0, 2), dtype=np.int64)
    xs, ys = np.meshgrid(
        np.arange(x0, x1 + 1, dtype=np.float64),
        np.arange(y0, y1 + 1, dtype=np.float64),
    )
    vx, vy = q[0] - p[0], q[1] - p[1]
    l2 = vx * vx + vy * vy
    if l2 == 0.0:
        dx, dy = xs - p[0], ys - p[1]
    else:
        t = np.clip(((xs - p[0]) * vx + (ys - p[1]) * vy) / l2, 0.0, 1.0)
        dx, dy = xs - (p[0] + t * vx), ys - (p[1] + t * vy)
    inside = dx * dx + dy * dy <= radius * radius
    return np.column_stack((xs[inside].astype(np.int64), ys[inside].astype(np.int64)))


def rasterize_brush(path, radius, class_id, width, height, source="brush") -> LabelDelta:
    """Capsule sweep of the path; output clipped to image bounds.

    Rounded path vertices are always included so a zero/tiny-radius click
    still labels the pixel under the cursor.
    """
    pts = np.asarray(path, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise EmptyPath("brush path has no points")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    pieces = []
    for i in range(pts.shape[0]):
        p = pts[i]
        q = pts[i + 1] if i + 1 < pts.shape[0] else pts[i]
        pieces.append(_segment_disk_pixels(p, q, radius, width, height))
    rounded = np.floor(pts + 0.5).astype(np.int64)
    ok = (
        (rounded[:, 0] >= 0)
        & (rounded[:, 0] < width)
        & (rounded[:, 1] >= 0)
        & (rounded[:, 1] < height)
    )
    pieces.append(rounded[ok])
    return LabelDelta(pixels=np.concatenate(pieces, axis=0), class_id=class_id, source=source)


def rasterize_polygon(vertices, class_id, width, height) -> LabelDelta:
    """Pixels whose center (px+0.5, py+0.5) is inside under the even-odd rule;
    centers exactly on an edge count as inside."""
    vs = np.asarray(vertices, dtype=np.float64).reshape(-1, 2)
    if vs.shape[0] < 3:
        raise DegeneratePolygon("polygon needs at least 3 vertices")
    x0 = max(0, math.floor(vs[:, 0].min() - 1.0))
    x1 = min(width - 1, math.ceil(vs[:, 0].max() + 1.0))
    y0 = max(0, math.floor(vs[:, 1].min() - 1.0))
    y1 = min(height - 1, math.ceil(vs[:, 1].max() + 1.0))
    if x1 < x0 or y1 < y0:
        return LabelDelta(pixels=np.empty((0, 2), np.int64), class_id=class_id, source="polygon")
    pxs = np.arange(x0, x1 + 1, dtype=np.int64)
    pys = np.arange(y0, y1 + 1, dtype=np.int64)
    cx, cy = np.meshgrid(pxs + 0.5, pys + 0.5)
    inside = np.zeros(cx.shape, dtype=bool)
    on_edge = np.zeros(cx.shape, dtype=bool)
    n = vs.shape[0]
    for i in range(n):
        x1v, y1v = vs[i]
        x2v, y2v = vs[(i + 1) % n]
        crosses = (y1v > cy) != (y2v > cy)
        if np.any(crosses):
            t = (cy - y1v) / (y2v - y1v)
            inside ^= crosses & (cx < x1v + t * (x2v - x1v))
        # exact on-segment test
        cross = (x2v - x1v) * (cy - y1v) - (y2v - y1v) * (cx - x1v)
        within = (
            (cx >= min(x1v, x2v) - 1e-9)
            & (cx <= max(x1v, x2v) + 1e-9)
            & (cy >= min(y1v, y2v) - 1e-9)
            & (cy <= max(y1v, y2v) + 1e-9)
        )
        on_edge |= within & (np.abs(cross) <= 1e-9)
    sel = inside | on_edge
    return LabelDelta(
        pixels=np.column_stack((cx[sel].astype(np.int64), cy[sel].astype(np.int64))),
        class_id=class_id,
        source="polygon",
    )


def apply_delta(label_map: LabelMap, delta: LabelDelta) -> LabelMap:
    """Apply one edit batch; returns a new map.

    brush/polygon overwrite, eraser clears to 0, smart_mask fills only
    pixels that are still 0.
    """
    px = delta.pixels
    if px.shape[0] == 0:
        return label_map.copy()
    if (
        px[:, 0].min() < 0
        or px[:, 0].max() >= label_map.width
        or px[:, 1].min() < 0
        or px[:, 1].max() >= label_map.height
    ):
        raise OutOfBounds("delta pixels outside the image")
    out = label_map.copy()
    xs, ys = px[:, 0], px[:, 1]
    if delta.source == "eraser":
        out.classes[ys, xs] = 0
    elif delta.source == "smart_mask":
        fill = out.classes[ys, xs] == 0
        out.classes[ys[fill], xs[fill]] = delta.class_id
    else:
        out.classes[ys, xs] = delta.class_id
    return out


def extract_training_set(stacks, maps, cap: int = CLASS_SAMPLE_CAP) -> TrainingSet:
    """One sample per labelled pixel, pooled across maps/slices.

    Classes over the cap are reduced by a seeded deterministic subsample
    (per-class SplitMix64 keys; survivors keep their original order).
    Output samples are grouped by ascending class id.
    """
    if isinstance(stacks, FeatureStack):
        stacks = [stacks]
    feats, ys = [], []
    for m in maps:
        if not 0 <= m.slice_index < len(stacks):
            raise ValueError(f"label map slice_index {m.slice_index} has no feature stack")
        st = stacks[m.slice_index]
        if (st.width, st.height) != (m.width, m.height):
            raise DimensionMismatch("label map dimensions differ from its feature stack")
        yy, xx = np.nonzero(m.classes)
        if yy.size:
            feats.append(st.data[yy, xx, :])
            ys.append(m.classes[yy, xx].astype(np.int64))
    if not feats:
        raise NoLabels("no labelled pixels in any map")
    x_all = np.concatenate(feats, axis=0)
    y_all = np.concatenate(ys, axis=0)

    keep_parts = []
    for c in np.unique(y_all):
        idx = np.nonzero(y_all == c)[0]
        if idx.size > cap:
            keys = rng.subsample_keys(int(c), idx.size)
            chosen = np.argsort(keys, kind="stable")[:cap]
            chosen.sort()
            idx = idx[chosen]
        keep_parts.append(idx)
    keep = np.concatenate(keep_parts)
    names = list(stacks[0].names)
    return TrainingSet(features=x_all[keep], classes=y_all[keep], feature_names=names)
