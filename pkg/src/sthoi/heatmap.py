"""Heatmap construction, fusion and decoding for interacted-object discovery.

Grids are numpy arrays of shape ``(height, width)``. Pixel ``(col, row)``
covers ``[col, col + 1) x [row, row + 1)`` so its center sits at
``(col + 0.5, row + 0.5)``; boxes decoded from a mask use the same frame.
"""
from __future__ import annotations

import enum
import io
import math
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import ndimage

from .geometry import Box

MAP_SIZE = 56
KEYPOINT_SIGMA = 3.0
BCE_EPS = 1e-7

# Limb pairs of the 18-keypoint (COCO-18) body model.
COCO18_LIMBS = (
    (1, 2), (1, 5), (2, 3), (3, 4), (5, 6), (6, 7), (1, 8), (8, 9), (9, 10),
    (1, 11), (11, 12), (12, 13), (1, 0), (0, 14), (14, 16), (0, 15), (15, 17),
)


class SizeClass(str, enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


@dataclass(frozen=True)
class HeatmapConfig:
    small: float = 0.7
    medium: float = 0.6
    large: float = 0.5
    single_branch: float = 0.6
    epsilon: float = 0.1
    tau: int = 2
    n_proposals: int = 75

    def __post_init__(self):
        for name in ("small", "medium", "large", "single_branch"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"threshold {name} must be in (0, 1), got {v}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")

    def threshold(self, size: SizeClass | str | None = None) -> float:
        if size is None:
            return self.single_branch
        return getattr(self, SizeClass(size).value)


class ClampWarning(UserWarning):
    """A point outside the grid was clamped onto it."""


def _centers(n: int) -> np.ndarray:
    return np.arange(n, dtype=float) + 0.5


def gaussian_map(cx: float, cy: float, sigma_x: float, sigma_y: float,
                 width: int, height: int) -> np.ndarray:
    """Unnormalized 2-D Gaussian (amplitude 1) sampled at pixel centers."""
    if sigma_x <= 0 or sigma_y <= 0:
        raise ValueError("sigmas must be positive")
    gx = np.exp(-0.5 * ((_centers(width) - cx) / sigma_x) ** 2)
    gy = np.exp(-0.5 * ((_centers(height) - cy) / sigma_y) ** 2)
    return np.outer(gy, gx)


def gt_heatmap(box: Box, width: int, height: int) -> np.ndarray:
    """Gaussian target centered on the box with sigmas of half its size."""
    if box.w <= 0 or box.h <= 0:
        raise ValueError("GT heatmap needs a box with positive area")
    cx, cy = box.center
    if not (0 <= cx <= width and 0 <= cy <= height):
        raise ValueError(f"box center {(cx, cy)} lies outside the {width}x{height} grid")
    return gaussian_map(cx, cy, box.w / 2.0, box.h / 2.0, width, height)


def keypoint_map(point: Sequence[float], width: int = MAP_SIZE, height: int = MAP_SIZE,
                 sigma: float = KEYPOINT_SIGMA) -> np.ndarray:
    x, y = float(point[0]), float(point[1])
    cx = min(max(x, 0.0), float(width))
    cy = min(max(y, 0.0), float(height))
    if (cx, cy) != (x, y):
        warnings.warn(f"keypoint {(x, y)} clamped to {(cx, cy)}", ClampWarning, stacklevel=2)
    return gaussian_map(cx, cy, sigma, sigma, width, height)


def render_box_map(box: Box, width: int = MAP_SIZE, height: int = MAP_SIZE) -> np.ndarray:
    """Binary map with ones on pixels whose center lies inside the box."""
    xs, ys = _centers(width), _centers(height)
    inx = (xs >= box.x) & (xs < box.x2)
    iny = (ys >= box.y) & (ys < box.y2)
    return np.outer(iny, inx).astype(float)


def render_skeleton_map(keypoints: Sequence[Sequence[float] | None], limbs=COCO18_LIMBS,
                        width: int = MAP_SIZE, height: int = MAP_SIZE) -> np.ndarray:
    """Binary map of the limb segments between visible keypoints."""
    out = np.zeros((height, width))
    n = len(keypoints)
    for a, b in limbs:
        if a >= n or b >= n or keypoints[a] is None or keypoints[b] is None:
            continue
        (x0, y0), (x1, y1) = keypoints[a][:2], keypoints[b][:2]
        steps = max(1, int(math.ceil(4 * max(abs(x1 - x0), abs(y1 - y0)))))
        t = np.linspace(0.0, 1.0, steps + 1)
        cols = np.floor(x0 + t * (x1 - x0)).astype(int)
        rows = np.floor(y0 + t * (y1 - y0)).astype(int)
        keep = (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)
        out[rows[keep], cols[keep]] = 1.0
    return out


def to_map_box(box: Box, frame_w: float, frame_h: float, size: int = MAP_SIZE) -> Box:
    """Rescale a frame-space box into the ``size x size`` map frame."""
    sx, sy = size / frame_w, size / frame_h
    return Box(box.x * sx, box.y * sy, box.w * sx, box.h * sy)


def part_stc_map(keypoints, attention: Sequence[float], human: Box, limbs=COCO18_LIMBS,
                 size: int = MAP_SIZE) -> np.ndarray:
    """``[20, size, size]``: 18 reweighted keypoint maps, skeleton, human box."""
    if len(keypoints) != 18 or len(attention) != 18:
        raise ValueError("part map expects 18 keypoints and 18 attention values")
    chans = []
    for kp, a in zip(keypoints, attention):
        chans.append(np.zeros((size, size)) if kp is None else a * keypoint_map(kp, size, size))
    chans.append(render_skeleton_map(keypoints, limbs, size, size))
    chans.append(render_box_map(human, size, size))
    return np.stack(chans)


def human_stc_map(keypoints, human: Box, limbs=COCO18_LIMBS, size: int = MAP_SIZE) -> np.ndarray:
    """``[2, size, size]``: skeleton and human box."""
    return np.stack([render_skeleton_map(keypoints, limbs, size, size),
                     render_box_map(human, size, size)])


def context_stc_map(keypoints, human: Box, proposals: Sequence[Box], n_proposals: int = 75,
                    limbs=COCO18_LIMBS, size: int = MAP_SIZE) -> np.ndarray:
    """``[2 + n_proposals, size, size]``; missing proposals are empty maps."""
    chans = list(human_stc_map(keypoints, human, limbs, size))
    for i in range(n_proposals):
        if i < len(proposals):
            chans.append(render_box_map(proposals[i], size, size))
        else:
            chans.append(np.zeros((size, size)))
    return np.stack(chans)


def stc_flow(maps: Mapping[int, np.ndarray] | Sequence[np.ndarray], k: int, tau: int = 2,
             shape: tuple[int, ...] | None = None) -> np.ndarray:
    """Stack the maps of seconds ``k - tau .. k + tau`` along a new time axis.

    Seconds outside the clip become all-zero placeholders.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    lookup = dict(maps) if isinstance(maps, Mapping) else dict(enumerate(maps))
    if shape is None:
        if not lookup:
            raise ValueError("shape is required when no maps are given")
        shape = next(iter(lookup.values())).shape
    slices = []
    for s in range(k - tau, k + tau + 1):
        m = lookup.get(s)
        slices.append(np.zeros(shape) if m is None else np.asarray(m, dtype=float))
    return np.stack(slices)


def bce_heatmap_loss(pred: np.ndarray, gt: np.ndarray, eps: float = BCE_EPS) -> float:
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {gt.shape}")
    p = np.clip(pred, eps, 1.0 - eps)
    return float(np.mean(-(gt * np.log(p) + (1.0 - gt) * np.log(1.0 - p))))


def size_classify(human_area: float, object_area: float) -> SizeClass:
    if human_area <= 0:
        raise ValueError("human area must be positive")
    r = object_area / human_area
    if r <= 0.3:
        return SizeClass.SMALL
    if r <= 1.0:
        return SizeClass.MEDIUM
    return SizeClass.LARGE


def normalize(h: np.ndarray) -> np.ndarray:
    """Scale so the peak is 1; an all-zero map stays zero."""
    h = np.asarray(h, dtype=float)
    peak = float(h.max()) if h.size else 0.0
    if peak <= 0:
        return np.zeros_like(h)
    return h / peak


def _mask_box(mask: np.ndarray) -> Box | None:
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        return None
    return Box(float(cols[0]), float(rows[0]),
               float(cols[-1] - cols[0] + 1), float(rows[-1] - rows[0] + 1))


def threshold_to_box(h: np.ndarray, t: float, normalized: bool = False,
                     largest_component: bool = False) -> Box | None:
    """Tightest box around the pixels at or above ``t`` after max-normalization.

    ``largest_component`` keeps only the biggest 8-connected blob.
    """
    g = np.asarray(h, dtype=float) if normalized else normalize(h)
    mask = g >= t
    if largest_component and mask.any():
        labels, n = ndimage.label(mask, structure=np.ones((3, 3)))
        if n > 1:
            sizes = np.bincount(labels.ravel())[1:]
            mask = labels == (int(np.argmax(sizes)) + 1)
    return _mask_box(mask)


def decode_heatmap(h: np.ndarray, size: SizeClass | str | None = None,
                   threshold: float | None = None, config: HeatmapConfig = HeatmapConfig(),
                   largest_component: bool = False) -> Box | None:
    """Heatmap to box with the size-class (or single-branch) threshold."""
    t = config.threshold(size) if threshold is None else threshold
    return threshold_to_box(h, t, largest_component=largest_component)


def _same_shape(*maps):
    shapes = {np.shape(m) for m in maps}
    if len(shapes) != 1:
        raise ValueError(f"heatmap shapes differ: {sorted(shapes)}")


def fuse_dynamic(hp, hh, hc, weights: Sequence[float]) -> np.ndarray:
    """Convex combination of the part, human and context heatmaps."""
    _same_shape(hp, hh, hc)
    bp, bh, bc = (float(w) for w in weights)
    if min(bp, bh, bc) < 0 or abs(bp + bh + bc - 1.0) > 1e-6:
        raise ValueError(f"fusion weights must be non-negative and sum to 1, got {weights}")
    hp, hh, hc = (np.asarray(m, dtype=float) for m in (hp, hh, hc))
    return bp * hp + bh * hh + bc * hc


EQUAL_WEIGHTS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


def fuse_equal(hp, hh, hc) -> np.ndarray:
    return fuse_dynamic(hp, hh, hc, EQUAL_WEIGHTS)


def fuse(hp, hh, hc, weights: Sequence[float] = EQUAL_WEIGHTS,
         normalize_first: bool = False) -> np.ndarray:
    """Fuse raw maps (default) or per-branch max-normalized maps."""
    if normalize_first:
        hp, hh, hc = normalize(hp), normalize(hh), normalize(hc)
    return fuse_dynamic(hp, hh, hc, weights)


BRANCHES = ("part", "human", "context")


def select_branch(table: Mapping[int, Mapping[str, float]],
                  interactions: Sequence[int] = tuple(range(1, 52))) -> dict[int, str]:
    """Best validation branch per interaction; ties prefer part, human, context."""
    out = {}
    for i in interactions:
        if i not in table:
            raise KeyError(f"validation table has no row for interaction {i}")
        row = table[i]
        best, best_v = None, -math.inf
        for b in BRANCHES:
            v = row.get(b)
            if v is not None and v > best_v:
                best, best_v = b, v
        if best is None:
            raise KeyError(f"row for interaction {i} lists no branch")
        out[i] = best
    return out


def blend_long_term(short: np.ndarray, long: np.ndarray, epsilon: float = 0.1) -> np.ndarray:
    """``epsilon`` weights the long-term map, ``1 - epsilon`` the short-term one."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    _same_shape(short, long)
    return epsilon * np.asarray(long, dtype=float) + (1.0 - epsilon) * np.asarray(short, dtype=float)


# STHM raster: b"STHM", u8 version, u32 width, u32 height, float32 row-major.
_MAGIC = b"STHM"
_HEADER = struct.Struct("<4sBII")


def dumps_sthm(h: np.ndarray) -> bytes:
    h = np.asarray(h, dtype="<f4")
    if h.ndim != 2:
        raise ValueError("STHM holds a single 2-D heatmap")
    height, width = h.shape
    return _HEADER.pack(_MAGIC, 1, width, height) + h.tobytes(order="C")


def loads_sthm(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise ValueError("truncated STHM header")
    magic, version, width, height = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError(f"bad STHM magic {magic!r}")
    if version != 1:
        raise ValueError(f"unsupported STHM version {version}")
    body = data[_HEADER.size:]
    if len(body) != 4 * width * height:
        raise ValueError(f"STHM body has {len(body)} bytes, expected {4 * width * height}")
    return np.frombuffer(body, dtype="<f4").reshape(height, width).astype(float)


def write_sthm(path: str | Path | io.BufferedIOBase, h: np.ndarray):
    data = dumps_sthm(h)
    if hasattr(path, "write"):
        path.write(data)
    else:
        Path(path).write_bytes(data)


def read_sthm(path: str | Path) -> np.ndarray:
    return loads_sthm(Path(path).read_bytes())
