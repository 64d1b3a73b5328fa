"""Interacted-object discovery scoring (average overlap with multi-GT max)."""
from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np

from .geometry import Box, iou2d, tube_iou3d
from .tracklets import STHOITracklet

# One GT object tracklet: second -> tube of boxes inside that second.
ObjectTracklet = Mapping[int, Sequence[Box]]


def object_tracklets(gt: STHOITracklet) -> list[dict[int, list[Box]]]:
    """Split a GT ST-HOI tracklet's per-frame object lists into tracklets.

    The k-th object of every frame belongs to the k-th object tracklet.
    """
    n = max((max(len(f.objects), len(f.object_tubes or [])) for f in gt.frames), default=0)
    out = []
    for k in range(n):
        seq = {}
        for f in gt.frames:
            tube = f.object_tube(k)
            if tube:
                seq[f.second] = tube
        out.append(seq)
    return out


def _pred_object(frame) -> list[Box] | None:
    return frame.object_tube(0)


def _overlap(pred_tube, gt_tube, mode: str) -> float:
    if pred_tube is None or gt_tube is None:
        return 0.0
    if mode == "2d":
        return iou2d(pred_tube[0], gt_tube[0])
    return tube_iou3d(pred_tube, gt_tube)


def discovery_miou(pred: STHOITracklet, gt: Sequence[ObjectTracklet], criterion: str = "strict",
                   frame_ok: Callable[[int], bool] | None = None, mode: str = "2d",
                   per_frame_max: bool = False) -> float | None:
    """Average overlap of the predicted object against the best GT object tracklet.

    ``frame_ok(second)`` tells whether the frame survived both upstream
    stages. Failed frames score 0 under ``strict`` and are dropped under
    ``loose``. Returns ``None`` when loose filtering leaves no frame.

    By default the mean is taken per GT tracklet and the largest one kept,
    so the prediction cannot hop between GT objects. ``per_frame_max`` takes
    the best GT object frame by frame instead.
    """
    if criterion not in ("strict", "loose"):
        raise ValueError(f"unknown criterion {criterion!r}")
    if not gt:
        raise ValueError("at least one GT object tracklet is required")
    ok = frame_ok or (lambda s: True)
    rows = []  # per evaluated frame: IoU against each GT tracklet
    for f in pred.frames:
        if not ok(f.second):
            if criterion == "loose":
                continue
            rows.append([0.0] * len(gt))
            continue
        p = _pred_object(f)
        rows.append([_overlap(p, g.get(f.second), mode) for g in gt])
    if not rows:
        return None
    m = np.asarray(rows, dtype=float)
    if per_frame_max:
        return float(m.max(axis=1).mean())
    return float(m.mean(axis=0).max())


def aggregate_discovery(values: Sequence[float | None]) -> float:
    """Unweighted mean over included tracklets (``None`` entries are skipped)."""
    vals = [v for v in values if v is not None]
    if not vals:
        raise ValueError("no tracklet left to aggregate")
    return float(np.mean(vals))
