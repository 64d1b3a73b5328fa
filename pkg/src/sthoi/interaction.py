"""Interaction detection scoring: tracklet mIoU, TP decision, AP and mAP."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .geometry import iou2d, tube_iou3d
from .tracking import FrameVerdict, Verdict, id_key
from .tracklets import STHOITracklet, tracklet_score

MODES = ("2d", "3d")
CRITERIA = ("strict", "loose")
TP_MIOU = 0.2

# second -> True when the predicted frame is a tracking true positive
FrameOk = Callable[[int], bool]


def _frame_ok(verdicts) -> FrameOk:
    if verdicts is None:
        return lambda s: True
    if callable(verdicts):
        return verdicts

    def ok(s):
        v = verdicts.get(s)
        if isinstance(v, FrameVerdict):
            v = v.tracking
        return v is True or v is Verdict.TRUE_POSITIVE
    return ok


def _check(mode: str, criterion: str):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")


def frame_iou(pred_frame, gt_frame, mode: str) -> float:
    if mode == "2d":
        return iou2d(pred_frame.human, gt_frame.human)
    return tube_iou3d(pred_frame.tube(), gt_frame.tube())


def tracklet_miou(pred: STHOITracklet, gt: STHOITracklet, mode: str = "2d",
                  criterion: str = "strict", verdicts=None) -> float | None:
    """Mean per-second IoU between a predicted and a GT tracklet.

    The average runs over the union of both tracklets' seconds; a second
    covered by only one side scores 0. Under ``loose`` the predicted frames
    that are not tracking true positives are left out, under ``strict`` they
    score 0. ``None`` means nothing was left to average.

    ``verdicts`` maps second -> :class:`Verdict` (or is a predicate on the
    second); ``None`` treats every frame as a tracking true positive.
    """
    _check(mode, criterion)
    ok = _frame_ok(verdicts)
    pf = {f.second: f for f in pred.frames}
    gf = {f.second: f for f in gt.frames}
    total = 0.0
    n = 0
    for s in sorted(pf.keys() | gf.keys()):
        p = pf.get(s)
        if p is not None and not ok(s):
            if criterion == "loose":
                continue
            n += 1
            continue
        g = gf.get(s)
        if p is not None and g is not None:
            total += frame_iou(p, g, mode)
        n += 1
    if n == 0:
        return None
    return total / n


def is_true_positive(miou: float | None, threshold: float = TP_MIOU) -> bool:
    return miou is not None and miou > threshold


@dataclass
class PredOutcome:
    """How one predicted tracklet fared against the GT of its class."""
    pred: STHOITracklet
    score: float
    gt_index: int | None
    miou: dict  # criterion -> mIoU against the paired GT (None if unpaired/undefined)
    tp: dict  # criterion -> bool


def ranking_key(t: STHOITracklet):
    return (-tracklet_score(t), id_key(t.video), id_key(t.track_id), t.start)


def pair_predictions(preds: Sequence[STHOITracklet], gts: Sequence[STHOITracklet],
                     mode: str = "2d", verdicts_of: Callable[[STHOITracklet], object] | None = None,
                     threshold: float = TP_MIOU) -> list[PredOutcome]:
    """Greedy AVA-style pairing of one (video, class) cell.

    Predictions are visited by descending tracklet score. Each takes the
    still-unmatched GT tracklet with the highest loose mIoU, provided that
    mIoU clears ``threshold``. The strict flag then re-checks the same pair
    with tracking false positives scored as 0, so a strict TP is always a
    loose TP.
    """
    matched = [False] * len(gts)
    out = []
    for p in sorted(preds, key=ranking_key):
        v = verdicts_of(p) if verdicts_of else None
        best_i, best = None, threshold
        for i, g in enumerate(gts):
            if matched[i] or g.interaction != p.interaction:
                continue
            m = tracklet_miou(p, g, mode, "loose", v)
            if m is not None and m > best:
                best_i, best = i, m
        if best_i is None:
            loose = None
            strict = 0.0
        else:
            matched[best_i] = True
            loose = best
            strict = tracklet_miou(p, gts[best_i], mode, "strict", v)
        out.append(PredOutcome(
            pred=p, score=tracklet_score(p), gt_index=best_i,
            miou={"loose": loose, "strict": strict},
            tp={"loose": best_i is not None,
                "strict": best_i is not None and is_true_positive(strict, threshold)},
        ))
    return out


@dataclass
class APResult:
    ap: float
    num_gt: int
    num_pred: int
    flagged: bool = False


def average_precision(predictions: Iterable[tuple[float, bool]], num_gt: int) -> APResult:
    """All-point interpolated AP of ``(score, is_tp)`` pairs.

    Predictions are ranked by descending score; equal scores keep their input
    order. With no GT, AP is 0 when predictions exist (flagged) and NaN
    otherwise.
    """
    if num_gt < 0:
        raise ValueError("num_gt must be non-negative")
    preds = list(predictions)
    if num_gt == 0:
        return APResult(0.0 if preds else math.nan, 0, len(preds), flagged=bool(preds))
    if not preds:
        return APResult(0.0, num_gt, 0)
    order = sorted(range(len(preds)), key=lambda i: -preds[i][0])
    tp = np.array([1.0 if preds[i][1] else 0.0 for i in order])
    ctp = np.cumsum(tp)
    cfp = np.cumsum(1.0 - tp)
    recall = ctp / num_gt
    precision = ctp / (ctp + cfp)
    mrec = np.concatenate(([0.0], recall, [recall[-1]]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    idx = np.where(mrec[1:] != mrec[:-1])[0]
    ap = float(np.sum((mrec[idx + 1] - mrec[idx]) * mpre[idx + 1]))
    return APResult(min(1.0, max(0.0, ap)), num_gt, len(preds))


def mean_ap(per_class: Mapping[int, APResult | float]) -> float:
    """Mean AP over classes that have at least one GT tracklet."""
    vals = []
    for cls in sorted(per_class):
        r = per_class[cls]
        if isinstance(r, APResult):
            if r.num_gt > 0:
                vals.append(r.ap)
        elif r is not None and not math.isnan(r):
            vals.append(float(r))
    if not vals:
        raise ValueError("no class has ground truth; mAP is undefined")
    return float(np.mean(vals))
