"""Per-second human tracking evaluation and step-wise frame verdicts.

Tracks are sampled once per second. MOTA follows the CLEAR-MOT event counts,
IDF1 uses a single optimal identity assignment over the whole video. The same
identity assignment decides whether a predicted frame is a tracking true
positive: its box must overlap a GT box (IoU above the threshold) and its
track must be the one assigned to that GT identity.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .assignment import assignment
from .geometry import Box, InvalidInput, iou2d

TrackId = Hashable
# track id -> second -> box
Tracks = Mapping[TrackId, Mapping[int, Box]]


def id_key(v):
    """Sort key that orders ints before strings and never compares across."""
    return (isinstance(v, str), v)


class Verdict(str, enum.Enum):
    TRUE_POSITIVE = "TP"
    FALSE_POSITIVE = "FP"
    MISS = "MISS"


@dataclass(frozen=True)
class IdentifiedBox:
    track_id: TrackId
    box: Box


@dataclass(frozen=True)
class FrameVerdict:
    second: int
    track_id: TrackId
    tracking: Verdict
    matched_gt: TrackId | None = None

    def __post_init__(self):
        if (self.matched_gt is not None) != (self.tracking is Verdict.TRUE_POSITIVE):
            raise ValueError("matched_gt must be set exactly for true positives")


@dataclass
class SecondMatch:
    matches: list[tuple[TrackId, TrackId, float]]
    unmatched_gt: list[TrackId]
    unmatched_pred: list[TrackId]


def _check_unique(items: Sequence[IdentifiedBox], side: str):
    seen = set()
    for it in items:
        if it.track_id in seen:
            raise InvalidInput(f"duplicate {side} track_id {it.track_id!r} within one second")
        seen.add(it.track_id)


def match_second(gt: Sequence[IdentifiedBox], pred: Sequence[IdentifiedBox],
                 iou_threshold: float = 0.5) -> SecondMatch:
    """One-to-one matching maximizing total IoU over pairs above threshold.

    Ties resolve towards the lowest GT id (rows are visited in id order).
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    _check_unique(gt, "gt")
    _check_unique(pred, "pred")
    gt = sorted(gt, key=lambda b: id_key(b.track_id))
    pred = sorted(pred, key=lambda b: id_key(b.track_id))
    iou = np.zeros((len(gt), len(pred)))
    for i, g in enumerate(gt):
        for j, p in enumerate(pred):
            iou[i, j] = iou2d(g.box, p.box)
    feasible = iou > iou_threshold
    # Only rows/cols with a feasible partner enter the solver; the others can
    # never be matched and would only create spurious ties.
    rows = [i for i in range(len(gt)) if feasible[i].any()]
    cols = [j for j in range(len(pred)) if feasible[:, j].any()]
    matches = []
    matched_rows, matched_cols = set(), set()
    if rows and cols:
        sub = np.where(feasible, -iou, 0.0)[np.ix_(rows, cols)]
        for r, c in assignment(sub):
            i, j = rows[r], cols[c]
            if feasible[i, j]:
                matches.append((gt[i].track_id, pred[j].track_id, float(iou[i, j])))
                matched_rows.add(i)
                matched_cols.add(j)
    return SecondMatch(
        matches=matches,
        unmatched_gt=[g.track_id for i, g in enumerate(gt) if i not in matched_rows],
        unmatched_pred=[p.track_id for j, p in enumerate(pred) if j not in matched_cols],
    )


def _by_second(tracks: Tracks) -> dict[int, list[IdentifiedBox]]:
    out: dict[int, list[IdentifiedBox]] = {}
    for tid, seq in tracks.items():
        for s, box in seq.items():
            out.setdefault(int(s), []).append(IdentifiedBox(tid, box))
    return out


def identity_assignment(gt: Tracks, pred: Tracks,
                        iou_threshold: float = 0.5) -> tuple[dict[TrackId, TrackId], int]:
    """Video-level GT id -> predicted id assignment maximizing IDTP.

    Returns the mapping and the total IDTP. Only pairs sharing at least one
    overlapping second are candidates.
    """
    gt_ids = sorted(gt, key=id_key)
    pred_ids = sorted(pred, key=id_key)
    overlap = np.zeros((len(gt_ids), len(pred_ids)), dtype=np.int64)
    for i, g in enumerate(gt_ids):
        gseq = gt[g]
        for j, p in enumerate(pred_ids):
            pseq = pred[p]
            n = 0
            for s in gseq.keys() & pseq.keys():
                if iou2d(gseq[s], pseq[s]) > iou_threshold:
                    n += 1
            overlap[i, j] = n
    rows = [i for i in range(len(gt_ids)) if overlap[i].any()]
    cols = [j for j in range(len(pred_ids)) if overlap[:, j].any()]
    mapping: dict[TrackId, TrackId] = {}
    idtp = 0
    if rows and cols:
        sub = -overlap[np.ix_(rows, cols)].astype(float)
        for r, c in assignment(sub):
            i, j = rows[r], cols[c]
            if overlap[i, j] > 0:
                mapping[gt_ids[i]] = pred_ids[j]
                idtp += int(overlap[i, j])
    return mapping, idtp


@dataclass
class VideoTracking:
    """Everything the tracking stage learns about one video."""
    num_gt: int = 0
    num_pred: int = 0
    misses: int = 0
    false_positives: int = 0
    id_switches: int = 0
    idtp: int = 0
    identity: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)  # (track_id, second) -> FrameVerdict

    @property
    def mota(self) -> float:
        if self.num_gt == 0:
            return math.nan
        return 1.0 - (self.misses + self.false_positives + self.id_switches) / self.num_gt

    @property
    def idf1(self) -> float:
        denom = self.num_gt + self.num_pred
        if self.num_gt == 0 or denom == 0:
            return math.nan
        return 2.0 * self.idtp / denom

    @property
    def idfp(self) -> int:
        return self.num_pred - self.idtp

    @property
    def idfn(self) -> int:
        return self.num_gt - self.idtp


def evaluate_video(gt: Tracks, pred: Tracks, iou_threshold: float = 0.5) -> VideoTracking:
    """Run per-second matching, CLEAR-MOT counting, IDF1 and frame verdicts."""
    out = VideoTracking()
    gt_by_s = _by_second(gt)
    pred_by_s = _by_second(pred)
    mapping, idtp = identity_assignment(gt, pred, iou_threshold)
    out.identity = mapping
    out.idtp = idtp
    last_pred_of_gt: dict[TrackId, TrackId] = {}
    for s in sorted(gt_by_s.keys() | pred_by_s.keys()):
        g_items = gt_by_s.get(s, [])
        p_items = pred_by_s.get(s, [])
        m = match_second(g_items, p_items, iou_threshold)
        out.num_gt += len(g_items)
        out.num_pred += len(p_items)
        out.misses += len(m.unmatched_gt)
        out.false_positives += len(m.unmatched_pred)
        for g, p, _ in m.matches:
            prev = last_pred_of_gt.get(g)
            if prev is not None and prev != p:
                out.id_switches += 1
            last_pred_of_gt[g] = p
            if mapping.get(g) == p:
                out.verdicts[(p, s)] = FrameVerdict(s, p, Verdict.TRUE_POSITIVE, g)
            else:
                out.verdicts[(p, s)] = FrameVerdict(s, p, Verdict.FALSE_POSITIVE)
        for p in m.unmatched_pred:
            out.verdicts[(p, s)] = FrameVerdict(s, p, Verdict.FALSE_POSITIVE)
    return out


def stepwise_verdicts(gt: Tracks, pred: Tracks,
                      iou_threshold: float = 0.5) -> dict[tuple[TrackId, int], FrameVerdict]:
    """One verdict per predicted (track, second)."""
    return evaluate_video(gt, pred, iou_threshold).verdicts


@dataclass
class TrackingScore:
    mota: float
    idf1: float
    per_video: list[tuple[str, float, float]]
    excluded: list[str] = field(default_factory=list)


def summarize(per_video: Mapping[str, VideoTracking]) -> TrackingScore:
    """Mean MOTA/IDF1 over videos; videos without GT boxes are excluded."""
    rows, excluded = [], []
    for vid in sorted(per_video, key=id_key):
        vt = per_video[vid]
        if vt.num_gt == 0:
            excluded.append(vid)
            continue
        rows.append((vid, vt.mota, vt.idf1))
    if not rows:
        return TrackingScore(math.nan, math.nan, [], excluded)
    return TrackingScore(
        mota=float(np.mean([r[1] for r in rows])),
        idf1=float(np.mean([r[2] for r in rows])),
        per_video=rows,
        excluded=excluded,
    )


def mota(gt: Mapping[str, Tracks], pred: Mapping[str, Tracks], iou_threshold: float = 0.5) -> float:
    """Mean per-video MOTA. ``gt``/``pred`` map video id -> tracks."""
    return evaluate_tracking(gt, pred, iou_threshold).mota


def idf1(gt: Mapping[str, Tracks], pred: Mapping[str, Tracks], iou_threshold: float = 0.5) -> float:
    return evaluate_tracking(gt, pred, iou_threshold).idf1


def evaluate_tracking(gt: Mapping[str, Tracks], pred: Mapping[str, Tracks],
                      iou_threshold: float = 0.5) -> TrackingScore:
    videos = set(gt) | set(pred)
    per_video = {v: evaluate_video(gt.get(v, {}), pred.get(v, {}), iou_threshold) for v in videos}
    return summarize(per_video)
