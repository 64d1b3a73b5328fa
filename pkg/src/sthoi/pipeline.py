"""End-to-end step-wise evaluation: tracking -> interactions -> objects.

Every video is scored independently (and may run in a worker process); the
per-class AP and the object aggregates are pooled afterwards in video-id
order, so serial and parallel runs produce identical reports.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .interaction import CRITERIA, MODES, average_precision, pair_predictions, ranking_key
from .objects import discovery_miou, object_tracklets
from .tracking import Verdict, VideoTracking, evaluate_video, id_key, summarize
from .tracklets import EvalConfig, STHOITracklet, split_tracklet

CELLS = tuple((m, c) for m in MODES for c in CRITERIA)


class EvalError(Exception):
    exit_code = 1


class IdMismatch(EvalError):
    exit_code = 3


class EmptyGroundTruth(EvalError):
    exit_code = 4


def _cell(mode: str, criterion: str) -> str:
    return f"{mode}_{criterion}"


@dataclass
class EvalReport:
    tracking: dict
    interaction: dict
    objects: dict
    per_video: list = field(default_factory=list)
    per_class: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        per_class = {k: {int(c): v for c, v in row.items()} for k, row in d.get("per_class", {}).items()}
        return cls(tracking=dict(d["tracking"]), interaction=dict(d["interaction"]),
                   objects=dict(d["objects"]), per_video=[dict(r) for r in d.get("per_video", [])],
                   per_class=per_class, flags=list(d.get("flags", [])))

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls.from_dict(_from_jsonable(json.loads(text)))

    def table(self) -> str:
        def pct(v):
            return "   n/a" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{100 * v:8.4f}"
        lines = [
            "Human tracking        MOTA {}   IDF1 {}".format(
                pct(self.tracking["mota"]), pct(self.tracking["idf1"])),
            "                        2D strict  3D strict  2D loose   3D loose",
        ]
        for title, group, prefix in (("Interaction mAP (%)", self.interaction, "map"),
                                     ("Object mIoU (%)    ", self.objects, "miou")):
            cells = [group[f"{prefix}_{m}_{c}"] for c in CRITERIA for m in MODES]
            lines.append(title + "   " + " ".join(f"{pct(v):>10}" for v in cells))
        return "\n".join(lines)


def _jsonable(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _from_jsonable(v):
    if v is None:
        return math.nan
    if isinstance(v, dict):
        return {k: _from_jsonable(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_from_jsonable(x) for x in v]
    return v


def _tracks(records: Sequence[STHOITracklet]):
    tracks: dict = {}
    for r in records:
        seq = tracks.setdefault(r.track_id, {})
        for f in r.frames:
            seq.setdefault(f.second, f.human)
    return tracks


@dataclass
class VideoResult:
    video: str
    tracking: VideoTracking
    # (mode, criterion) -> class -> list of (ranking key, score, is_tp)
    ranked: dict
    # class -> number of GT tracklets
    num_gt: dict
    # (mode, criterion) -> list of per-tracklet object mIoU (None = nothing left after loose filtering)
    object_values: dict


def evaluate_one_video(video: str, gt: Sequence[STHOITracklet], pred: Sequence[STHOITracklet],
                       config: EvalConfig, interacting_only: bool = False,
                       per_frame_max: bool = False) -> VideoResult:
    interacting = [t for t in gt if t.interaction > 0]
    track_gt = _tracks(interacting if interacting_only else gt)
    vt = evaluate_video(track_gt, _tracks(pred), config.tracking_iou)
    verdicts = vt.verdicts
    vt.verdicts = {}  # keep worker results small; verdicts are consumed here

    preds: list[STHOITracklet] = []
    for t in pred:
        if t.interaction > 0:
            preds.extend(split_tracklet(t, config.alpha))
    by_class_pred = defaultdict(list)
    for t in preds:
        by_class_pred[t.interaction].append(t)
    by_class_gt = defaultdict(list)
    for t in sorted(interacting, key=lambda t: (id_key(t.track_id), t.start)):
        by_class_gt[t.interaction].append(t)

    def tracking_ok(p):
        out = {}
        for f in p.frames:
            v = verdicts.get((p.track_id, f.second))
            out[f.second] = v.tracking if v is not None else Verdict.FALSE_POSITIVE
        return out

    ranked = {cell: defaultdict(list) for cell in CELLS}
    object_values = {cell: [] for cell in CELLS}
    for mode in MODES:
        for cls in sorted(by_class_pred.keys() | by_class_gt.keys()):
            gts = by_class_gt.get(cls, [])
            outcomes = pair_predictions(by_class_pred.get(cls, []), gts, mode,
                                        verdicts_of=tracking_ok, threshold=config.tp_miou)
            for o in outcomes:
                tv = tracking_ok(o.pred)
                for crit in CRITERIA:
                    tp = o.tp[crit]
                    ranked[(mode, crit)][cls].append((ranking_key(o.pred), o.score, tp))
                    if not tp:
                        # interaction FPs score 0 under strict and are left out under loose
                        if crit == "strict":
                            object_values[(mode, crit)].append(0.0)
                        continue
                    g = gts[o.gt_index]
                    gsecs = set(g.seconds)

                    def ok(s, tv=tv, gsecs=gsecs):
                        return tv.get(s) is Verdict.TRUE_POSITIVE and s in gsecs
                    objs = object_tracklets(g)
                    if objs:
                        v = discovery_miou(o.pred, objs, crit, ok, mode, per_frame_max)
                    else:
                        kept = [f for f in o.pred.frames if ok(f.second) or crit == "strict"]
                        v = 0.0 if kept else None
                    object_values[(mode, crit)].append(v)
    num_gt = {cls: len(v) for cls, v in by_class_gt.items()}
    return VideoResult(video, vt, {k: dict(v) for k, v in ranked.items()}, num_gt, object_values)


def _evaluate_chunk(args):
    items, config, interacting_only, per_frame_max = args
    return [evaluate_one_video(v, g, p, config, interacting_only, per_frame_max) for v, g, p in items]


def group_by_video(tracklets: Sequence[STHOITracklet]) -> dict[str, list[STHOITracklet]]:
    out: dict[str, list[STHOITracklet]] = defaultdict(list)
    for t in tracklets:
        out[t.video].append(t)
    return dict(out)


def eval_all(gt: Sequence[STHOITracklet], pred: Sequence[STHOITracklet],
             config: EvalConfig = EvalConfig(), jobs: int = 1, interacting_only: bool = False,
             per_frame_max: bool = False) -> EvalReport:
    """Score predictions against GT with step-wise sampling."""
    gt_v = group_by_video(gt)
    pred_v = group_by_video(pred)
    if not gt_v:
        raise EmptyGroundTruth("ground truth contains no tracklets")
    unknown = sorted(set(pred_v) - set(gt_v))
    if unknown:
        raise IdMismatch(f"predictions reference videos absent from GT: {unknown[:5]}")
    videos = sorted(gt_v, key=id_key)
    items = [(v, gt_v[v], pred_v.get(v, [])) for v in videos]
    if jobs > 1 and len(items) > 1:
        n_chunks = min(len(items), jobs * 4)
        chunks = [items[i::n_chunks] for i in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = ex.map(_evaluate_chunk,
                           [(c, config, interacting_only, per_frame_max) for c in chunks])
            results = [r for part in parts for r in part]
    else:
        results = _evaluate_chunk((items, config, interacting_only, per_frame_max))
    results.sort(key=lambda r: id_key(r.video))
    return merge_results(results)


def merge_results(results: Sequence[VideoResult]) -> EvalReport:
    flags = []
    ts = summarize({r.video: r.tracking for r in results})
    for v in ts.excluded:
        flags.append(f"video {v} has no GT boxes; excluded from tracking means")
    num_gt: dict[int, int] = defaultdict(int)
    for r in results:
        for cls, n in r.num_gt.items():
            num_gt[cls] += n
    interaction, per_class = {}, {}
    for mode, crit in CELLS:
        pooled = defaultdict(list)
        for r in results:
            for cls, rows in r.ranked[(mode, crit)].items():
                pooled[cls].extend(rows)
        aps = {}
        for cls in sorted(set(pooled) | set(num_gt)):
            rows = sorted(pooled.get(cls, []), key=lambda row: row[0])
            res = average_precision([(s, tp) for _, s, tp in rows], num_gt.get(cls, 0))
            if res.flagged and (mode, crit) == CELLS[0]:
                flags.append(f"class {cls} has predictions but no GT")
            if num_gt.get(cls, 0) > 0:
                aps[cls] = res.ap
        per_class[f"ap_{_cell(mode, crit)}"] = aps
        interaction[f"map_{_cell(mode, crit)}"] = (sum(aps.values()) / len(aps)) if aps else math.nan
    objects = {}
    for mode, crit in CELLS:
        raw = [v for r in results for v in r.object_values[(mode, crit)]]
        vals = [v for v in raw if v is not None]
        dropped = len(raw) - len(vals)
        if dropped and crit == "loose":
            flags.append(f"{dropped} {mode} object tracklet(s) had no frame left after loose filtering")
        if vals:
            objects[f"miou_{_cell(mode, crit)}"] = sum(vals) / len(vals)
        else:
            objects[f"miou_{_cell(mode, crit)}"] = 0.0
            flags.append(f"no object tracklet left for {mode} {crit}; reported as 0")
    per_video = []
    for r in results:
        row = {"video": r.video, "mota": r.tracking.mota, "idf1": r.tracking.idf1,
               "misses": r.tracking.misses, "false_positives": r.tracking.false_positives,
               "id_switches": r.tracking.id_switches}
        for mode, crit in CELLS:
            aps = []
            for cls, n in sorted(r.num_gt.items()):
                rows = sorted(r.ranked[(mode, crit)].get(cls, []), key=lambda row: row[0])
                aps.append(average_precision([(s, tp) for _, s, tp in rows], n).ap)
            row[f"map_{_cell(mode, crit)}"] = sum(aps) / len(aps) if aps else math.nan
        per_video.append(row)
    return EvalReport(
        tracking={"mota": ts.mota, "idf1": ts.idf1},
        interaction=interaction,
        objects=objects,
        per_video=per_video,
        per_class=per_class,
        flags=flags,
    )
