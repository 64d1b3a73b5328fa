"""Box decoders and proposal selectors behind the object-discovery baselines."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assignment import assignment
from .geometry import Box, center_distance, iou2d

__all__ = [
    "BoxOffset", "encode_offset", "decode_offset", "density_likelihood",
    "shortest_distance_select", "proposal_select_by_score", "assignment",
    "shape_cost", "tbd_match", "link_proposals", "ProposalTracklet",
    "select_tracklet", "stabilize_by_iou",
]


@dataclass(frozen=True)
class BoxOffset:
    dx: float
    dy: float
    dlogw: float
    dlogh: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dlogw, self.dlogh])


def encode_offset(reference: Box, target: Box) -> BoxOffset:
    if reference.w <= 0 or reference.h <= 0:
        raise ValueError("reference box needs positive width and height")
    if target.w <= 0 or target.h <= 0:
        raise ValueError("target box needs positive width and height")
    return BoxOffset(
        (target.x - reference.x) / reference.w,
        (target.y - reference.y) / reference.h,
        math.log(target.w / reference.w),
        math.log(target.h / reference.h),
    )


def decode_offset(reference: Box, offset: BoxOffset) -> Box:
    """Inverse of :func:`encode_offset`."""
    try:
        w = reference.w * math.exp(offset.dlogw)
        h = reference.h * math.exp(offset.dlogh)
    except OverflowError as e:
        raise OverflowError(f"offset {offset} overflows the box size") from e
    if not (math.isfinite(w) and math.isfinite(h)):
        raise OverflowError(f"offset {offset} overflows the box size")
    return Box(reference.x + offset.dx * reference.w,
               reference.y + offset.dy * reference.h, w, h)


def density_likelihood(delta_p: BoxOffset, delta_o: BoxOffset, sigma: float = 1.0) -> float:
    """Gaussian likelihood that a proposal offset agrees with the predicted one."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d2 = float(np.sum((delta_p.as_array() - delta_o.as_array()) ** 2))
    return math.exp(-d2 / (2.0 * sigma * sigma))


def shortest_distance_index(proposals: Sequence[Box], anchor: Box) -> int:
    """Index of the proposal whose center is closest to ``anchor``."""
    if not proposals:
        raise ValueError("no proposals to select from")
    d = [center_distance(p, anchor) for p in proposals]
    return min(range(len(d)), key=lambda i: (d[i], i))


def proposal_index_by_score(proposals: Sequence[Box], scores: Sequence[float]) -> int:
    """Index of the highest-scoring proposal (lowest index on ties)."""
    if not proposals:
        raise ValueError("no proposals to select from")
    if len(proposals) != len(scores):
        raise ValueError(f"{len(proposals)} proposals but {len(scores)} scores")
    return max(range(len(scores)), key=lambda i: (scores[i], -i))


def shortest_distance_select(proposals: Sequence[Box], anchor: Box) -> Box:
    return proposals[shortest_distance_index(proposals, anchor)]


def proposal_select_by_score(proposals: Sequence[Box], scores: Sequence[float]) -> Box:
    return proposals[proposal_index_by_score(proposals, scores)]


def shape_cost(a: Sequence[Box], b: Sequence[Box]) -> np.ndarray:
    """Euclidean distances between ``(x, y, w, h)`` shape vectors."""
    va = np.array([p.to_list() for p in a], dtype=float).reshape(-1, 4)
    vb = np.array([p.to_list() for p in b], dtype=float).reshape(-1, 4)
    return np.sqrt(((va[:, None, :] - vb[None, :, :]) ** 2).sum(axis=-1))


def tbd_match(frame_a: Sequence[Box], frame_b: Sequence[Box]) -> list[tuple[int, int]]:
    """Associate proposals of two neighbouring frames by shape distance."""
    if not frame_a or not frame_b:
        raise ValueError("both frames need at least one proposal")
    return assignment(shape_cost(frame_a, frame_b))


@dataclass
class ProposalTracklet:
    start: int  # index of the first frame
    indices: list[int]  # proposal index per frame from ``start``
    scores: list[float]

    @property
    def score(self) -> float:
        return sum(self.scores) / len(self.scores)


def link_proposals(frames: Sequence[Sequence[Box]],
                   scores: Sequence[Sequence[float]]) -> list[ProposalTracklet]:
    """Chain frame-to-frame matches into proposal tracklets.

    A proposal left unmatched by the next frame ends its tracklet; an
    unmatched proposal in the next frame starts a new one.
    """
    if len(frames) != len(scores):
        raise ValueError("frames and scores differ in length")
    done: list[ProposalTracklet] = []
    open_: dict[int, ProposalTracklet] = {}
    for t, props in enumerate(frames):
        if len(props) != len(scores[t]):
            raise ValueError(f"frame {t}: {len(props)} proposals but {len(scores[t])} scores")
        nxt: dict[int, ProposalTracklet] = {}
        if t > 0 and open_ and props:
            prev = frames[t - 1]
            for i, j in tbd_match(prev, props):
                tr = open_.pop(i, None)
                if tr is not None:
                    tr.indices.append(j)
                    tr.scores.append(float(scores[t][j]))
                    nxt[j] = tr
        done.extend(open_.values())
        for j in range(len(props)):
            if j not in nxt:
                nxt[j] = ProposalTracklet(t, [j], [float(scores[t][j])])
        open_ = nxt
    done.extend(open_.values())
    done.sort(key=lambda tr: (tr.start, tr.indices[0]))
    return done


def select_tracklet(tracklets: Sequence[ProposalTracklet]) -> ProposalTracklet:
    """Tracklet with the highest mean interaction score (earliest on ties)."""
    if not tracklets:
        raise ValueError("no proposal tracklets")
    return max(enumerate(tracklets), key=lambda it: (it[1].score, -it[0]))[1]


def stabilize_by_iou(tracked: Sequence[Box], proposals: Sequence[Sequence[Box]]) -> list[int | None]:
    """Per frame, the proposal with the highest IoU to the tracked box.

    Frames without proposals yield ``None``.
    """
    out = []
    for box, props in zip(tracked, proposals):
        if not props:
            out.append(None)
            continue
        ious = [iou2d(box, p) for p in props]
        out.append(max(range(len(ious)), key=lambda i: (ious[i], -i)))
    return out
