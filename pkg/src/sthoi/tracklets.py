"""Score masking and division of human tracklets into ST-HOI tracklets."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .geometry import Box

NUM_INTERACTIONS = 51

# Per tracker/method score thresholds used for the published baselines.
ALPHA_PRESETS = {
    "de-deepsort": 0.2,
    "de-fairmot": 0.5,
    "proposal-deepsort": 0.02,
    "deepsort": 0.03,
    "fairmot": 0.4,
}
DEFAULT_ALPHA = 0.0


@dataclass(frozen=True)
class EvalConfig:
    alpha: float = DEFAULT_ALPHA
    tp_miou: float = 0.2
    tracking_iou: float = 0.5

    def __post_init__(self):
        for name in ("alpha", "tp_miou", "tracking_iou"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass
class SecondScores:
    second: int
    box: Box
    scores: Sequence[float]


@dataclass
class ScoredHumanTracklet:
    track_id: Hashable
    seconds: list[SecondScores]

    def __post_init__(self):
        prev = None
        for s in self.seconds:
            if prev is not None and s.second <= prev:
                raise ValueError("seconds must be strictly increasing")
            if len(s.scores) != NUM_INTERACTIONS:
                raise ValueError(f"expected {NUM_INTERACTIONS} scores, got {len(s.scores)}")
            prev = s.second


@dataclass
class Frame:
    """One second of an ST-HOI tracklet.

    ``human_tube``/``object_tubes`` hold the per-frame boxes inside the
    second when available; otherwise the keyframe box stands in for the tube.
    """
    second: int
    human: Box
    score: float = 1.0
    objects: list[Box] = field(default_factory=list)
    human_tube: list[Box] | None = None
    object_tubes: list[list[Box]] | None = None

    def tube(self) -> list[Box]:
        return self.human_tube if self.human_tube else [self.human]

    def object_tube(self, k: int) -> list[Box] | None:
        if self.object_tubes and k < len(self.object_tubes) and self.object_tubes[k]:
            return self.object_tubes[k]
        if k < len(self.objects):
            return [self.objects[k]]
        return None


@dataclass
class STHOITracklet:
    track_id: Hashable
    interaction: int
    frames: list[Frame]
    video: str = ""

    def __post_init__(self):
        if not self.frames:
            raise ValueError("ST-HOI tracklet must be non-empty")

    @property
    def seconds(self) -> list[int]:
        return [f.second for f in self.frames]

    @property
    def start(self) -> int:
        return self.frames[0].second

    def is_contiguous(self) -> bool:
        secs = self.seconds
        return all(b == a + 1 for a, b in zip(secs, secs[1:]))


def contiguous_runs(seconds: Sequence[int]) -> list[tuple[int, int]]:
    """Index ranges ``[lo, hi)`` of maximal runs of consecutive seconds."""
    runs = []
    lo = 0
    for i in range(1, len(seconds) + 1):
        if i == len(seconds) or seconds[i] != seconds[i - 1] + 1:
            if i > lo:
                runs.append((lo, i))
            lo = i
    return runs


def mask_and_split(t: ScoredHumanTracklet, alpha: float) -> list[STHOITracklet]:
    """Zero scores below ``alpha`` and cut each class into contiguous runs.

    A second survives for a class when its score is at least ``alpha`` and
    positive. Runs are emitted per class in class order, then by time. An
    empty result means the human tracklet is deleted.
    """
    out = []
    for cls in range(NUM_INTERACTIONS):
        kept = [s for s in t.seconds if s.scores[cls] >= alpha and s.scores[cls] > 0]
        if not kept:
            continue
        for lo, hi in contiguous_runs([s.second for s in kept]):
            frames = [Frame(s.second, s.box, float(s.scores[cls])) for s in kept[lo:hi]]
            out.append(STHOITracklet(t.track_id, cls + 1, frames))
    return out


def split_tracklet(t: STHOITracklet, alpha: float) -> list[STHOITracklet]:
    """Masking for tracklets that already carry a single interaction score.

    Frames scoring below ``alpha`` are dropped and gaps (masked or missing
    seconds) divide the tracklet.
    """
    kept = [f for f in t.frames if f.score >= alpha]
    out = []
    for lo, hi in contiguous_runs([f.second for f in kept]):
        out.append(STHOITracklet(t.track_id, t.interaction, kept[lo:hi], t.video))
    return out


def tracklet_score(t: STHOITracklet) -> float:
    return sum(f.score for f in t.frames) / len(t.frames)
