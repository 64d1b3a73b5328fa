"""Boxes, tubes and the overlap measures every metric is built on.

Boxes are continuous ``(x, y, w, h)`` rectangles with ``(x, y)`` the top-left
corner.  A tube is the list of boxes one actor occupies over the frames of a
one-second window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


class InvalidInput(ValueError):
    """Raised when a geometric value violates its invariants."""


@dataclass(frozen=True)
class Box:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidInput(f"non-finite box coordinate {name}={v!r}")
        if self.w < 0 or self.h < 0:
            raise InvalidInput(f"negative box size w={self.w}, h={self.h}")

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "Box":
        if len(values) != 4:
            raise InvalidInput(f"box needs 4 values, got {len(values)}")
        return cls(*(float(v) for v in values))

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return self.x + self.w / 2.0, self.y + self.h / 2.0

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    def scaled(self, s: float) -> "Box":
        return Box(self.x * s, self.y * s, self.w * s, self.h * s)

    def translated(self, dx: float, dy: float) -> "Box":
        return Box(self.x + dx, self.y + dy, self.w, self.h)

    def contains(self, other: "Box") -> bool:
        return (self.x <= other.x and self.y <= other.y
                and other.x2 <= self.x2 and other.y2 <= self.y2)


# A tube is simply an ordered sequence of per-frame boxes. ``None`` marks a
# frame without a box (used when padding).
Tube = Sequence["Box | None"]


def intersection_area(a: Box, b: Box) -> float:
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def intersection_union(a: Box, b: Box) -> tuple[float, float]:
    if a == b:
        return a.area, a.area
    inter = intersection_area(a, b)
    return inter, a.area + b.area - inter


def iou2d(a: Box, b: Box) -> float:
    """Intersection over union of two boxes; 0 when both are degenerate.

    >>> iou2d(Box(0, 0, 2, 2), Box(1, 1, 2, 2))  # doctest: +ELLIPSIS
    0.142857...
    """
    inter, union = intersection_union(a, b)
    if union <= 0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def tube_iou3d(a: Tube, b: Tube) -> float:
    """Volume IoU of two tubes as the ratio of slice-summed areas.

    The shorter tube is padded with empty frames, which add nothing to the
    intersection and the other box's area to the union.
    """
    if len(a) == 0 and len(b) == 0:
        return 0.0
    n = max(len(a), len(b))
    inter_sum = 0.0
    union_sum = 0.0
    for t in range(n):
        ba = a[t] if t < len(a) else None
        bb = b[t] if t < len(b) else None
        if ba is None and bb is None:
            continue
        if ba is None:
            union_sum += bb.area
        elif bb is None:
            union_sum += ba.area
        else:
            inter, union = intersection_union(ba, bb)
            inter_sum += inter
            union_sum += union
    if union_sum <= 0:
        return 0.0
    return min(1.0, max(0.0, inter_sum / union_sum))


def center_distance(a: Box, b: Box) -> float:
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)


def boxes(values: Iterable[Sequence[float]]) -> list[Box]:
    return [Box.from_list(v) for v in values]
