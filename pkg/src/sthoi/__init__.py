"""Step-wise evaluation toolkit for spatio-temporal human-object interaction."""
from __future__ import annotations

from .geometry import Box, InvalidInput, iou2d, tube_iou3d
from .assignment import assignment, assignment_cost
from .tracking import evaluate_tracking, idf1, mota
from .tracklets import ALPHA_PRESETS, EvalConfig, Frame, STHOITracklet, mask_and_split
from .pipeline import EvalReport, eval_all

__all__ = [
    "ALPHA_PRESETS", "Box", "EvalConfig", "EvalReport", "Frame", "InvalidInput",
    "STHOITracklet", "assignment", "assignment_cost", "eval_all", "evaluate_tracking",
    "idf1", "iou2d", "mask_and_split", "mota", "tube_iou3d",
]
__version__ = "0.1.0"
