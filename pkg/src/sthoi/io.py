"""JSON Lines reader/writer for ST-HOI tracklet files.

One record per tracklet::

    {"video": "v1", "track_id": 3, "interaction": 17,
     "frames": [{"second": 0, "human": [x, y, w, h], "score": 0.9,
                 "objects": [[x, y, w, h], ...]}, ...]}

Frames may also carry ``human_tube`` (the boxes of every frame inside the
second) and ``object_tubes`` (one such list per object) for 3-D scoring.
GT records may use ``interaction: 0`` for tracked people who do not interact.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from .geometry import Box, InvalidInput
from .tracklets import Frame, NUM_INTERACTIONS, STHOITracklet


class ParseError(ValueError):
    def __init__(self, message: str, source: str = "", line: int | None = None):
        where = f"{source}:{line}: " if line is not None else (f"{source}: " if source else "")
        super().__init__(where + message)
        self.source = source
        self.line = line


def _box(v, what: str) -> Box:
    if not isinstance(v, (list, tuple)) or len(v) != 4:
        raise ValueError(f"{what} must be [x, y, w, h]")
    return Box.from_list([float(c) for c in v])


def frame_from_dict(d: dict) -> Frame:
    if "second" not in d or "human" not in d:
        raise ValueError("frame needs 'second' and 'human'")
    second = d["second"]
    if isinstance(second, bool) or not isinstance(second, int) or second < 0:
        raise ValueError(f"second must be a non-negative integer, got {second!r}")
    score = float(d.get("score", 1.0))
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score {score} outside [0, 1]")
    objects = [_box(o, "object") for o in d.get("objects") or []]
    tube = d.get("human_tube")
    otubes = d.get("object_tubes")
    return Frame(
        second=second,
        human=_box(d["human"], "human"),
        score=score,
        objects=objects,
        human_tube=[_box(b, "human_tube box") for b in tube] if tube else None,
        object_tubes=[[_box(b, "object_tubes box") for b in t] for t in otubes] if otubes else None,
    )


def frame_to_dict(f: Frame, with_score: bool = True) -> dict:
    d = {"second": f.second, "human": f.human.to_list()}
    if with_score:
        d["score"] = f.score
    d["objects"] = [o.to_list() for o in f.objects]
    if f.human_tube:
        d["human_tube"] = [b.to_list() for b in f.human_tube]
    if f.object_tubes:
        d["object_tubes"] = [[b.to_list() for b in t] for t in f.object_tubes]
    return d


def tracklet_from_dict(d: dict) -> STHOITracklet:
    for key in ("video", "track_id", "interaction", "frames"):
        if key not in d:
            raise ValueError(f"record is missing {key!r}")
    inter = d["interaction"]
    if isinstance(inter, bool) or not isinstance(inter, int) or not 0 <= inter <= NUM_INTERACTIONS:
        raise ValueError(f"interaction must be an integer in [0, {NUM_INTERACTIONS}], got {inter!r}")
    if not isinstance(d["frames"], list) or not d["frames"]:
        raise ValueError("frames must be a non-empty list")
    frames = sorted((frame_from_dict(f) for f in d["frames"]), key=lambda f: f.second)
    for a, b in zip(frames, frames[1:]):
        if a.second == b.second:
            raise ValueError(f"second {a.second} appears twice")
    track_id = d["track_id"]
    if not isinstance(track_id, (int, str)) or isinstance(track_id, bool):
        raise ValueError("track_id must be an integer or string")
    return STHOITracklet(track_id=track_id, interaction=inter, frames=frames, video=str(d["video"]))


def tracklet_to_dict(t: STHOITracklet, with_score: bool = True) -> dict:
    return {
        "video": t.video,
        "track_id": t.track_id,
        "interaction": t.interaction,
        "frames": [frame_to_dict(f, with_score) for f in t.frames],
    }


def iter_tracklets(lines: Iterable[str], source: str = "<stream>") -> Iterator[STHOITracklet]:
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
            if not isinstance(doc, dict):
                raise ValueError("record must be a JSON object")
            yield tracklet_from_dict(doc)
        except (ValueError, InvalidInput, TypeError) as e:
            raise ParseError(str(e), source, n) from e


def read_tracklets(path: str | Path) -> list[STHOITracklet]:
    path = Path(path)
    try:
        with path.open() as fh:
            return list(iter_tracklets(fh, str(path)))
    except OSError as e:
        raise ParseError(str(e), str(path)) from e


def write_tracklets(out: str | Path | TextIO, tracklets: Iterable[STHOITracklet],
                    with_score: bool = True):
    lines = [json.dumps(tracklet_to_dict(t, with_score), separators=(",", ":")) for t in tracklets]
    text = "\n".join(lines) + ("\n" if lines else "")
    if hasattr(out, "write"):
        out.write(text)
    else:
        Path(out).write_text(text)
