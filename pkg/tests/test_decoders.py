from __future__ import annotations

import math

import pytest

from sthoi.decoders import (BoxOffset, decode_offset, density_likelihood, encode_offset,
                            link_proposals, proposal_index_by_score, proposal_select_by_score, select_tracklet,
                            shortest_distance_index, shortest_distance_select, stabilize_by_iou, tbd_match)
from sthoi.geometry import Box


def rand_box(rng):
    return Box(*(float(v) for v in rng.uniform(-100, 100, 2)), *(float(v) for v in rng.uniform(0.5, 80, 2)))


def test_offset_round_trip(rng):
    for _ in range(2000):
        ref, tgt = rand_box(rng), rand_box(rng)
        back = decode_offset(ref, encode_offset(ref, tgt))
        for a, b in zip(back.to_list(), tgt.to_list()):
            assert abs(a - b) <= 1e-9


def test_offset_values():
    d = encode_offset(Box(0, 0, 2, 4), Box(1, 2, 4, 4))
    assert d == BoxOffset(0.5, 0.5, math.log(2), 0.0)


def test_offset_rejects_empty_boxes():
    with pytest.raises(ValueError):
        encode_offset(Box(0, 0, 0, 1), Box(0, 0, 1, 1))


def test_decode_overflow():
    with pytest.raises(OverflowError):
        decode_offset(Box(0, 0, 1, 1), BoxOffset(0, 0, 1e4, 0))


def test_density_likelihood():
    z = BoxOffset(0.1, 0.2, 0.3, 0.4)
    assert density_likelihood(z, z) == 1.0
    assert density_likelihood(z, BoxOffset(1.1, 0.2, 0.3, 0.4)) == pytest.approx(math.exp(-0.5))
    assert density_likelihood(z, BoxOffset(2.1, 0.2, 0.3, 0.4), sigma=2.0) == pytest.approx(math.exp(-0.5))
    with pytest.raises(ValueError):
        density_likelihood(z, z, sigma=0)


def test_selectors():
    props = [Box(0, 0, 2, 2), Box(10, 10, 2, 2), Box(3, 3, 2, 2)]
    assert shortest_distance_index(props, Box(4, 4, 1, 1)) == 2
    assert shortest_distance_select(props, Box(4, 4, 1, 1)) == props[2]
    assert proposal_index_by_score(props, [0.2, 0.9, 0.9]) == 1
    assert proposal_select_by_score(props, [0.2, 0.9, 0.9]) == props[1]
    with pytest.raises(ValueError):
        proposal_select_by_score(props, [0.1])
    with pytest.raises(ValueError):
        shortest_distance_select([], props[0])


def test_link_and_select():
    a, b = Box(0, 0, 10, 10), Box(50, 50, 20, 5)
    frames = [[a, b], [b, a], [a]]
    scores = [[0.9, 0.1], [0.2, 0.8], [0.7]]
    assert tbd_match(frames[0], frames[1]) == [(0, 1), (1, 0)]
    tracks = link_proposals(frames, scores)
    assert [(t.start, t.indices) for t in tracks] == [(0, [0, 1, 0]), (0, [1, 0])]
    assert select_tracklet(tracks).indices == [0, 1, 0]


def test_stabilize():
    tracked = [Box(0, 0, 10, 10), Box(0, 0, 10, 10)]
    props = [[Box(50, 50, 1, 1), Box(1, 1, 10, 10)], []]
    assert stabilize_by_iou(tracked, props) == [1, None]
