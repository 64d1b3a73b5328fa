from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from conftest import random_int_box, voxel_iou
from sthoi.geometry import Box, InvalidInput, center_distance, iou2d, tube_iou3d


def test_iou_of_identical_boxes_is_exactly_one():
    b = Box(0.1, 0.7, 3.3, 2.9)
    assert iou2d(b, b) == 1.0


def test_iou_known_value():
    assert iou2d(Box(0, 0, 2, 2), Box(1, 1, 2, 2)) == pytest.approx(1 / 7)


def test_disjoint_and_touching_boxes_have_zero_iou():
    assert iou2d(Box(0, 0, 1, 1), Box(1, 0, 1, 1)) == 0.0
    assert iou2d(Box(0, 0, 1, 1), Box(5, 5, 1, 1)) == 0.0


def test_degenerate_boxes():
    assert iou2d(Box(0, 0, 0, 0), Box(0, 0, 0, 0)) == 0.0
    assert iou2d(Box(0, 0, 0, 3), Box(0, 0, 2, 2)) == 0.0


@pytest.mark.parametrize("bad", [(0, 0, -1, 1), (0, 0, 1, -1), (math.nan, 0, 1, 1), (0, math.inf, 1, 1)])
def test_invalid_boxes_raise(bad):
    with pytest.raises(InvalidInput):
        Box(*bad)


def test_box_from_list_needs_four_values():
    with pytest.raises(InvalidInput):
        Box.from_list([1, 2, 3])


def test_tube_iou_matches_voxel_oracle(rng):
    for _ in range(300):
        na, nb = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        a = [random_int_box(rng) for _ in range(na)]
        b = [random_int_box(rng) for _ in range(nb)]
        assert abs(tube_iou3d(a, b) - voxel_iou(a, b)) <= 1e-9


def test_tube_iou_with_missing_frames(rng):
    a = [Box(0, 0, 4, 4), None, Box(2, 2, 4, 4)]
    b = [Box(0, 0, 4, 4), Box(0, 0, 2, 2)]
    assert tube_iou3d(a, b) == pytest.approx(voxel_iou(a, b))


def test_empty_tubes():
    assert tube_iou3d([], []) == 0.0
    assert tube_iou3d([Box(0, 0, 0, 0)], [Box(1, 1, 0, 0)]) == 0.0


def test_single_frame_tube_equals_2d_iou():
    a, b = Box(0, 0, 5, 3), Box(2, 1, 4, 4)
    assert tube_iou3d([a], [b]) == pytest.approx(iou2d(a, b))


def test_center_distance():
    assert center_distance(Box(0, 0, 2, 2), Box(3, 4, 2, 2)) == pytest.approx(5.0)


coords = st.floats(-100, 100, allow_nan=False)
sizes = st.floats(0, 50, allow_nan=False)
boxes = st.builds(Box, coords, coords, sizes, sizes)


@given(boxes, boxes)
def test_iou_is_symmetric_and_bounded(a, b):
    v = iou2d(a, b)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(iou2d(b, a))


@given(st.lists(boxes, max_size=4), st.lists(boxes, max_size=4))
def test_tube_iou_bounded_and_symmetric(a, b):
    v = tube_iou3d(a, b)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(tube_iou3d(b, a))
