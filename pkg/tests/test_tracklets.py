from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from sthoi.geometry import Box
from sthoi.tracklets import (ALPHA_PRESETS, NUM_INTERACTIONS, EvalConfig, Frame, STHOITracklet,
                             ScoredHumanTracklet, SecondScores, contiguous_runs, mask_and_split,
                             split_tracklet, tracklet_score)

BOX = Box(0, 0, 10, 20)


def scored(scores_by_second, track_id=7):
    return ScoredHumanTracklet(track_id, [SecondScores(s, BOX, sc) for s, sc in scores_by_second])


def one_class(values, cls=0, start=0):
    out = []
    for k, v in enumerate(values):
        sc = [0.0] * NUM_INTERACTIONS
        sc[cls] = v
        out.append((start + k, sc))
    return scored(out)


def test_presets():
    assert ALPHA_PRESETS["de-deepsort"] == 0.2
    assert ALPHA_PRESETS["de-fairmot"] == 0.5
    assert ALPHA_PRESETS["proposal-deepsort"] == 0.02


def test_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(alpha=1.5)


def test_split_on_masked_second():
    out = mask_and_split(one_class([0.9, 0.1, 0.8, 0.8], cls=4), alpha=0.5)
    assert [t.seconds for t in out] == [[0], [2, 3]]
    assert all(t.interaction == 5 for t in out)
    assert out[1].frames[0].score == 0.8


def test_split_on_missing_second():
    t = scored([(0, [0.9] * NUM_INTERACTIONS), (2, [0.9] * NUM_INTERACTIONS)])
    out = mask_and_split(t, 0.0)
    assert len(out) == 2 * NUM_INTERACTIONS


def test_all_masked_deletes():
    assert mask_and_split(one_class([0.1, 0.2]), alpha=0.5) == []


def test_wrong_score_count_rejected():
    with pytest.raises(ValueError):
        ScoredHumanTracklet(1, [SecondScores(0, BOX, [0.5])])


def test_non_increasing_seconds_rejected():
    sc = [0.5] * NUM_INTERACTIONS
    with pytest.raises(ValueError):
        ScoredHumanTracklet(1, [SecondScores(1, BOX, sc), SecondScores(1, BOX, sc)])


def test_mask_and_split_properties(rng):
    for _ in range(300):
        n = int(rng.integers(1, 30))
        vals = [float(v) if rng.random() < 0.8 else 0.0 for v in rng.random(n)]
        alpha = float(rng.choice([0.0, 0.2, 0.5, 0.9]))
        out = mask_and_split(one_class(vals), alpha)
        kept = [s for s, v in enumerate(vals) if v >= alpha and v > 0]
        covered = [s for t in out for s in t.seconds]
        assert sorted(covered) == kept
        assert len(set(covered)) == len(covered)
        assert all(t.is_contiguous() for t in out)


def test_alpha_zero_is_identity():
    vals = [0.3, 0.4, 0.9]
    out = mask_and_split(one_class(vals), 0.0)
    assert len(out) == 1 and [f.score for f in out[0].frames] == vals


def test_split_tracklet_single_score():
    t = STHOITracklet(1, 3, [Frame(s, BOX, sc) for s, sc in [(0, .9), (1, .1), (2, .9), (4, .9)]])
    assert [x.seconds for x in split_tracklet(t, 0.5)] == [[0], [2], [4]]
    assert [x.seconds for x in split_tracklet(t, 0.0)] == [[0, 1, 2], [4]]
    assert tracklet_score(t) == pytest.approx(0.7)


def test_empty_tracklet_rejected():
    with pytest.raises(ValueError):
        STHOITracklet(1, 1, [])


@given(st.lists(st.integers(0, 50), unique=True).map(sorted))
def test_contiguous_runs_partition(seconds):
    runs = contiguous_runs(seconds)
    flat = [seconds[i] for lo, hi in runs for i in range(lo, hi)]
    assert flat == seconds
    for lo, hi in runs:
        assert seconds[hi - 1] - seconds[lo] == hi - lo - 1
    for (_, a), (b, _) in zip(runs, runs[1:]):
        assert seconds[b] > seconds[a - 1] + 1
