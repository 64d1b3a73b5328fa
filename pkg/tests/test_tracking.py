from __future__ import annotations

import itertools
import math

import pytest

from sthoi.geometry import Box, InvalidInput
from sthoi.tracking import (IdentifiedBox, Verdict, evaluate_tracking, evaluate_video,
                            identity_assignment, idf1, match_second, mota)


def slot(k):
    """Boxes in distinct slots never overlap; equal slots overlap fully."""
    return Box(100.0 * k, 0.0, 50.0, 80.0)


def oracle_counts(gt, pred):
    """Event counting for slot scenes: a GT matches the pred in the same slot."""
    misses = fps = switches = 0
    last = {}
    seconds = sorted({s for seq in gt.values() for s in seq} | {s for seq in pred.values() for s in seq})
    for s in seconds:
        g_at = {seq[s]: g for g, seq in gt.items() if s in seq}
        p_at = {seq[s]: p for p, seq in pred.items() if s in seq}
        for box, g in g_at.items():
            p = p_at.get(box)
            if p is None:
                misses += 1
                continue
            if g in last and last[g] != p:
                switches += 1
            last[g] = p
        fps += sum(1 for box in p_at if box not in g_at)
    n_gt = sum(len(seq) for seq in gt.values())
    n_pred = sum(len(seq) for seq in pred.values())
    best = 0
    gids, pids = list(gt), list(pred)
    k = min(len(gids), len(pids))
    for perm in itertools.permutations(pids, k):
        for chosen in itertools.combinations(gids, k):
            tp = sum(1 for g, p in zip(chosen, perm) for s in gt[g]
                     if s in pred[p] and gt[g][s] == pred[p][s])
            best = max(best, tp)
    return 1 - (misses + fps + switches) / n_gt, 2 * best / (n_gt + n_pred)


def test_perfect_tracking():
    gt = {1: {s: slot(0) for s in range(10)}, 2: {s: slot(1) for s in range(10)}}
    vt = evaluate_video(gt, {"a": dict(gt[1]), "b": dict(gt[2])})
    assert vt.mota == 1.0 and vt.idf1 == 1.0


def test_one_miss_in_ten():
    gt = {1: {s: slot(0) for s in range(10)}}
    pred = {1: {s: slot(0) for s in range(9)}}
    assert evaluate_video(gt, pred).mota == 0.9


def test_identity_split_half():
    gt = {1: {s: slot(0) for s in range(10)}}
    pred = {"a": {s: slot(0) for s in range(5)}, "b": {s: slot(0) for s in range(5, 10)}}
    vt = evaluate_video(gt, pred)
    assert vt.idf1 == 0.5
    assert vt.id_switches == 1
    assert vt.verdicts[("a", 0)].tracking is Verdict.TRUE_POSITIVE
    assert vt.verdicts[("b", 7)].tracking is Verdict.FALSE_POSITIVE


def test_random_slot_scenes_match_event_oracle(rng):
    for _ in range(200):
        n_sec = int(rng.integers(1, 8))
        gt = {}
        for g in range(int(rng.integers(1, 4))):
            secs = [s for s in range(n_sec) if rng.random() < 0.8]
            if secs:
                gt[g] = {s: slot(g) for s in secs}
        if not gt:
            continue
        pred = {}
        for p in range(int(rng.integers(0, 4))):
            seq = {}
            for s in range(n_sec):
                if rng.random() < 0.7:
                    # p-th predictor follows a random slot each second, so
                    # slot collisions inside one second must be avoided
                    seq[s] = int(rng.integers(0, 5))
            pred[f"p{p}"] = seq
        # drop collisions: keep the first predictor in a slot
        for s in range(n_sec):
            used = set()
            for p in sorted(pred):
                k = pred[p].get(s)
                if k is None:
                    continue
                if k in used:
                    del pred[p][s]
                used.add(k)
        pred = {p: {s: slot(k) for s, k in seq.items()} for p, seq in pred.items() if seq}
        vt = evaluate_video(gt, pred)
        m, i = oracle_counts(gt, pred)
        assert vt.mota == pytest.approx(m, abs=1e-12)
        assert vt.idf1 == pytest.approx(i, abs=1e-12)


def test_match_second_threshold_is_strict():
    g = [IdentifiedBox(1, Box(0, 0, 2, 1))]
    p = [IdentifiedBox(1, Box(0, 0, 1, 1))]  # IoU exactly 0.5
    m = match_second(g, p, 0.5)
    assert m.matches == [] and m.unmatched_gt == [1] and m.unmatched_pred == [1]


def test_match_second_rejects_duplicates():
    with pytest.raises(InvalidInput):
        match_second([IdentifiedBox(1, slot(0)), IdentifiedBox(1, slot(1))], [])


def test_identity_assignment_prefers_longest_overlap():
    gt = {1: {s: slot(0) for s in range(6)}}
    pred = {"a": {s: slot(0) for s in range(2)}, "b": {s: slot(0) for s in range(2, 6)}}
    mapping, idtp = identity_assignment(gt, pred)
    assert mapping == {1: "b"} and idtp == 4


def test_video_without_gt_is_excluded():
    gt = {"v1": {1: {0: slot(0)}}, "v2": {}}
    pred = {"v1": {1: {0: slot(0)}}, "v2": {"x": {0: slot(3)}}}
    res = evaluate_tracking(gt, pred)
    assert res.excluded == ["v2"]
    assert res.mota == 1.0
    assert mota(gt, pred) == 1.0 and idf1(gt, pred) == 1.0


def test_no_gt_anywhere_gives_nan():
    assert math.isnan(mota({"v": {}}, {"v": {}}))


def test_pure_false_positive_track_never_helps(rng):
    for _ in range(100):
        gt = {g: {s: slot(g) for s in range(5) if rng.random() < 0.9} for g in range(3)}
        gt = {g: seq for g, seq in gt.items() if seq}
        pred = {f"p{g}": {s: b for s, b in seq.items() if rng.random() < 0.8} for g, seq in gt.items()}
        pred = {p: seq for p, seq in pred.items() if seq}
        base = evaluate_video(gt, pred)
        pred["fp"] = {s: slot(50) for s in range(5)}
        worse = evaluate_video(gt, pred)
        assert worse.mota <= base.mota and worse.idf1 <= base.idf1
