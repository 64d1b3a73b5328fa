from __future__ import annotations

import itertools

import numpy as np
import pytest

from sthoi.geometry import Box
from sthoi.tracklets import Frame, STHOITracklet


def voxel_iou(a, b, size=32):
    """Count unit voxels covered by integer tubes (``None`` = empty frame)."""
    n = max(len(a), len(b))
    inter = union = 0
    for t in range(n):
        ma = np.zeros((size, size), bool)
        mb = np.zeros((size, size), bool)
        for tube, m in ((a, ma), (b, mb)):
            if t < len(tube) and tube[t] is not None:
                x, y, w, h = (int(v) for v in tube[t].to_list())
                m[y:y + h, x:x + w] = True
        inter += int((ma & mb).sum())
        union += int((ma | mb).sum())
    return inter / union if union else 0.0


def random_int_box(rng, size=32, allow_empty=True):
    x, y = (int(v) for v in rng.integers(0, size, 2))
    lo = 0 if allow_empty else 1
    w = int(rng.integers(lo, size - x + 1)) if size - x >= lo else 0
    h = int(rng.integers(lo, size - y + 1)) if size - y >= lo else 0
    return Box(x, y, w, h)


def brute_force_cost(c):
    c = np.asarray(c, float)
    n, m = c.shape
    if n <= m:
        return min(sum(c[i, p[i]] for i in range(n)) for p in itertools.permutations(range(m), n))
    return min(sum(c[p[j], j] for j in range(m)) for p in itertools.permutations(range(n), m))


def tracklet(track_id, interaction, boxes, start=0, video="v", scores=None, objects=None):
    frames = []
    for k, b in enumerate(boxes):
        s = 1.0 if scores is None else scores[k]
        objs = [] if objects is None else [objects[k]] if objects[k] is not None else []
        frames.append(Frame(start + k, b, s, objs))
    return STHOITracklet(track_id, interaction, frames, video)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_split_problem(rng, n=None):
    from sthoi.split import SplitProblem
    n = int(rng.integers(4, 17)) if n is None else n
    na, no, nh = (int(v) for v in rng.integers(2, 7, 3))
    inter = rng.integers(0, 6, (n, na))
    objs = rng.integers(0, 6, (n, no))
    heat = rng.integers(0, 4, (n, nh))
    k = int(rng.integers(1, max(2, n // 2) + 1))
    # constraints sized so most instances stay feasible
    alpha = np.floor(np.sort(inter, axis=0)[-k:].sum(axis=0) * rng.uniform(0.0, 0.5, na))
    top = heat[:, : (nh + 1) // 2].sum(axis=1)
    gamma = float(np.floor(np.sort(top)[-k:].sum() * rng.uniform(0.0, 0.5)))
    return SplitProblem(inter, objs, heat, k, alpha, gamma)


def enumerate_split(problem):
    """Second exact solver: bitmask order, rational arithmetic."""
    from fractions import Fraction
    n, k = problem.n_videos, problem.n_test
    inter = problem.interactions.tolist()
    objs = problem.objects.tolist()
    top = problem.top_half.tolist()
    alpha = [Fraction(a) for a in problem.alpha.tolist()]
    gamma = Fraction(problem.gamma)

    def var(rows, table):
        d = len(table[0]) if table else 0
        if d == 0:
            return Fraction(0)
        sums = [sum(table[i][c] for i in rows) for c in range(d)]
        mean = Fraction(sum(sums), d)
        return sum((Fraction(s) - mean) ** 2 for s in sums) / d

    best = None
    for mask in range((1 << n) - 1, -1, -1):
        if bin(mask).count("1") != k:
            continue
        rows = [i for i in range(n) if mask >> i & 1]
        if any(sum(inter[i][c] for i in rows) < alpha[c] for c in range(len(alpha))):
            continue
        if sum(top[i] for i in rows) < gamma:
            continue
        z = var(rows, inter) + var(rows, objs)
        if best is None or z < best:
            best = z
    return best


def random_ontology(rng, n_words=12, extra_edges=3):
    """Single-rooted random hypernym DAG; returns (oracle, leaf-ish words)."""
    from sthoi.taxonomy import MockOntology
    nodes = ["entity"]
    edges = []
    for i in range(1, n_words + 6):
        w = f"w{i}"
        edges.append((w, nodes[int(rng.integers(0, len(nodes)))]))
        nodes.append(w)
    for _ in range(extra_edges):
        a, b = sorted(rng.choice(len(nodes), 2, replace=False))
        if a != b:
            edges.append((nodes[b], nodes[a]))  # later nodes only point to earlier ones
    words = [str(w) for w in rng.choice(nodes[1:], n_words, replace=False)]
    return MockOntology(edges), words


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
