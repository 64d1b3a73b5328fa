"""Test-split selection as a variance-minimizing 0/1 program.

Choose exactly ``n_test`` videos so that the summed interaction-class and
object-class histograms are as flat as possible (sum of their population
variances), subject to per-interaction minimum counts and a minimum amount of
object mass in the top half of the location heatmap.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np

MAX_EXACT_VIDEOS = 24


class InfeasibleStart(RuntimeError):
    """The heuristic could not find any feasible selection to start from."""


@dataclass
class SplitProblem:
    interactions: np.ndarray  # (N, N_a) counts
    objects: np.ndarray  # (N, N_o) counts
    heatmaps: np.ndarray  # (N, N_h) counts, flattened row-major
    n_test: int
    alpha: np.ndarray  # (N_a,) per-interaction minimum
    gamma: float = 0.0
    ids: list = field(default_factory=list)

    def __post_init__(self):
        self.interactions = np.asarray(self.interactions, dtype=np.int64)
        self.objects = np.asarray(self.objects, dtype=np.int64)
        self.heatmaps = np.asarray(self.heatmaps, dtype=np.int64)
        n = self.interactions.shape[0]
        if self.heatmaps.size == 0:
            self.heatmaps = np.zeros((n, 0), dtype=np.int64)
        if self.interactions.ndim != 2 or self.objects.ndim != 2 or self.heatmaps.ndim != 2:
            raise ValueError("count tables must be 2-D (videos x classes)")
        if not (self.objects.shape[0] == n and self.heatmaps.shape[0] == n):
            raise ValueError("count tables disagree on the number of videos")
        for name in ("interactions", "objects", "heatmaps"):
            if (getattr(self, name) < 0).any():
                raise ValueError(f"{name} counts must be non-negative")
        alpha = np.zeros(self.interactions.shape[1]) if self.alpha is None else self.alpha
        self.alpha = np.asarray(alpha, dtype=float)
        if self.alpha.shape != (self.interactions.shape[1],):
            raise ValueError("alpha needs one entry per interaction class")
        if not 0 <= self.n_test <= n:
            raise ValueError(f"n_test={self.n_test} outside [0, {n}]")
        if not self.ids:
            self.ids = list(range(n))

    @property
    def n_videos(self) -> int:
        return self.interactions.shape[0]

    @property
    def top_half(self) -> np.ndarray:
        """Per-video heatmap mass in the first ceil(N_h / 2) entries."""
        k = math.ceil(self.heatmaps.shape[1] / 2)
        return self.heatmaps[:, :k].sum(axis=1)


@dataclass
class SplitSolution:
    selection: np.ndarray
    objective: float
    feasible: bool

    @property
    def selected(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.selection)]


def _as_x(problem: SplitProblem, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (problem.n_videos,):
        raise ValueError(f"selection has shape {x.shape}, expected ({problem.n_videos},)")
    if not np.isin(x, (0, 1)).all():
        raise ValueError("selection must be binary")
    return x.astype(np.int64)


def population_variance(v) -> float:
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.mean((v - v.mean()) ** 2))


def objective(problem: SplitProblem, x) -> float:
    x = _as_x(problem, x)
    return (population_variance(x @ problem.interactions)
            + population_variance(x @ problem.objects))


def feasible(problem: SplitProblem, x) -> bool:
    x = _as_x(problem, x)
    if int(x.sum()) != problem.n_test:
        return False
    if np.any(x @ problem.interactions < problem.alpha):
        return False
    return bool(x @ problem.top_half >= problem.gamma)


def _scaled_var(sums: np.ndarray) -> np.ndarray:
    """``d^2 * Var`` per row of summed counts, exact in integers."""
    d = sums.shape[1]
    return d * (sums * sums).sum(axis=1) - sums.sum(axis=1) ** 2


def _exact_keys(problem: SplitProblem, idx: np.ndarray):
    """Integer keys ordering selections exactly like the objective does."""
    sa = problem.interactions[idx].sum(axis=1)
    so = problem.objects[idx].sum(axis=1)
    da, do = problem.interactions.shape[1], problem.objects.shape[1]
    total = max(int(problem.interactions.sum()), int(problem.objects.sum()), 1)
    if total ** 2 * max(da, do, 1) ** 3 > 2 ** 62:  # would overflow int64
        sa, so = sa.astype(object), so.astype(object)
    va = _scaled_var(sa) if da else np.zeros(len(idx), dtype=np.int64)
    vo = _scaled_var(so) if do else np.zeros(len(idx), dtype=np.int64)
    # z * da^2 * do^2 == va * do^2 + vo * da^2
    return va * max(do, 1) ** 2 + vo * max(da, 1) ** 2


def solve_exact(problem: SplitProblem, chunk: int = 65536) -> SplitSolution:
    """Global optimum by enumerating every ``n_test``-subset.

    Ties go to the lexicographically smallest index set. Infeasible problems
    return ``feasible=False`` with an all-zero selection.
    """
    n, k = problem.n_videos, problem.n_test
    if n > MAX_EXACT_VIDEOS:
        raise ValueError(f"exact enumeration supports at most {MAX_EXACT_VIDEOS} videos, got {n}")
    top = problem.top_half
    best_key, best_idx = None, None
    combos = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        idx = np.array(block, dtype=np.int64).reshape(len(block), k)
        ok = (problem.interactions[idx].sum(axis=1) >= problem.alpha).all(axis=1)
        ok &= top[idx].sum(axis=1) >= problem.gamma
        if not ok.any():
            continue
        rows = np.flatnonzero(ok)
        keys = _exact_keys(problem, idx[rows])
        i = min(range(len(rows)), key=lambda r: keys[r])  # first minimum = lex-smallest
        if best_key is None or keys[i] < best_key:
            best_key, best_idx = keys[i], idx[rows[i]]
    x = np.zeros(n, dtype=np.int64)
    if best_idx is None:
        return SplitSolution(x, math.nan, False)
    x[best_idx] = 1
    return SplitSolution(x, objective(problem, x), True)


def _fast_var(v: np.ndarray) -> float:
    d = v.shape[0]
    if d == 0:
        return 0.0
    m = v.sum() / d
    return max(float(v @ v) / d - m * m, 0.0)


class _State:
    """Running sums for cheap swap evaluation."""

    def __init__(self, problem: SplitProblem, x: np.ndarray):
        self.p = problem
        self.A = problem.interactions.astype(float)
        self.O = problem.objects.astype(float)
        self.T = problem.top_half.astype(float)
        self.x = x.copy()
        self.sa = x @ self.A
        self.so = x @ self.O
        self.top = float(x @ self.T)

    def z_after_swap(self, out_i: int, in_j: int) -> tuple[float, bool]:
        p = self.p
        sa = self.sa - self.A[out_i] + self.A[in_j]
        so = self.so - self.O[out_i] + self.O[in_j]
        top = self.top - self.T[out_i] + self.T[in_j]
        ok = bool(top >= p.gamma and (sa >= p.alpha).all())
        return _fast_var(sa) + _fast_var(so), ok

    def swap(self, out_i: int, in_j: int):
        self.x[out_i], self.x[in_j] = 0, 1
        self.sa += self.A[in_j] - self.A[out_i]
        self.so += self.O[in_j] - self.O[out_i]
        self.top += self.T[in_j] - self.T[out_i]

    @property
    def z(self) -> float:
        return population_variance(self.sa) + population_variance(self.so)

    def deficit(self) -> float:
        return float(np.maximum(self.p.alpha - self.sa, 0).sum() + max(self.p.gamma - self.top, 0.0))


def _greedy_start(problem: SplitProblem) -> np.ndarray:
    """Add videos one at a time by how much unmet constraint they cover."""
    n = problem.n_videos
    x = np.zeros(n, dtype=np.int64)
    sa = np.zeros(problem.interactions.shape[1])
    top = 0.0
    top_half = problem.top_half
    for _ in range(problem.n_test):
        need = np.maximum(problem.alpha - sa, 0)
        gneed = max(problem.gamma - top, 0.0)
        best, best_gain = None, -1.0
        for i in np.flatnonzero(x == 0):
            gain = float(np.minimum(problem.interactions[i], need).sum() + min(top_half[i], gneed))
            if gain > best_gain:
                best, best_gain = int(i), gain
        x[best] = 1
        sa += problem.interactions[best]
        top += top_half[best]
    return x


def _repair(problem: SplitProblem, x: np.ndarray, rng: np.random.Generator,
            attempts: int) -> np.ndarray | None:
    st = _State(problem, x)
    if st.deficit() == 0:
        return st.x
    for _ in range(attempts):
        sel = np.flatnonzero(st.x == 1)
        uns = np.flatnonzero(st.x == 0)
        if len(sel) == 0 or len(uns) == 0:
            return None
        i, j = int(rng.choice(sel)), int(rng.choice(uns))
        before = st.deficit()
        st.swap(i, j)
        after = st.deficit()
        if after == 0:
            return st.x
        if after > before and rng.random() > 0.2:
            st.swap(j, i)
    return None


def _initial_temperature(st: _State, rng: np.random.Generator, samples: int = 64) -> float:
    """Mean uphill step over random feasible swaps."""
    sel, uns = np.flatnonzero(st.x == 1), np.flatnonzero(st.x == 0)
    z = st.z
    ups = []
    for _ in range(samples):
        zn, ok = st.z_after_swap(int(rng.choice(sel)), int(rng.choice(uns)))
        if ok and zn > z:
            ups.append(zn - z)
    return float(np.mean(ups)) if ups else max(z, 1.0)


def solve_heuristic(problem: SplitProblem, seed: int = 0, iterations: int = 6000,
                    cooling: float = 0.995, chain_length: int = 1500,
                    repair_attempts: int = 10000) -> SplitSolution:
    """Swap-based simulated annealing that only visits feasible selections.

    The budget is spent in chains of ``chain_length`` moves; every chain
    restarts from the best selection so far, reheats, and cools geometrically
    by ``cooling`` per move. Each chain ends with a best-improvement descent.
    Deterministic for a fixed seed; ``iterations=0`` returns the repaired
    greedy start.
    """
    rng = np.random.default_rng(seed)
    n, k = problem.n_videos, problem.n_test
    x0 = _repair(problem, _greedy_start(problem), rng, repair_attempts)
    if x0 is None:
        raise InfeasibleStart("no feasible selection found after repair attempts")
    best_x = x0.copy()
    if iterations <= 0 or k == 0 or k == n:
        return SplitSolution(best_x, objective(problem, best_x), True)
    best_z = _State(problem, best_x).z
    remaining = iterations
    while remaining > 0:
        steps = min(chain_length, remaining)
        remaining -= steps
        st = _State(problem, best_x)
        z = st.z
        temp = _initial_temperature(st, rng)
        sel = [int(i) for i in np.flatnonzero(st.x == 1)]
        uns = [int(i) for i in np.flatnonzero(st.x == 0)]
        draws = rng.random((steps, 3))
        for a, b, u in draws:
            ii, jj = int(a * len(sel)), int(b * len(uns))
            i, j = sel[ii], uns[jj]
            z_new, ok = st.z_after_swap(i, j)
            if ok:
                dz = z_new - z
                if dz <= 0 or u < math.exp(-dz / temp):
                    st.swap(i, j)
                    sel[ii], uns[jj] = j, i
                    z = z_new
                    if z < best_z - 1e-12:
                        best_x, best_z = st.x.copy(), z
            temp = max(temp * cooling, 1e-12)
        x = _descend(problem, st.x)
        zx = _State(problem, x).z
        if zx < best_z - 1e-12:
            best_x, best_z = x, zx
    best_x = _descend(problem, best_x)
    return SplitSolution(best_x, objective(problem, best_x), True)


def _descend(problem: SplitProblem, x: np.ndarray) -> np.ndarray:
    """Best-improvement swaps until no feasible swap lowers the objective."""
    st = _State(problem, x)
    z = st.z
    while True:
        best = None
        best_z = z - 1e-12
        for i in np.flatnonzero(st.x == 1):
            for j in np.flatnonzero(st.x == 0):
                zn, ok = st.z_after_swap(int(i), int(j))
                if ok and zn < best_z:
                    best, best_z = (int(i), int(j)), zn
        if best is None:
            return st.x
        st.swap(*best)
        z = best_z


def load_problem(path: str | Path) -> SplitProblem:
    doc = json.loads(Path(path).read_text())
    return problem_from_dict(doc)


def problem_from_dict(doc: dict) -> SplitProblem:
    videos = doc["videos"]
    if not videos:
        raise ValueError("problem lists no videos")
    return SplitProblem(
        interactions=[v["interactions"] for v in videos],
        objects=[v["objects"] for v in videos],
        heatmaps=[v.get("heatmap", []) for v in videos],
        n_test=int(doc["n_test"]),
        alpha=doc.get("alpha"),
        gamma=float(doc.get("gamma", 0.0)),
        ids=[v.get("id", i) for i, v in enumerate(videos)],
    )


def problem_to_dict(problem: SplitProblem) -> dict:
    return {
        "videos": [
            {"id": vid, "interactions": problem.interactions[i].tolist(),
             "objects": problem.objects[i].tolist(), "heatmap": problem.heatmaps[i].tolist()}
            for i, vid in enumerate(problem.ids)
        ],
        "n_test": problem.n_test,
        "alpha": problem.alpha.tolist(),
        "gamma": problem.gamma,
    }


def solution_to_dict(problem: SplitProblem, sol: SplitSolution) -> dict:
    return {
        "feasible": sol.feasible,
        "objective": None if math.isnan(sol.objective) else sol.objective,
        "selection": sol.selection.tolist(),
        "test_videos": [problem.ids[i] for i in sol.selected],
    }

