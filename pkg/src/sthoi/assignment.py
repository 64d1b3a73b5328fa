"""Minimum-cost one-to-one assignment (Hungarian method).

``assignment`` returns the lexicographically smallest optimal matching so that
callers get the same pairs regardless of how ties happen to fall inside the
solver.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

_INF = float("inf")


def _hungarian_square(cost: np.ndarray) -> tuple[float, list[int]]:
    """Shortest augmenting path Hungarian on a square matrix.

    Returns the optimal total and ``col_of_row``.
    """
    n = cost.shape[0]
    if n == 0:
        return 0.0, []
    c = cost.tolist()
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row matched to column j (1-based), 0 = free
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [_INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = c[i0 - 1]
            delta = _INF
            j1 = 0
            ui0 = u[i0]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of_row = [0] * n
    for j in range(1, n + 1):
        if p[j]:
            col_of_row[p[j] - 1] = j - 1
    total = sum(c[i][col_of_row[i]] for i in range(n))
    return total, col_of_row


def _min_cost(cost: np.ndarray) -> float:
    return _hungarian_square(cost)[0]


def _tol(reference: float, scale: float) -> float:
    return 1e-9 * max(1.0, abs(reference), scale)


def solve_square_lexmin(cost: np.ndarray) -> list[int]:
    """Optimal assignment of a square matrix with lexicographic tie-break.

    Row by row, the smallest column that still admits an optimal completion
    is fixed.
    """
    n = cost.shape[0]
    if n == 0:
        return []
    best, first = _hungarian_square(cost)
    scale = float(np.abs(cost).max()) * n
    rows = list(range(n))
    cols = list(range(n))
    chosen: list[int] = []
    fixed = 0.0
    for i in range(n):
        rest_rows = rows[i + 1:]
        for j in sorted(cols):
            rest_cols = [c for c in cols if c != j]
            sub = cost[np.ix_(rest_rows, rest_cols)]
            total = fixed + cost[i, j] + _min_cost(sub)
            if total <= best + _tol(best, scale):
                chosen.append(j)
                fixed += cost[i, j]
                cols = rest_cols
                break
        else:  # pragma: no cover - numerical safety net
            return first
    return chosen


def assignment(cost: Sequence[Sequence[float]] | np.ndarray) -> list[tuple[int, int]]:
    """Minimum-cost matching of ``min(n, m)`` pairs of an ``n x m`` matrix.

    Unbalanced matrices are padded to square with a sentinel cost; pairs that
    land on padding are dropped from the result. Among optimal matchings the
    lexicographically smallest list of ``(row, col)`` pairs is returned.

    >>> assignment([[1, 9], [9, 1]])
    [(0, 0), (1, 1)]
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {c.shape}")
    n, m = c.shape
    if n == 0 or m == 0:
        return []
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix contains non-finite entries")
    size = max(n, m)
    if n != m:
        sentinel = 10.0 * float(np.abs(c).max()) + 1.0
        padded = np.full((size, size), sentinel)
        padded[:n, :m] = c
        c = padded
    cols = solve_square_lexmin(c)
    return [(i, j) for i, j in enumerate(cols) if i < n and j < m]


def assignment_cost(cost, pairs) -> float:
    c = np.asarray(cost, dtype=float)
    total = 0.0
    for i, j in sorted(pairs):
        total += float(c[i, j])
    return total
