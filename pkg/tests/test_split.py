from __future__ import annotations

import json
import math

import numpy as np
import pytest

from conftest import enumerate_split, random_split_problem
from sthoi.split import (InfeasibleStart, SplitProblem, feasible, load_problem, objective,
                         population_variance, problem_from_dict, problem_to_dict, solve_exact,
                         solve_heuristic)


def test_population_variance():
    assert population_variance([1, 2, 3, 4]) == 1.25
    assert population_variance([]) == 0.0


def test_exact_matches_second_enumerator(rng):
    for _ in range(25):
        p = random_split_problem(rng, n=int(rng.integers(4, 11)))
        sol = solve_exact(p)
        ref = enumerate_split(p)
        if ref is None:
            assert not sol.feasible and math.isnan(sol.objective)
            continue
        assert sol.feasible and feasible(p, sol.selection)
        assert sol.objective == pytest.approx(float(ref), rel=1e-12, abs=1e-12)


def test_exact_tie_goes_to_smallest_index_set():
    p = SplitProblem([[1, 1]] * 4, [[0, 0]] * 4, [], 2, None)
    assert solve_exact(p).selected == [0, 1]


def test_exact_infeasible():
    p = SplitProblem([[1], [1]], [[0], [0]], [], 1, [5])
    sol = solve_exact(p)
    assert not sol.feasible and sol.selection.sum() == 0


def test_heuristic_is_feasible_and_near_optimal(rng):
    for _ in range(10):
        p = random_split_problem(rng, n=12)
        opt = solve_exact(p)
        if not opt.feasible:
            continue
        sol = solve_heuristic(p, seed=1)
        assert feasible(p, sol.selection)
        assert sol.objective <= 1.05 * opt.objective + 1e-9


def test_heuristic_is_deterministic(rng):
    p = random_split_problem(rng, n=14)
    if solve_exact(p).feasible:
        a, b = solve_heuristic(p, seed=3), solve_heuristic(p, seed=3)
        assert np.array_equal(a.selection, b.selection)


def test_heuristic_infeasible_raises():
    p = SplitProblem([[1], [1], [0]], [[0], [0], [0]], [], 1, [2])
    with pytest.raises(InfeasibleStart):
        solve_heuristic(p, repair_attempts=50)


def test_validation():
    with pytest.raises(ValueError):
        SplitProblem([[1]], [[1], [1]], [], 1, None)
    with pytest.raises(ValueError):
        SplitProblem([[1]], [[1]], [], 2, None)
    with pytest.raises(ValueError):
        SplitProblem([[-1]], [[1]], [], 1, None)
    with pytest.raises(ValueError):
        objective(SplitProblem([[1]], [[1]], [], 1, None), [2])


def test_json_round_trip(tmp_path, rng):
    p = random_split_problem(rng, n=6)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(problem_to_dict(p)))
    q = load_problem(path)
    assert np.array_equal(q.interactions, p.interactions) and q.n_test == p.n_test
    assert problem_from_dict(problem_to_dict(q)).gamma == p.gamma
