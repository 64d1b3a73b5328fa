from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import brute_force_cost
from sthoi.assignment import assignment, assignment_cost


def test_matches_brute_force_on_random_matrices(rng):
    for _ in range(200):
        n, m = (int(v) for v in rng.integers(1, 8, 2))
        c = rng.integers(-20, 20, (n, m)).astype(float)
        pairs = assignment(c)
        assert len(pairs) == min(n, m)
        assert len({i for i, _ in pairs}) == len(pairs) == len({j for _, j in pairs})
        assert assignment_cost(c, pairs) == brute_force_cost(c)


def test_float_costs_match_brute_force(rng):
    for _ in range(50):
        n, m = (int(v) for v in rng.integers(1, 7, 2))
        c = rng.normal(size=(n, m))
        assert assignment_cost(c, assignment(c)) == pytest.approx(brute_force_cost(c), abs=1e-12)


def test_ties_break_lexicographically():
    c = np.zeros((3, 3))
    assert assignment(c) == [(0, 0), (1, 1), (2, 2)]


def test_empty_matrix():
    assert assignment(np.zeros((0, 3))) == []
    assert assignment(np.zeros((2, 0))) == []


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        assignment(np.array([[1.0, math.inf]]))
    with pytest.raises(ValueError):
        assignment(np.array([[math.nan]]))


@settings(max_examples=60, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=st.integers(-9, 9)))
def test_property_optimal(c):
    assert assignment_cost(c, assignment(c)) == brute_force_cost(c)
