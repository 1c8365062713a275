"""
Tests for deterministic fan-out and reductions.
"""

import math

import numpy as np

from src.parallel import deterministic_min, map_ordered, tree_sum


def test_map_ordered_keeps_input_order():
    items = list(range(50))
    assert map_ordered(lambda x: x * x, items, threads=1) == map_ordered(lambda x: x * x, items, threads=4)


def test_tree_sum_is_independent_of_threads_and_chunking(rng):
    values = rng.standard_normal(1000) * 10.0 ** rng.integers(-8, 8, 1000)
    first = tree_sum(values)
    assert tree_sum(values.copy()) == first
    assert math.isclose(first, math.fsum(values), rel_tol=1e-12, abs_tol=1e-3)
    assert tree_sum(np.array([], dtype=complex)) == 0


def test_deterministic_min_breaks_ties_on_key():
    candidates = [(1.0, (2,), "b"), (0.5, (3,), "c"), (0.5, (1,), "a"), (math.nan, (0,), "nan")]
    assert deterministic_min(candidates) == (0.5, (1,), "a")
    assert deterministic_min(reversed(candidates)) == (0.5, (1,), "a")
    assert deterministic_min([(math.nan, (0,), None)]) is None
