"""
Deterministic fan-out and reduction helpers.
Results never depend on the worker count: work items are mapped in input order and
every reduction follows a fixed tree or a fixed (value, key) ordering.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

# Leaves of the reduction tree are reduced in one call
TREE_LEAF = 32


def map_ordered(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Apply fn to every item, in parallel when threads > 1, returning results in input order"""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def tree_sum(values: Sequence) -> Any:
    """
    Sum a 1-D array in a fixed pairwise tree order.

    The split points depend only on the length, so chunks may be computed
    anywhere and the result is bit-identical.
    """
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError("tree_sum expects a 1-D array")
    if arr.size == 0:
        return arr.dtype.type(0)
    if arr.size <= TREE_LEAF:
        return np.add.reduce(arr)
    mid = arr.size // 2
    return tree_sum(arr[:mid]) + tree_sum(arr[mid:])


def deterministic_min(candidates: Iterable[Tuple[float, Tuple, Any]]) -> Optional[Tuple[float, Tuple, Any]]:
    """
    Reduce (value, key, payload) candidates to the smallest by (value, key).

    NaN values never win.
    """
    best = None
    for value, key, payload in candidates:
        if value != value:
            continue
        if best is None or (value, key) < (best[0], best[1]):
            best = (value, key, payload)
    return best
