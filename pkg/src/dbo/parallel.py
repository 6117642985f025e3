"""Worker-count control and an order-preserving parallel map.

Work is always split into the same chunks regardless of the worker count and
results are combined in chunk order, so outputs do not depend on threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_workers: int | None = None


def set_workers(n: int | None) -> None:
    global _workers
    if n is not None and n < 1:
        raise ValueError("worker count must be >= 1")
    _workers = n


def get_workers() -> int:
    if _workers is not None:
        return _workers
    env = os.environ.get("DBO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    items = list(items)
    n = min(get_workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def pairwise_sum(parts: list):
    """Sum a list of arrays with a fixed balanced tree."""
    if not parts:
        raise ValueError("nothing to sum")
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]
