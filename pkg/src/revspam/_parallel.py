"""Order-preserving map over worker processes."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], workers: int = 1,
                 prefetch: int = 2) -> Iterator[R]:
    """Yield ``func(item)`` for each item, in input order.

    With ``workers <= 1`` everything runs inline. Otherwise at most
    ``workers * prefetch`` items are in flight, which bounds memory when
    ``items`` is a lazy stream of chunks.
    """
    if workers <= 1:
        for item in items:
            yield func(item)
        return
    window = max(1, workers * prefetch)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = []
        for item in items:
            pending.append(pool.submit(func, item))
            if len(pending) >= window:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()
