"""Ordered thread-pool map, capped by ``FLOQUET_LRR_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "FLOQUET_LRR_THREADS"


def thread_cap() -> int:
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn, items, chunks: int | None = None):
    """``list(map(fn, items))`` evaluated on up to ``thread_cap()`` threads.

    Results always come back in input order, so reductions downstream are
    independent of the thread count.
    """
    items = list(items)
    workers = thread_cap()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunked(array, n_chunks: int):
    n = len(array)
    if n == 0:
        return []
    step = max(1, -(-n // max(1, n_chunks)))
    return [array[i:i + step] for i in range(0, n, step)]
