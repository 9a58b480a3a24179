"""Deterministic chunked reduction.

Work is split into fixed-size chunks by item index; chunk partial sums are
combined in chunk order.  The reduction tree therefore does not depend on the
number of worker threads, so results are bit-identical for any ``threads``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

CHUNK_SIZE = 4096


def resolve_threads(threads: int | None) -> int:
    """Thread count from the argument, the SQZINT_THREADS env var, or the CPU count."""
    if threads is not None:
        if threads < 1:
            raise ValueError("threads must be >= 1")
        return threads
    env = os.environ.get("SQZINT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def chunked_sum(evaluate: Callable[[int, int], complex], n_items: int,
                threads: int = 1, chunk_size: int = CHUNK_SIZE) -> complex:
    """Sum ``evaluate(start, stop)`` over [0, n_items) in fixed chunks.

    ``evaluate`` must return the partial sum for the half-open index range it
    is given and must not share mutable state with other chunks.
    """
    if n_items <= 0:
        return 0j
    bounds = [(s, min(s + chunk_size, n_items)) for s in range(0, n_items, chunk_size)]
    if threads <= 1 or len(bounds) == 1:
        parts = [evaluate(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: evaluate(*ab), bounds))
    total = 0j
    for part in parts:
        total += part
    return total
