"""Order-preserving parallel map shared by the pairwise and sampling loops."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def resolve_threads(threads) -> int:
    if threads in (None, "auto"):
        return os.cpu_count() or 1
    n = int(threads)
    if n < 1:
        raise ValueError("threads must be >= 1 or 'auto'")
    return n


def pmap(fn, items, threads=1) -> list:
    """``[fn(x) for x in items]``, evaluated on up to ``threads`` threads.

    Output order always follows input order, so reductions over the result are
    independent of scheduling.
    """
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
