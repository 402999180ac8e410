"""Process-pool helper that keeps results in submission order."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def run_in_order(worker, items, jobs: int = 1) -> list:
    """Apply ``worker`` to each item, optionally across processes.

    Results come back in item order regardless of ``jobs``, so callers that
    merge by concatenation produce identical output with any worker count.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(worker, items))
