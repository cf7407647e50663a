"""Order-preserving per-location parallelism capped by MMWCHAN_NUM_THREADS."""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "MMWCHAN_NUM_THREADS"


def num_threads():
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn, items, threads=None):
    """``list(map(fn, items))``, possibly spread over worker threads."""
    items = list(items)
    threads = num_threads() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
