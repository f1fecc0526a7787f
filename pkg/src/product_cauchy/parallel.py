"""Worker-pool helper honouring the PRODUCT_CAUCHY_THREADS cap."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "PRODUCT_CAUCHY_THREADS"


def worker_count() -> int:
    cpu = os.cpu_count() or 1
    raw = os.environ.get(ENV_VAR, "").strip()
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            cap = cpu
        return max(1, min(cap, cpu))
    return cpu


def map_ordered(fn, items):
    """map() over items, threaded when more than one worker is allowed.

    Results always come back in input order, so reductions downstream keep a
    fixed summation order.
    """
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
