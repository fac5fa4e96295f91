"""Row-band threading for the pixel-parallel heavy loops.

The LDES_THREADS environment variable caps the worker count (default 1,
i.e. sequential). Bands write disjoint output rows, so results are
bit-identical for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable


def thread_count() -> int:
    value = os.environ.get("LDES_THREADS", "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def run_bands(height: int, worker: Callable[[int, int], None], threads: int | None = None) -> None:
    """Invoke ``worker(y0, y1)`` over row bands covering [0, height)."""
    n = thread_count() if threads is None else max(1, threads)
    n = min(n, height)
    if n == 1:
        worker(0, height)
        return
    edges = [round(i * height / n) for i in range(n + 1)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        futures = [
            pool.submit(worker, edges[i], edges[i + 1])
            for i in range(n)
            if edges[i] < edges[i + 1]
        ]
        for fut in futures:
            fut.result()
