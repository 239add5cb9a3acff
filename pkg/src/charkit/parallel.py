"""Process-based map capped by CHARKIT_THREADS."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, Sequence


def thread_count() -> int:
    """Worker cap from CHARKIT_THREADS, else the CPU count."""
    v = os.environ.get("CHARKIT_THREADS")
    if v:
        try:
            n = int(v)
        except ValueError:
            raise ValueError("CHARKIT_THREADS must be a positive integer") from None
        if n < 1:
            raise ValueError("CHARKIT_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


def pmap(fn: Callable, items: Sequence, workers: Optional[int] = None) -> list:
    """[fn(x) for x in items], spread over processes; fn must be picklable.

    Results keep the order of items.
    """
    items = list(items)
    n = min(workers or thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
