"""Index-ordered parallel map over picklable work items.

Results always come back in submission order, so downstream reductions are
independent of worker count and scheduling.  workers <= 1 runs inline, which
keeps tracebacks simple and avoids fork overhead for small jobs.
"""

import concurrent.futures as _futures
import os


def default_workers() -> int:
    return os.cpu_count() or 1


def pmap(fn, argtuples, workers: int = 1) -> list:
    """Apply fn(*args) to every tuple in argtuples, preserving order.

    fn must be a module-level function when workers > 1 (process pool).
    """
    items = list(argtuples)
    if workers <= 1 or len(items) <= 1:
        return [fn(*args) for args in items]
    with _futures.ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        futs = [ex.submit(fn, *args) for args in items]
        return [f.result() for f in futs]
