import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def num_threads():
    value = os.environ.get("CM_LAB_THREADS")
    if value:
        return max(1, int(value))

    return os.cpu_count() or 1


def chunked(count, chunk_size):
    return [(start, min(start + chunk_size, count)) for start in range(0, count, chunk_size)]


def parallel_map(fn, items):
    """Apply fn to every item, results in submission order whatever the thread count."""
    items = list(items)
    workers = min(num_threads(), len(items))

    if workers <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def exact_sum(values):
    # Correctly rounded, so the result does not depend on chunking or ordering
    return math.fsum(np.asarray(values, dtype=np.float64).ravel().tolist())
