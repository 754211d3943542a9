import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

from starfan.infra.config import get_settings

T = TypeVar("T")
R = TypeVar("R")

LN2 = math.log(2.0)


def log1mexp(z: np.ndarray) -> np.ndarray:
    """
    Computes log(1 - exp(-z)) for z >= 0 without cancellation.
    Uses log(-expm1(-z)) below ln 2 and log1p(-exp(-z)) above.
    """
    z = np.asarray(z, dtype=float)
    flat = np.atleast_1d(z).ravel()
    out = np.empty_like(flat)
    small = flat < LN2
    with np.errstate(divide="ignore"):
        out[small] = np.log(-np.expm1(-flat[small]))
        out[~small] = np.log1p(-np.exp(-flat[~small]))
    return out.reshape(z.shape)


def pairwise_sum(values: np.ndarray) -> float:
    """
    Sums with numpy's pairwise reduction so the result does not depend on
    how the terms were produced.
    """
    return float(np.add.reduce(np.ascontiguousarray(values, dtype=float), axis=None))


def thread_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Maps fn over items on a thread pool capped by STARFAN_THREADS.
    Results come back in input order.
    """
    items = list(items)
    workers = threads or get_settings().threads
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
