"""
Ordered parallel map.

Independent work items (matrix row blocks, shells, sweep points) run on a thread
pool; results always come back in input order so reports do not depend on
completion order.
"""

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """
    Apply func to every item, optionally on a thread pool.

    Args:
        func: Function of one item
        items: Work items
        jobs: Number of worker threads (<= 1 runs serially)

    Returns:
        Results in the order of items
    """
    work = list(items)
    if jobs <= 1 or len(work) <= 1:
        return [func(item) for item in work]

    workers = min(jobs, len(work))
    logger.debug(f"Running {len(work)} work items on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, work))
