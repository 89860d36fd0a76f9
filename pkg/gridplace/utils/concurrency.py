"""
Parallel map for independent per-fault work.
"""

import logging
from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, List, Optional, TypeVar

from gridplace.config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_parallel(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply fn to every item on a thread pool; results keep the input order.

    Args:
        fn: Pure function of one item
        items: Work items
        threads: Pool size cap, GRIDPLACE_THREADS when omitted; 1 runs serially

    Returns:
        List of results in input order
    """
    work = list(items)
    workers = threads if threads else get_settings().worker_count
    workers = max(1, min(workers, len(work)))
    if workers == 1:
        return [fn(item) for item in work]

    logger.debug(f"Mapping {len(work)} items over {workers} threads")
    with ThreadPool(processes=workers) as pool:
        return pool.map(fn, work)
