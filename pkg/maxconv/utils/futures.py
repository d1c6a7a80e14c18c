"""Tools for evaluating independent work items in parallel"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from maxconv.config import get_thread_count

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], max_workers: Optional[int] = None) -> List[R]:
    """Apply a function to each item using a pool of threads

    Results come back in the order of ``items`` regardless of completion order,
    and the first exception raised by a worker propagates to the caller.

    Args:
        func: Pure function to evaluate
        items: Work items
        max_workers: Worker cap. Defaults to :func:`maxconv.config.get_thread_count`
    Returns:
        ([R]) One result per item, in input order
    """
    items = list(items)
    if max_workers is None:
        max_workers = get_thread_count()
    workers = max(1, min(max_workers, len(items)))

    # No need for a pool when there is a single worker
    if workers == 1:
        return [func(item) for item in items]

    logger.debug(f'Evaluating {len(items)} items on {workers} threads')
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def chunked(values: List[T], chunks: int) -> List[List[T]]:
    """Split a list into at most ``chunks`` contiguous pieces of near-equal length"""
    chunks = max(1, min(chunks, len(values)))
    size, extra = divmod(len(values), chunks)
    output, start = [], 0
    for i in range(chunks):
        stop = start + size + (1 if i < extra else 0)
        output.append(values[start:stop])
        start = stop
    return output
