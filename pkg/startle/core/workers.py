"""
Clip-level worker pool.
"""
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar


T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """
    Apply ``fn`` to every item, in parallel when ``jobs > 1``.

    Results are returned in input order regardless of scheduling. ``fn``
    must be a module-level callable so it can be pickled.

    Args:
        fn: Work function
        items: Inputs
        jobs: Worker process count

    Returns:
        List[R]: One result per input, same order
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fn, items))
