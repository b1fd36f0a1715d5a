import asyncio
from concurrent.futures import ProcessPoolExecutor
import logging
from typing import Callable, List, Sequence, TypeVar

T = TypeVar('T')
R = TypeVar('R')


def map_ordered(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """
    Applies fn to every item and returns the results in item order. With more
    than one worker the calls run in separate processes; fn and the items
    must then be picklable.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return asyncio.run(_gather(fn, items, min(workers, len(items))))


async def _gather(fn: Callable[[T], R], items: List[T], workers: int) -> List[R]:
    loop = asyncio.get_running_loop()
    logging.debug(f'Dispatching {len(items)} tasks to {workers} workers')
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [loop.run_in_executor(pool, fn, item) for item in items]
        # gather keeps submission order regardless of completion order
        return await asyncio.gather(*futures)
