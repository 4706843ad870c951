import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar

import numpy as np

from utils.seeding import rng_for

logger = logging.getLogger(__name__)

T = TypeVar("T")


def run_indexed(fn: Callable[[int, np.random.Generator], T], count: int, phase: str,
                master_seed: int, workers: int = 1) -> List[T]:
    """
    Call fn(index, rng) for index in range(count) and return the results in index order.

    Each index draws from its own generator seeded by split_seed(master_seed, phase, index),
    so results do not depend on the worker count or on scheduling.
    """
    if count <= 0:
        return []

    def call(index):
        return fn(index, rng_for(master_seed, phase, index))

    if workers <= 1 or count == 1:
        return [call(index) for index in range(count)]
    logger.debug("Running %d %s tasks on %d workers", count, phase, workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(call, range(count)))
