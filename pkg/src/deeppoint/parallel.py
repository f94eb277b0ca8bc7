"""Ordered fan-out of independent per-sample work."""

from __future__ import annotations

import asyncio
from collections.abc import Callable, Sequence
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")


async def _gather(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    gate = asyncio.Semaphore(workers)

    async def run_one(item: T) -> R:
        async with gate:
            return await asyncio.to_thread(fn, item)

    return list(await asyncio.gather(*(run_one(item) for item in items)))


def gather_ordered(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """Apply ``fn`` to every item; results come back in input order.

    ``workers == 1`` runs in the calling thread. The first exception raised by
    ``fn`` propagates.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return asyncio.run(_gather(fn, items, workers))
