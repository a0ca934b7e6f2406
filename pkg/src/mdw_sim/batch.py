"""
This module runs batches of independent simulations (refinement levels, field paths, presets).
With aiostream installed the jobs run concurrently in worker threads; numpy releases the GIL in the array kernels.
A failing job does not stop the batch: every job ends as a PositiveResult or a NegativeResult.
"""

import asyncio
import logging
from typing import Any, AsyncIterable, AsyncIterator, Callable, Sequence, TypeVar

from ._extra import IS_AIOSTREAM_INSTALLED
from .guard import Guard
from .hooks import error_hook
from .result import ResultType

_J = TypeVar("_J")
_R = TypeVar("_R")

_logger = logging.getLogger(__name__)

if IS_AIOSTREAM_INSTALLED:
    import aiostream
    from aiostream.stream.combine import T, U

    @aiostream.pipable_operator
    def secured_map(
        source: AsyncIterable[T],
        func: Callable[[T], U],
        *,
        ordered: bool = True,
        task_limit: int | None = None,
        on_error: Callable[..., Any] | None = None,
    ) -> AsyncIterator[ResultType[U]]:
        """
        Like aiostream's stream.map for blocking functions: every item is processed in a worker thread and becomes
        a PositiveResult or a NegativeResult. Errors are handed to on_error(error, item) and do not end the stream.
        """

        async def secured(item: T) -> ResultType[U]:
            guard: Guard[U] = Guard(on_error=error_hook(on_error, func) if on_error is not None else None)
            result = await guard.secure_await(asyncio.to_thread(func, item))
            guard.handle_result(result, item)
            return result

        return aiostream.stream.map.raw(source, secured, ordered=ordered, task_limit=task_limit)

else:
    from ._extra import _NotInstalled

    secured_map = _NotInstalled()  # type: ignore[assignment]


async def run_batch(
    jobs: Sequence[_J],
    func: Callable[[_J], _R],
    threads: int = 1,
    logger: logging.Logger = _logger,
) -> list[ResultType[_R]]:
    """
    Applies `func` to every job and returns the results in job order. With threads > 1 and aiostream installed up to
    `threads` jobs run at the same time, otherwise one after another.
    """

    def log_error(error: BaseException, job: _J) -> None:
        logger.error("Job %r failed: %s", job, error)

    if threads > 1 and IS_AIOSTREAM_INSTALLED:
        logger.debug("Running %d jobs on %d threads", len(jobs), threads)
        pipeline = aiostream.stream.iterate(jobs) | secured_map.pipe(func, task_limit=threads, on_error=log_error)
        return await aiostream.stream.list(pipeline)
    if threads > 1:
        logger.warning("aiostream is not installed, running %d jobs sequentially", len(jobs))
    results: list[ResultType[_R]] = []
    for job in jobs:
        guard: Guard[_R] = Guard(on_error=error_hook(log_error, func))
        result = guard.secure_call(func, job)
        guard.handle_result(result, job)
        results.append(result)
    return results


def run_batch_sync(
    jobs: Sequence[_J], func: Callable[[_J], _R], threads: int = 1, logger: logging.Logger = _logger
) -> list[ResultType[_R]]:
    """
    run_batch for callers without an event loop
    """
    return asyncio.run(run_batch(jobs, func, threads, logger))
