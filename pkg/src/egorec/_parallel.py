"""Order-preserving process-pool map.

Results come back in task order whatever the worker count, so reductions done
by the caller are bit-identical between serial and parallel runs.
"""
from __future__ import annotations

import multiprocessing as mp
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_shared: Any = None


def _install(shared: Any) -> None:
    global _shared
    _shared = shared


def _run_chunk(fn: Callable[[Any, Any], Any], chunk: Sequence[Any]) -> list[Any]:
    return [fn(_shared, task) for task in chunk]


def pmap(fn: Callable[[Any, T], R], shared: Any, tasks: Sequence[T], workers: int = 1) -> list[R]:
    """``[fn(shared, t) for t in tasks]``, optionally across processes.

    ``fn`` must be a module-level function; ``shared`` is shipped once per
    worker rather than once per task.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(shared, t) for t in tasks]
    n_chunks = min(len(tasks), workers * 4)
    bounds = [len(tasks) * c // n_chunks for c in range(n_chunks + 1)]
    chunks = [tasks[bounds[c] : bounds[c + 1]] for c in range(n_chunks)]
    methods = mp.get_all_start_methods()
    ctx = mp.get_context("fork" if "fork" in methods else "spawn")
    with ProcessPoolExecutor(workers, mp_context=ctx, initializer=_install, initargs=(shared,)) as ex:
        parts = list(ex.map(_run_chunk, [fn] * n_chunks, chunks))
    return [r for part in parts for r in part]
