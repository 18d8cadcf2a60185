"""Deterministic work partitioning.

Heavy scans (ball expansion, membership filtering, fiber counting) may be
split across worker processes. Work is cut into contiguous chunks and the
chunk results are consumed in chunk order, so concatenating them reproduces
the sequential order exactly; downstream code only ever merges chunk output
by order-insensitive set/sum/max operations or re-sorts. Either way the
worker count can never change a result, which is what the determinism
guarantee of the CLI rests on.
"""

from __future__ import annotations

import multiprocessing
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def partition(items: Sequence[T], parts: int) -> list[Sequence[T]]:
    """At most `parts` contiguous, order-preserving chunks."""
    n = len(items)
    parts = max(1, min(parts, n))
    bounds = [n * i // parts for i in range(parts + 1)]
    return [items[bounds[i] : bounds[i + 1]] for i in range(parts) if bounds[i] < bounds[i + 1]]


def parallel_map(worker: Callable[[T], R], args: Sequence[T], workers: int) -> list[R]:
    """Map a top-level function over args, forking when workers > 1."""
    if workers <= 1 or len(args) <= 1:
        return [worker(a) for a in args]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(min(workers, len(args))) as pool:
        return pool.map(worker, args)
