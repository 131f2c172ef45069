"""Seed-stream derivation and an order-preserving thread map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, TypeVar

import numpy as np

T = TypeVar("T")

THREADS_ENV = "SUFFUP_THREADS"


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 generator for the work unit addressed by `key`.

    The stream depends only on ``(seed, key)``, never on which worker runs
    it or in what order.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def child_seed(seed: int, *key: int) -> int:
    """A 63-bit integer seed derived from ``(seed, key)``."""
    hi, lo = np.random.SeedSequence(seed, spawn_key=key).generate_state(2)
    return (int(hi) << 32 | int(lo)) & 0x7FFF_FFFF_FFFF_FFFF


def worker_count(workers: Optional[int] = None) -> int:
    if workers is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            workers = os.cpu_count() or 1
    return max(1, int(workers))


def ordered_map(fn: Callable[[int], T], n_items: int, workers: Optional[int] = None) -> list[T]:
    """``[fn(i) for i in range(n_items)]``, possibly spread over threads."""
    w = min(worker_count(workers), max(n_items, 1))
    if w == 1:
        return [fn(i) for i in range(n_items)]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, range(n_items), chunksize=1))

