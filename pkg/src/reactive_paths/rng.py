"""Seeded substreams and order-independent chunked execution.

Every Monte Carlo job is cut into chunks of fixed size; chunk ``k`` draws
from its own generator keyed by ``(seed, *key, k)``.  Results are gathered
by chunk index, so the output depends only on the seed and the chunk
layout, never on the number of workers or on completion order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

DEFAULT_CHUNK = 2048


def make_rng(seed: int, stream_id=0) -> np.random.Generator:
    """PCG64 generator for substream ``stream_id`` (an int or a tuple of ints)."""
    if isinstance(stream_id, (int, np.integer)):
        key = (int(stream_id),)
    else:
        key = tuple(int(k) for k in stream_id)
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def chunk_sizes(n: int, chunk: int = DEFAULT_CHUNK) -> list[int]:
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn: Callable[[np.random.Generator, int, int], T], seed: int, sizes: Sequence[int],
               key: Sequence[int] = (), workers: int = 1, first_index: int = 0) -> list[T]:
    """Run ``fn(rng, size, index)`` for each chunk and return results in chunk order."""
    jobs = [(make_rng(seed, (*key, first_index + i)), size, first_index + i)
            for i, size in enumerate(sizes)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *job) for job in jobs]
        return [f.result() for f in futures]


def collect_until(fn: Callable[[np.random.Generator, int, int], T], seed: int, chunk: int,
                  enough: Callable[[list[T]], bool], key: Sequence[int] = (), workers: int = 1,
                  max_chunks: int = 10_000) -> list[T]:
    """Run chunks in waves until ``enough(results)`` holds; returns results in chunk order.

    Waves may overshoot, but callers truncate by chunk index so the answer
    is the same for every worker count.
    """
    results: list[T] = []
    wave = max(1, workers)
    while not enough(results):
        if len(results) >= max_chunks:
            break
        n_new = min(wave, max_chunks - len(results))
        results.extend(map_chunks(fn, seed, [chunk] * n_new, key, workers, first_index=len(results)))
    return results
