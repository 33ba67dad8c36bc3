"""Reproducible randomness and a deterministic job pool.

Contract: a 64-bit master seed plus an integer run index determine a stream;
distinct indices give independent streams and the same (seed, index) pair
reproduces bit-exactly, regardless of worker count. numpy-level sampling
uses counter-based Philox generators; the event-loop kernels receive derived
32-bit seeds and reseed their own generator per job, so scheduling order
cannot leak into results.
"""

from __future__ import annotations

import concurrent.futures

import numpy as np


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for stream (seed, *key)."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def kernel_seed(seed: int, *key: int) -> int:
    """Derived 32-bit seed for a numba kernel job."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def run_jobs(fn, args_list, workers: int = 1):
    """Evaluate fn(*args) for each args tuple; results in submission order.

    Each job must carry its own seed; with that discipline the output is
    identical for any worker count.
    """
    if workers <= 1 or len(args_list) <= 1:
        return [fn(*args) for args in args_list]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args) for args in args_list]
        return [f.result() for f in futures]


DEFAULT_CHUNKS = 32


def split_counts(total: int, n_chunks: int = DEFAULT_CHUNKS):
    """Split a sample budget into near-equal deterministic chunks.

    The chunk count must never depend on the worker count, or reruns with a
    different pool size would consume different seed streams.
    """
    n_chunks = max(1, min(n_chunks, total))
    base = total // n_chunks
    rem = total % n_chunks
    return [base + (1 if i < rem else 0) for i in range(n_chunks)]
