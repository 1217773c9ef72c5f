"""Deterministic block-parallel sampling.

Samples are cut into fixed-size blocks; block b draws from a Philox stream
keyed by (seed, b). Workers only decide who computes which block, and block
results are combined in block order, so output is identical for any worker
count.
"""

from concurrent.futures import ThreadPoolExecutor
import math

import numpy as np

BLOCK = 1 << 14


def block_rng(seed, index, stream=0):
    key = np.random.SeedSequence(seed, spawn_key=(stream, index))
    return np.random.Generator(np.random.Philox(key))


def block_sizes(samples, block=BLOCK):
    return [min(block, samples - lo) for lo in range(0, samples, block)]


def map_blocks(fn, samples, seed, jobs=1, block=BLOCK, stream=0):
    """[fn(rng_b, size_b) for each block b], computed on ``jobs`` threads.

    ``stream`` separates independent uses of one seed within a run.
    """
    if seed is None:
        raise ValueError("a seed is required for sampled estimates")
    sizes = block_sizes(samples, block)
    tasks = [(block_rng(seed, b, stream), size) for b, size in enumerate(sizes)]
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(rng, size) for rng, size in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda task: fn(*task), tasks))


def moments(values):
    """(count, sum, sum of squares) of a real block, for later fsum merging."""
    values = np.asarray(values, dtype=float)
    return len(values), float(np.sum(values)), float(np.sum(values * values))


def merge_moments(parts):
    """Mean and standard error from per-block (count, sum, sumsq) triples."""
    count = sum(p[0] for p in parts)
    if count == 0:
        return math.nan, math.nan
    total = math.fsum(p[1] for p in parts)
    total_sq = math.fsum(p[2] for p in parts)
    mean = total / count
    if count < 2:
        return mean, math.inf
    var = max(total_sq / count - mean * mean, 0.0) * count / (count - 1)
    return mean, math.sqrt(var / count)
