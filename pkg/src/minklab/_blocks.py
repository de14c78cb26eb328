"""Fixed block layout for seeded ensembles.

The layout (block sizes and one spawned SeedSequence per block) depends
only on (seed, count, block_size), never on the worker count, and results
are returned in block order.  That makes every reduction reproducible for
any ``jobs``.
"""

from concurrent.futures import ProcessPoolExecutor

import numpy as np

BLOCK_SIZE = 20000


def block_layout(count: int, block_size: int = BLOCK_SIZE):
    if count < 1:
        raise ValueError("count must be >= 1")
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    full, rest = divmod(count, block_size)
    return [block_size] * full + ([rest] if rest else [])


def run_blocks(fn, seed: int, count: int, block_size: int = BLOCK_SIZE, jobs: int = 1, args=()):
    """Call fn(seed_seq, size, *args) for every block; results in block order."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    sizes = block_layout(count, block_size)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = [(ss, n) + tuple(args) for ss, n in zip(seqs, sizes)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_call, [fn] * len(tasks), tasks))
    return [fn(*t) for t in tasks]


def _call(fn, task):
    return fn(*task)
