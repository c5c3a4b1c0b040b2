"""Seedable, splittable random streams for parallel Monte Carlo runs.

Streams are built on the counter-based Philox generator keyed through
``SeedSequence(master_seed, spawn_key=path)``, so the stream for run ``r``
depends only on ``(master_seed, r)``.  Runs can therefore be generated in
any order, on any number of workers, and still produce identical numbers.
"""

import numpy as np

__all__ = ["substream"]


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Return an independent generator for the stream ``(master_seed, *path)``.

    Two calls with the same arguments yield generators producing identical
    sequences; distinct paths give statistically independent streams.
    """
    if master_seed < 0:
        raise ValueError("master_seed must be nonnegative")
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(seq))
