"""Independent, reproducible random streams for trajectory ensembles.

Trajectory ``i`` of an ensemble seeded with ``root_seed`` draws from the
stream keyed by ``(root_seed, i)``.  The key is mixed by
:class:`numpy.random.SeedSequence`, so streams do not depend on execution
order or on how trajectories are distributed over worker processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

MAX_SEED = 2**64 - 1


def check_seed(root_seed: int) -> int:
    if isinstance(root_seed, bool) or not isinstance(root_seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(root_seed).__name__}")
    if not 0 <= int(root_seed) <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {root_seed}")
    return int(root_seed)


def seed_sequence(root_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(check_seed(root_seed), spawn_key=tuple(int(k) for k in key))


def stream(root_seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream ``(root_seed, *key)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(root_seed, *key)))


def map_ordered(
    fn: Callable[..., T], args: Sequence[tuple] | Iterable[tuple], workers: int = 1
) -> list[T]:
    """``[fn(*a) for a in args]``, optionally spread over worker processes.

    Results come back in argument order.  ``fn`` must be picklable when
    ``workers > 1``.
    """
    args = list(args)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    chunk = max(1, len(args) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args), chunksize=chunk))
