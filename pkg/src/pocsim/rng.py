"""Named, splittable RNG streams.

Every random quantity in pocsim is drawn from a ``numpy.random.Generator``
derived from ``(seed, purpose, index)`` so replications and growth rules are
reproducible and independent of each other.
"""

import numpy as np

# purpose tags used as the first element of the spawn key
EVENTS = 0
STRUCTURE = 1
SCENARIO = 2
BOOTSTRAP = 3

_MASK64 = (1 << 64) - 1


def stream(seed: int, purpose: int, *index: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, purpose, *index)``."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=(purpose, *index))
    return np.random.Generator(np.random.PCG64(ss))


def replication_stream(seed: int, replication: int) -> np.random.Generator:
    return stream(seed, EVENTS, replication)
