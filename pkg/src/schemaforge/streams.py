"""Seeded random substreams.

Every stochastic routine takes a ``numpy.random.Generator``.  Generators are
derived from one master seed plus integer keys (trial, generation, ...) through
``numpy.random.SeedSequence``, whose spawn-key hashing is the documented mixing
function.  Identical (seed, keys) always gives an identical stream, and streams
for different keys are statistically independent, so trials can run in any
order or in parallel.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Return the generator for ``seed`` and the key path ``keys``."""
    if seed < 0:
        raise ValueError("seed must be a non-negative 64-bit integer")
    ss = np.random.SeedSequence(seed & MASK64, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


# Fixed key prefixes so that different consumers never share a stream.
KEY_GENERATION = 0
KEY_MONTE_CARLO = 1
KEY_INIT = 2
KEY_INSTANCES = 3
KEY_EFFECTIVE = 4
