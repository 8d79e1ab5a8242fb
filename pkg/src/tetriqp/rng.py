"""Counter-based random generators with order-independent derived seeds.

Every stochastic routine takes a seed that may be an int or a tuple of ints
(base seed, trial index, subsystem tag, ...). Tuples feed a SeedSequence, so
per-trial streams are identical no matter how trials are chunked across
workers.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, (int, np.integer)):
        bitgen = np.random.Philox(key=int(seed) & ((1 << 128) - 1))
    else:
        entropy = tuple(int(x) for x in seed)
        bitgen = np.random.Philox(seed=np.random.SeedSequence(entropy))
    return np.random.Generator(bitgen)
