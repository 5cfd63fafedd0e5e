"""Counter-based random streams with explicit derivation keys.

Every stochastic component draws from a Philox generator keyed by
(seed, key path). Streams are independent across distinct key paths and
bit-reproducible regardless of execution order or thread count, which is
what makes simulation replications and Monte Carlo chunks safe to run in
parallel.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox, SeedSequence


def stream(seed: int, *key: int) -> Generator:
    """Independent generator for the given (seed, key...) path."""
    ss = SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return Generator(Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Derive a new 64-bit seed from (seed, key...), for nested components."""
    ss = SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
