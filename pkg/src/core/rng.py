"""Counter-based random streams keyed by (seed, index).

Every consumer that needs randomness derives its own stream from a seed and
an integer key, so results never depend on scheduling or worker count.
"""

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the substream ``key`` of ``seed``."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic 63-bit child seed, for APIs that take an integer seed."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
