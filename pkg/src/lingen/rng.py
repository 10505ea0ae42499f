"""Counter-based seed derivation.

Every random draw in a sweep is addressed by a 64-bit master seed plus a tuple
of integer counters (grid index, trial index, stream).  The same address always
yields the same Philox stream, regardless of which worker evaluates it or in
which order.
"""

from __future__ import annotations

import numpy as np

# stream identifiers inside one trial
STREAM_MODEL = 0
STREAM_DATA_A = 1
STREAM_DATA_B = 2
STREAM_LATENTS = 3
STREAM_PHASES_A = 4
STREAM_PHASES_B = 5

_MASK64 = (1 << 64) - 1


def seed_sequence(master_seed: int, *keys: int) -> np.random.SeedSequence:
    if master_seed < 0 or master_seed > _MASK64:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master_seed}")
    if any(k < 0 for k in keys):
        raise ValueError(f"counter keys must be non-negative, got {keys}")
    return np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(keys))


def generator(master_seed: int, *keys: int) -> np.random.Generator:
    """Philox generator addressed by ``(master_seed, *keys)``."""
    return np.random.Generator(np.random.Philox(seed_sequence(master_seed, *keys)))


def derived_seed(master_seed: int, *keys: int) -> int:
    """A 64-bit integer summarising the address; recorded in output tables."""
    return int(seed_sequence(master_seed, *keys).generate_state(1, dtype=np.uint64)[0])


def as_generator(seed) -> np.random.Generator:
    """Accept an int, a tuple of ints, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("a seed is required; wall-clock seeding is not supported")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(ss))
