"""Named random substreams.

Every consumer of randomness gets its own stream keyed by the experiment seed
and a tuple of integers, so results never depend on call order or on how work
is split between processes.
"""
import numpy as np


def seed_sequence(seed: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), *map(int, keys)])


def substream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed, *keys))
