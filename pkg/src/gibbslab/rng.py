"""Counter-based, splittable random streams.

Every Monte Carlo draw in the package is a pure function of (seed, stream):
stream k of seed s is the Philox generator keyed by SeedSequence(s, spawn_key=(k,)).
Workers can consume disjoint streams concurrently and any reduction done in
stream order reproduces the single-threaded result bit for bit.
"""
import numpy as np


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for the given (seed, stream) pair."""
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be nonnegative integers")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))
