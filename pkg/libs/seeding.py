"""
Reproducible random streams.

Streams are addressed by integer keys (master seed, cell, replicate, method,
...) hashed through numpy's SeedSequence, so any task can rebuild its stream
without coordination. Permutations use a counter-based Philox generator whose
counter carries the permutation index: permutation b of a batch is the same
whether it is drawn first, last, or on another worker.
"""

import numpy as np

from libs.errors import DomainError


def _check_key(words):
    words = [int(w) for w in words]
    if any(w < 0 for w in words):
        raise DomainError(f"stream keys must be non-negative integers, got {words}")
    return words


def get_rng(seed=None):
    """ Returns a Generator: passes Generators through, seeds PCG64 from an int."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def stream(*key):
    """ Generator for the task addressed by key, e.g. stream(master_seed, cell, replicate)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_check_key(key))))


def philox_key(*key):
    return np.random.SeedSequence(_check_key(key)).generate_state(2, dtype=np.uint64)


def permutation_generator(key, index):
    counter = np.array([0, 0, 0, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def sample_permutations(key, start, stop, n):
    """ Rows start..stop-1 of the permutation stream as 0-based index arrays; row b uses counter block b."""
    perms = np.empty((stop - start, n), dtype=np.int64)
    for row, b in enumerate(range(start, stop)):
        perms[row] = permutation_generator(key, b).permutation(n)
    return perms
