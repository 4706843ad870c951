"""
Seed splitting for reproducible parallel runs.

A child seed is derived from ``(master_seed, phase, index)`` as follows:

1. The three parts are encoded as ``"<master>:<phase>:<index>"`` (UTF-8).
2. The encoding is hashed with BLAKE2b using an 8-byte digest.
3. The digest is read as a little-endian unsigned 64-bit integer.
4. The integer is passed through the SplitMix64 finalizer.

Child seeds depend only on the triple. They never depend on scheduling
order or worker count.
"""
import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def split_seed(master_seed, phase, index=0):
    if master_seed < 0 or index < 0:
        raise ValueError("master_seed and index must be nonnegative")
    key = f"{int(master_seed)}:{phase}:{int(index)}".encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return _splitmix64(int.from_bytes(digest, "little"))


def rng_for(master_seed, phase, index=0):
    return np.random.default_rng(split_seed(master_seed, phase, index))
