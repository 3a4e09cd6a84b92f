"""Deterministic seed derivation for parallel trials.

Per-trial seeds are derived from (base_seed, parts...) with splitmix64, so a
grid of trials is reproducible regardless of scheduling or worker count, and
does not depend on numpy's SeedSequence internals.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def split_seed(base_seed: int, *parts: int) -> int:
    """64-bit mix of a base seed and integer coordinates (n, trial index, ...)."""
    x = _splitmix64(base_seed & _MASK)
    for p in parts:
        x = _splitmix64(x ^ ((p & _MASK) * _GOLDEN & _MASK))
    return x


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & _MASK))
