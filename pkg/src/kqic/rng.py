"""Deterministic random-stream derivation.

Every stochastic routine in the package takes a 64-bit seed plus an integer
path and builds its generator with ``SeedSequence(seed, spawn_key=path)``.
Streams with distinct paths are statistically independent, so bootstrap
replicates, permutation draws and benchmark trials can be evaluated in any
order (or in parallel) while reproducing the serial results bit for bit.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the sub-stream identified by ``path`` under ``seed``."""
    key = tuple(int(p) for p in path)
    if any(p < 0 for p in key):
        raise ValueError("stream path components must be non-negative")
    return np.random.default_rng(
        np.random.SeedSequence(int(seed) & _MASK64, spawn_key=key)
    )
