"""Deterministic seed derivation.

Independent streams are keyed by integer paths under a root seed, so
concurrent replications can draw from disjoint generators without any
shared state.
"""

from __future__ import annotations

import numpy as np


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by ``path`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(ss)
