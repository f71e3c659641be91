"""Counter-based random streams for reproducible planning.

Every run config owns a 64-bit seed. Each (epoch, purpose[, rank]) tuple keys
an independent Philox stream via ``SeedSequence`` spawn keys, so plans can be
regenerated for any single epoch or rank without replaying the whole run, and
adding ranks never perturbs existing streams.

Stream purposes:

* ``STREAM_PERMUTE`` — the full-dataset permutation of one epoch
* ``STREAM_SHAPES`` — synchronized per-step resolution draws of one epoch
* ``STREAM_RANK_SHAPES`` — a rank's independent resolution draws (keyed by rank)
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "STREAM_PERMUTE",
    "STREAM_SHAPES",
    "STREAM_RANK_SHAPES",
    "stream",
]

STREAM_PERMUTE = 0
STREAM_SHAPES = 1
STREAM_RANK_SHAPES = 2

_MASK64 = (1 << 64) - 1


def stream(seed: int, epoch: int, purpose: int, rank: int | None = None) -> np.random.Generator:
    """Independent generator for one (seed, epoch, purpose[, rank]) key."""
    key = (epoch, purpose) if rank is None else (epoch, purpose, rank)
    ss = np.random.SeedSequence(entropy=seed & _MASK64, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
