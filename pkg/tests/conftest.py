"""Shared test helpers."""

from __future__ import annotations

import math

import numpy as np

from scaleplan.metrics import PredictionRecord

SCALE_BITS = 20
SCALE = 1 << SCALE_BITS


def dyadic_probs(rng: np.random.Generator, k: int) -> np.ndarray:
    """Random probability vector of dyadic rationals whose float sum is exactly 1.

    Every entry is a multiple of 2**-20, so fsum is exact and renormalization
    on load divides by exactly 1.0 (identity) — the basis for byte-identical
    dump round trips.
    """
    cuts = np.sort(rng.integers(0, SCALE + 1, size=k - 1))
    parts = np.diff(np.concatenate(([0], cuts, [SCALE])))
    probs = parts.astype(np.float64) / SCALE
    assert math.fsum(probs.tolist()) == 1.0
    return probs


def random_records(
    rng: np.random.Generator,
    n: int,
    num_classes: int,
    *,
    resolutions: tuple[tuple[int, int], ...] = ((224, 224),),
    embed_dim: int | None = None,
    epochs: int | None = None,
) -> list[PredictionRecord]:
    records = []
    for i in range(n):
        h, w = resolutions[int(rng.integers(0, len(resolutions)))]
        records.append(
            PredictionRecord(
                image_id=f"img{i:05d}",
                label=int(rng.integers(0, num_classes)),
                probs=dyadic_probs(rng, num_classes),
                eval_height=h,
                eval_width=w,
                embedding=(
                    np.round(rng.normal(size=embed_dim), 6) if embed_dim is not None else None
                ),
                epoch=int(rng.integers(0, epochs)) if epochs is not None else None,
            )
        )
    return records
