"""Regenerate data/calibrated_dump.jsonl, a well-calibrated prediction dump.

Confidences are dyadic rationals (multiples of 2**-20), so the dump re-reads
byte-identically after load-time renormalization. Correctness flags are dealt
per confidence bin so empirical accuracy tracks mean confidence closely and
the expected calibration error of the file stays well under 0.01.
"""

from __future__ import annotations

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from scaleplan.io import write_dump
from scaleplan.metrics import PredictionRecord

SCALE = 1 << 20
NUM_RECORDS = 2000
NUM_CLASSES = 10
NUM_BINS = 15
EMBED_DIM = 8
RESOLUTIONS = (160, 224, 288)


def dyadic_confidences(rng: np.random.Generator, n: int) -> np.ndarray:
    """Confidences in (0.5, 1.0), exact multiples of 2**-20 (strict argmax)."""
    ticks = rng.integers(SCALE // 2 + 1, SCALE, size=n)
    return ticks / SCALE


def spread_remainder(conf: float, k: int, rng: np.random.Generator) -> np.ndarray:
    """Split 1 - conf over k-1 wrong classes in dyadic ticks below conf."""
    rest_ticks = SCALE - round(conf * SCALE)
    cuts = np.sort(rng.integers(0, rest_ticks + 1, size=k - 2))
    parts = np.diff(np.concatenate(([0], cuts, [rest_ticks])))
    return parts / SCALE


def main() -> None:
    rng = np.random.default_rng(20260814)
    confs = dyadic_confidences(rng, NUM_RECORDS)

    # Assign hits per bin: round(sum of confidences) correct records per bin.
    edges = [i / NUM_BINS for i in range(NUM_BINS + 1)]
    order = np.argsort(confs)
    correct = np.zeros(NUM_RECORDS, dtype=bool)
    for b in range(NUM_BINS):
        lo, hi = edges[b], edges[b + 1]
        members = [i for i in order if (confs[i] <= hi if b == 0 else lo < confs[i] <= hi)]
        if not members:
            continue
        hits = round(float(np.sum(confs[members])))
        chosen = rng.permutation(members)[:hits]
        correct[chosen] = True

    records = []
    for i in range(NUM_RECORDS):
        conf = float(confs[i])
        label = int(rng.integers(NUM_CLASSES))
        probs = np.empty(NUM_CLASSES)
        wrong = [c for c in range(NUM_CLASSES) if c != label]
        pred = label if correct[i] else int(rng.choice(wrong))
        others = spread_remainder(conf, NUM_CLASSES, rng)
        slots = [c for c in range(NUM_CLASSES) if c != pred]
        probs[pred] = conf
        probs[slots] = others
        side = int(rng.choice(RESOLUTIONS))
        records.append(
            PredictionRecord(
                image_id=f"val{i:05d}",
                label=label,
                probs=probs,
                eval_height=side,
                eval_width=side,
                embedding=np.round(rng.normal(size=EMBED_DIM), 6),
                epoch=0,
            )
        )

    out = os.path.join(os.path.dirname(__file__), os.pardir, "data", "calibrated_dump.jsonl")
    write_dump(records, out, num_classes=NUM_CLASSES, embed_dim=EMBED_DIM)
    print(f"wrote {len(records)} records to {os.path.normpath(out)}")


if __name__ == "__main__":
    main()
