"""Calibration and robustness metrics over prediction dumps.

All metrics consume :class:`PredictionRecord` streams: one record per
(image, evaluation resolution) with a normalized probability vector and an
optional embedding. Folds are single-pass and order-independent — expected
calibration error uses exact (compensated) summation so shuffling a dump can
never change the reported value, even in the last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError

__all__ = [
    "PredictionRecord",
    "EntropyStats",
    "CalibrationBin",
    "CalibrationReport",
    "VarianceGrouping",
    "entropy",
    "entropy_stats",
    "skewness",
    "skewness_curve",
    "ece",
    "embedding_variance",
    "accuracy_by_resolution",
    "delta_cell",
    "delta_table",
]


@dataclass(eq=False, slots=True)
class PredictionRecord:
    """One model evaluation: class probabilities for one image at one resolution."""

    image_id: str
    label: int
    probs: np.ndarray
    eval_height: int
    eval_width: int
    embedding: np.ndarray | None = None
    epoch: int | None = None

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.eval_height, self.eval_width)


class ExactSum:
    """Exact streaming float accumulator (Shewchuk partials, as in math.fsum).

    The partials always sum to the true real-valued total, so ``value()`` is
    the correctly rounded sum regardless of insertion order.
    """

    __slots__ = ("_partials",)

    def __init__(self) -> None:
        self._partials: list[float] = []

    def add(self, x: float) -> None:
        ps = self._partials
        i = 0
        for y in ps:
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo:
                ps[i] = lo
                i += 1
            x = hi
        ps[i:] = [x]

    def value(self) -> float:
        return math.fsum(self._partials)


def entropy(probs: Sequence[float] | np.ndarray) -> float:
    """Shannon entropy in nats; zero-probability terms contribute zero."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise DataError("probs must be a non-empty vector", code="entropy.probs")
    if np.any(p < 0):
        raise DataError("probs must be non-negative", code="entropy.probs")
    nz = p[p > 0]
    if nz.size == 0:
        raise DataError("probs must contain a positive entry", code="entropy.probs")
    return -math.fsum(float(x) * math.log(float(x)) for x in nz)


def skewness(values: Sequence[float] | np.ndarray) -> float:
    """Population skewness: mean of cubed z-scores (1/N normalization)."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise DataError("values must be a non-empty vector", code="skewness.values")
    mu = float(np.mean(x))
    sigma = float(np.sqrt(np.mean((x - mu) ** 2)))
    if sigma == 0.0:
        raise DataError("skewness undefined for zero-variance values", code="skewness.zero_variance")
    return float(np.mean(((x - mu) / sigma) ** 3))


@dataclass(frozen=True)
class EntropyStats:
    entropies: tuple[float, ...]
    mean: float
    std: float
    skewness: float | None  # None when all entropies are identical


def entropy_stats(records: Iterable[PredictionRecord]) -> EntropyStats:
    ents = [entropy(r.probs) for r in records]
    if not ents:
        raise DataError("no records", code="entropy.empty")
    x = np.asarray(ents)
    mu = float(np.mean(x))
    sigma = float(np.sqrt(np.mean((x - mu) ** 2)))
    skew = None
    if sigma > 0.0:
        skew = float(np.mean(((x - mu) / sigma) ** 3))
    return EntropyStats(entropies=tuple(ents), mean=mu, std=sigma, skewness=skew)


def skewness_curve(
    dumps: Mapping[int, Iterable[PredictionRecord]] | Iterable[PredictionRecord],
) -> list[tuple[int, float | None]]:
    """Per-epoch skewness of the predictive-entropy distribution.

    Accepts either a mapping ``epoch -> records`` or a flat record stream
    whose records carry ``epoch`` tags. Zero-variance epochs yield ``None``
    (a gap in the curve) rather than an error.
    """
    groups: dict[int, list[PredictionRecord]] = {}
    if isinstance(dumps, Mapping):
        for epoch, records in dumps.items():
            groups[int(epoch)] = list(records)
    else:
        for rec in dumps:
            if rec.epoch is None:
                raise DataError(
                    f"record {rec.image_id!r} carries no epoch tag", code="dump.epoch"
                )
            groups.setdefault(rec.epoch, []).append(rec)
    if not groups:
        raise DataError("no records", code="dump.empty")
    curve: list[tuple[int, float | None]] = []
    for epoch in sorted(groups):
        records = groups[epoch]
        if not records:
            raise DataError(f"epoch {epoch} has no records", code="dump.epoch_empty")
        ents = [entropy(r.probs) for r in records]
        try:
            curve.append((epoch, skewness(ents)))
        except DataError:
            curve.append((epoch, None))
    return curve


@dataclass(frozen=True)
class CalibrationBin:
    lower: float
    upper: float  # bin covers (lower, upper]
    count: int
    accuracy: float
    mean_confidence: float


@dataclass(frozen=True)
class CalibrationReport:
    num_bins: int
    total: int
    ece: float
    bins: tuple[CalibrationBin, ...]


def _bin_index(confidence: float, edges: Sequence[float]) -> int:
    """Right-closed bin lookup: smallest k with confidence <= edges[k+1]."""
    lo, hi = 0, len(edges) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if edges[mid] >= confidence:
            hi = mid
        else:
            lo = mid + 1
    return max(0, lo - 1)


def ece(records: Iterable[PredictionRecord], num_bins: int = 15) -> CalibrationReport:
    """Expected calibration error over equal-width confidence bins on (0, 1].

    Confidence is the max class probability; the prediction is the lowest
    index attaining it. Single streaming pass; exact summation makes the
    result independent of record order.
    """
    if num_bins < 1:
        raise ConfigError(f"num_bins must be >= 1, got {num_bins}", code="ece.num_bins")
    edges = [i / num_bins for i in range(num_bins + 1)]
    counts = [0] * num_bins
    hits = [0] * num_bins
    conf_sums = [ExactSum() for _ in range(num_bins)]
    total = 0
    for rec in records:
        probs = rec.probs
        pred = int(np.argmax(probs))
        conf = float(probs[pred])
        k = _bin_index(conf, edges)
        counts[k] += 1
        hits[k] += int(pred == rec.label)
        conf_sums[k].add(conf)
        total += 1
    if total == 0:
        raise DataError("no records", code="ece.empty")
    bins: list[CalibrationBin] = []
    contributions: list[float] = []
    for k in range(num_bins):
        if counts[k]:
            acc = hits[k] / counts[k]
            mean_conf = conf_sums[k].value() / counts[k]
            contributions.append((counts[k] / total) * abs(acc - mean_conf))
        else:
            acc = mean_conf = 0.0
        bins.append(CalibrationBin(edges[k], edges[k + 1], counts[k], acc, mean_conf))
    return CalibrationReport(
        num_bins=num_bins, total=total, ece=math.fsum(contributions), bins=tuple(bins)
    )


class VarianceGrouping(str, Enum):
    PER_RESOLUTION = "per_resolution"  # variance across images, per resolution
    PER_IMAGE = "per_image"  # variance across resolutions, per image


def embedding_variance(
    records: Iterable[PredictionRecord],
    grouping: VarianceGrouping | str = VarianceGrouping.PER_RESOLUTION,
) -> dict:
    """Mean per-dimension population variance of embeddings within groups.

    ``per_resolution`` groups by evaluation resolution (spread across images
    at one scale); ``per_image`` groups by image id (one image's embedding
    drift across scales). Returns ``group key -> variance``.
    """
    grouping = VarianceGrouping(grouping)
    groups: dict = {}
    dim: int | None = None
    for rec in records:
        if rec.embedding is None:
            raise DataError(
                f"record {rec.image_id!r} has no embedding", code="dump.embedding"
            )
        emb = np.asarray(rec.embedding, dtype=np.float64)
        if dim is None:
            dim = emb.size
        elif emb.size != dim:
            raise DataError(
                f"embedding dimension mismatch: {emb.size} != {dim}",
                code="dump.embedding",
            )
        key = rec.resolution if grouping is VarianceGrouping.PER_RESOLUTION else rec.image_id
        groups.setdefault(key, []).append(emb)
    if not groups:
        raise DataError("no records", code="dump.empty")
    return {
        key: float(np.var(np.stack(embs, axis=0), axis=0).mean())
        for key, embs in groups.items()
    }


def accuracy_by_resolution(records: Iterable[PredictionRecord]) -> dict[tuple[int, int], float]:
    """Top-1 accuracy per evaluation resolution (lowest-index argmax tie-break)."""
    counts: dict[tuple[int, int], int] = {}
    hits: dict[tuple[int, int], int] = {}
    for rec in records:
        pred = int(np.argmax(rec.probs))
        res = rec.resolution
        counts[res] = counts.get(res, 0) + 1
        hits[res] = hits.get(res, 0) + int(pred == rec.label)
    if not counts:
        raise DataError("no records", code="dump.empty")
    return {res: hits[res] / counts[res] for res in sorted(counts)}


def delta_cell(candidate: float, baseline: float) -> str:
    """Render a metric next to its delta over a baseline: ``17.91 (+1.86)``."""
    return f"{candidate:.2f} ({candidate - baseline:+.2f})"


def delta_table(candidate: Mapping[str, float], baseline: Mapping[str, float]) -> str:
    """Multi-row delta rendering; rows sorted by metric name."""
    missing = sorted(set(candidate) - set(baseline))
    if missing:
        raise DataError(
            f"baseline lacks metrics: {', '.join(missing)}", code="delta.missing"
        )
    width = max((len(k) for k in candidate), default=0)
    return "\n".join(
        f"{key.ljust(width)}  {delta_cell(candidate[key], baseline[key])}"
        for key in sorted(candidate)
    )
