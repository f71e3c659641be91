"""Read batch-plan files and serve their steps as resized torch batches.

A plan file is line-delimited JSON: one header carrying the sampler config,
then one record per (epoch, rank, step) naming the step's resolution, nominal
batch size, and the exact dataset indices to draw. The adapter treats the file
as the single source of truth — it never derives shapes, batch sizes, or
sample order itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Mapping

import torch
import torch.nn.functional as F

PLAN_FORMAT = "scaleplan.plan"
PLAN_VERSION = 1


class PlanError(ValueError):
    """A plan file is malformed or disagrees with the provided dataset."""


@dataclass(frozen=True)
class StepRecord:
    """One planned optimizer step, verbatim from the plan file."""

    epoch: int
    rank: int
    step: int
    height: int
    width: int
    batch_size: int
    indices: tuple[int, ...]


@dataclass(frozen=True)
class PlanCursor:
    """A fully parsed plan plus the config facts the loop needs."""

    path: str
    kind: str
    dataset_size: int
    epochs: int
    world_size: int
    channels: int
    reference_batch: int
    reference_height: int
    reference_width: int
    steps: Mapping[int, Mapping[int, tuple[StepRecord, ...]]]  # epoch -> rank -> steps

    def rank_steps(self, epoch: int, rank: int) -> tuple[StepRecord, ...]:
        if epoch not in self.steps:
            raise PlanError(f"plan has no epoch {epoch}")
        by_rank = self.steps[epoch]
        if rank not in by_rank:
            raise PlanError(f"plan epoch {epoch} has no rank {rank}")
        return by_rank[rank]


def _require(mapping: Mapping, key: str, where: str):
    if key not in mapping:
        raise PlanError(f"{where} lacks {key!r}")
    return mapping[key]


def load_cursor(path: str) -> PlanCursor:
    """Parse a plan file into a cursor, validating step continuity."""
    header: Mapping | None = None
    collected: dict[int, dict[int, list[StepRecord]]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                raise PlanError(f"{path}:{lineno}: corrupt or truncated record") from None
            if isinstance(obj, Mapping) and "format" in obj:
                if obj.get("format") != PLAN_FORMAT or obj.get("version") != PLAN_VERSION:
                    raise PlanError(
                        f"{path}:{lineno}: expected {PLAN_FORMAT} v{PLAN_VERSION} header"
                    )
                if header is not None and obj != header:
                    raise PlanError(f"{path}:{lineno}: conflicting plan headers")
                header = obj
                continue
            if header is None:
                raise PlanError(f"{path}:{lineno}: record before header")
            record = StepRecord(
                epoch=int(_require(obj, "epoch", "record")),
                rank=int(_require(obj, "rank", "record")),
                step=int(_require(obj, "step", "record")),
                height=int(_require(obj, "h", "record")),
                width=int(_require(obj, "w", "record")),
                batch_size=int(_require(obj, "batch", "record")),
                indices=tuple(int(i) for i in _require(obj, "indices", "record")),
            )
            collected.setdefault(record.epoch, {}).setdefault(record.rank, []).append(record)
    if header is None:
        raise PlanError(f"{path}: empty plan file")

    sampler = _require(header, "sampler", "header")
    reference = _require(sampler, "reference", "header sampler")
    epochs = int(_require(sampler, "epochs", "header sampler"))
    world_size = int(_require(sampler, "world_size", "header sampler"))
    dataset_size = int(_require(sampler, "dataset_size", "header sampler"))

    steps: dict[int, dict[int, tuple[StepRecord, ...]]] = {}
    for epoch, by_rank in collected.items():
        if not 0 <= epoch < epochs:
            raise PlanError(f"{path}: epoch {epoch} outside header range")
        ranks = {}
        for rank, records in by_rank.items():
            if not 0 <= rank < world_size:
                raise PlanError(f"{path}: rank {rank} outside header range")
            records.sort(key=lambda r: r.step)
            if [r.step for r in records] != list(range(len(records))):
                raise PlanError(f"{path}: epoch {epoch} rank {rank} steps not contiguous")
            for r in records:
                if len(r.indices) > r.batch_size:
                    raise PlanError(
                        f"{path}: epoch {epoch} rank {rank} step {r.step} "
                        f"carries more indices than its batch size"
                    )
                if any(not 0 <= i < dataset_size for i in r.indices):
                    raise PlanError(
                        f"{path}: epoch {epoch} rank {rank} step {r.step} "
                        f"index outside dataset"
                    )
            ranks[rank] = tuple(records)
        if set(ranks) != set(range(world_size)):
            raise PlanError(f"{path}: epoch {epoch} lacks records for some rank")
        steps[epoch] = ranks

    return PlanCursor(
        path=path,
        kind=str(_require(sampler, "kind", "header sampler")),
        dataset_size=dataset_size,
        epochs=epochs,
        world_size=world_size,
        channels=int(_require(reference, "channels", "header reference")),
        reference_batch=int(_require(reference, "batch", "header reference")),
        reference_height=int(_require(reference, "height", "header reference")),
        reference_width=int(_require(reference, "width", "header reference")),
        steps=steps,
    )


@dataclass(frozen=True)
class Batch:
    """One training step's tensors, resized to the planned resolution."""

    epoch: int
    rank: int
    step: int
    height: int
    width: int
    planned_batch_size: int
    indices: tuple[int, ...]
    inputs: torch.Tensor  # (len(indices), C, height, width)
    targets: torch.Tensor  # (len(indices),)


def iterate_batches(
    cursor: PlanCursor,
    images: torch.Tensor,
    labels: torch.Tensor,
    epoch: int,
    rank: int = 0,
) -> Iterator[Batch]:
    """Yield one resized batch per planned step for (epoch, rank).

    ``images`` is the full dataset as (N, C, H, W); every batch is gathered by
    the plan's indices and bilinearly resized to the step's resolution. The
    dataset must match the plan's declared size and channel count — mismatches
    fail before the first batch.
    """
    if images.ndim != 4:
        raise PlanError(f"images must be (N, C, H, W), got shape {tuple(images.shape)}")
    if images.shape[0] != cursor.dataset_size:
        raise PlanError(
            f"dataset has {images.shape[0]} images but the plan covers "
            f"{cursor.dataset_size}"
        )
    if images.shape[1] != cursor.channels:
        raise PlanError(
            f"dataset has {images.shape[1]} channels but the plan expects "
            f"{cursor.channels}"
        )
    if labels.shape[0] != cursor.dataset_size:
        raise PlanError(f"labels cover {labels.shape[0]} images, expected {cursor.dataset_size}")

    for record in cursor.rank_steps(epoch, rank):
        idx = torch.as_tensor(record.indices, dtype=torch.long)
        x = images[idx]
        if (x.shape[2], x.shape[3]) != (record.height, record.width):
            x = F.interpolate(
                x, size=(record.height, record.width), mode="bilinear", align_corners=False
            )
        yield Batch(
            epoch=record.epoch,
            rank=record.rank,
            step=record.step,
            height=record.height,
            width=record.width,
            planned_batch_size=record.batch_size,
            indices=record.indices,
            inputs=x,
            targets=labels[idx],
        )
