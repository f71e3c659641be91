"""Toy training loop driven entirely by a batch plan file.

The loop consumes whatever the plan dictates — order, resolutions, batch
sizes — and records what it actually fed the model, so tests can check the
observed consumption against the plan's own accounting. After training it
evaluates at several resolutions and writes a prediction dump in the
line-delimited JSON format the planner ecosystem shares (canonical key order,
compact separators, shortest round-trip floats).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .plans import PlanCursor, iterate_batches

DUMP_FORMAT = "scaleplan.predictions"
DUMP_VERSION = 1


def make_synthetic_dataset(
    n: int, *, side: int = 32, channels: int = 3, seed: int = 0
) -> tuple[torch.Tensor, torch.Tensor]:
    """Two-class images separable by channel intensity (class k lights up a
    different channel), with enough noise that an untrained net is at chance."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n)
    pixels = rng.normal(0.0, 0.3, size=(n, channels, side, side))
    pixels[labels == 0, 0] += 1.2
    pixels[labels == 1, channels - 1] += 1.2
    return (
        torch.as_tensor(pixels, dtype=torch.float32),
        torch.as_tensor(labels, dtype=torch.long),
    )


class TinyConvNet(nn.Module):
    """Conv -> ReLU -> global average pool -> linear; resolution-agnostic."""

    def __init__(self, channels: int = 3, num_classes: int = 2, width: int = 8):
        super().__init__()
        self.conv = nn.Conv2d(channels, width, kernel_size=3, padding=1)
        self.head = nn.Linear(width, num_classes)

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return torch.relu(self.conv(x)).mean(dim=(2, 3))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))


@dataclass(frozen=True)
class EpochConsumption:
    """What one epoch actually fed the model, observed batch by batch."""

    epoch: int
    per_rank_steps: tuple[int, ...]
    consumed: int  # total index draws
    distinct: int  # distinct dataset indices seen
    duplicates: int  # draws beyond an index's first
    missing: int  # dataset indices never seen


@dataclass
class ToyTrainResult:
    losses: list[float] = field(default_factory=list)  # mean loss per epoch
    final_accuracy: float = 0.0
    shape_violations: int = 0
    consumption: list[EpochConsumption] = field(default_factory=list)
    dump_path: str | None = None


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _write_dump(
    model: TinyConvNet,
    images: torch.Tensor,
    labels: torch.Tensor,
    path: str,
    *,
    eval_sides: tuple[int, ...],
    eval_count: int,
    epoch: int,
) -> None:
    width = model.head.in_features
    with open(path, "w", encoding="utf-8") as f:
        f.write(
            _canonical(
                {
                    "format": DUMP_FORMAT,
                    "version": DUMP_VERSION,
                    "num_classes": model.head.out_features,
                    "embed_dim": width,
                }
            )
            + "\n"
        )
        subset = images[:eval_count]
        with torch.no_grad():
            for side in eval_sides:
                x = torch.nn.functional.interpolate(
                    subset, size=(side, side), mode="bilinear", align_corners=False
                )
                feats = model.features(x)
                probs = torch.softmax(model.head(feats), dim=1)
                for i in range(eval_count):
                    f.write(
                        _canonical(
                            {
                                "image_id": f"toy{i:05d}",
                                "label": int(labels[i]),
                                "probs": [float(p) for p in probs[i]],
                                "h": side,
                                "w": side,
                                "embedding": [float(v) for v in feats[i]],
                                "epoch": epoch,
                            }
                        )
                        + "\n"
                    )


def train_toy(
    cursor: PlanCursor,
    images: torch.Tensor,
    labels: torch.Tensor,
    *,
    lr: float = 0.05,
    momentum: float = 0.9,
    seed: int = 0,
    dump_path: str | None = None,
    eval_sides: tuple[int, ...] = (24, 32, 48),
    eval_count: int = 512,
) -> ToyTrainResult:
    """Run every planned step of every epoch, in plan order, on a tiny net.

    Ranks are consumed sequentially (a single-process stand-in for data
    parallelism). Returns the loss trace, final accuracy at the dataset's
    native resolution, observed per-epoch consumption, and a count of batches
    whose tensors deviated from their plan record (expected to be zero).
    """
    torch.manual_seed(seed)
    model = TinyConvNet(channels=cursor.channels, num_classes=2)
    optimizer = torch.optim.SGD(model.parameters(), lr=lr, momentum=momentum)
    loss_fn = nn.CrossEntropyLoss()
    result = ToyTrainResult()

    for epoch in range(cursor.epochs):
        epoch_losses = []
        counts = np.zeros(cursor.dataset_size, dtype=np.int64)
        per_rank_steps = []
        for rank in range(cursor.world_size):
            steps = 0
            for batch in iterate_batches(cursor, images, labels, epoch, rank=rank):
                wanted = (len(batch.indices), cursor.channels, batch.height, batch.width)
                if tuple(batch.inputs.shape) != wanted or len(batch.indices) > batch.planned_batch_size:
                    result.shape_violations += 1
                optimizer.zero_grad()
                loss = loss_fn(model(batch.inputs), batch.targets)
                loss.backward()
                optimizer.step()
                epoch_losses.append(float(loss.detach()))
                counts[list(batch.indices)] += 1
                steps += 1
            per_rank_steps.append(steps)
        distinct = int(np.count_nonzero(counts))
        total = int(counts.sum())
        result.consumption.append(
            EpochConsumption(
                epoch=epoch,
                per_rank_steps=tuple(per_rank_steps),
                consumed=total,
                distinct=distinct,
                duplicates=total - distinct,
                missing=cursor.dataset_size - distinct,
            )
        )
        result.losses.append(float(np.mean(epoch_losses)))

    with torch.no_grad():
        correct = 0
        for start in range(0, cursor.dataset_size, 256):
            chunk = slice(start, min(start + 256, cursor.dataset_size))
            pred = model(images[chunk]).argmax(dim=1)
            correct += int((pred == labels[chunk]).sum())
        result.final_accuracy = correct / cursor.dataset_size

    if dump_path is not None:
        _write_dump(
            model, images, labels, dump_path,
            eval_sides=eval_sides,
            eval_count=min(eval_count, cursor.dataset_size),
            epoch=cursor.epochs - 1,
        )
        result.dump_path = dump_path
    return result
