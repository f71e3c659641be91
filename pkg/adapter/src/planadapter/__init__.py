"""Consume multi-scale batch plan files in a torch training loop."""

from .plans import Batch, PlanCursor, PlanError, StepRecord, iterate_batches, load_cursor
from .training import (
    EpochConsumption,
    TinyConvNet,
    ToyTrainResult,
    make_synthetic_dataset,
    train_toy,
)

__all__ = [
    "Batch",
    "EpochConsumption",
    "PlanCursor",
    "PlanError",
    "StepRecord",
    "TinyConvNet",
    "ToyTrainResult",
    "iterate_batches",
    "load_cursor",
    "make_synthetic_dataset",
    "train_toy",
]

__version__ = "0.1.0"
