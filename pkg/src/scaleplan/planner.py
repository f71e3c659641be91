"""Deterministic multi-scale batch plans.

A plan fixes, for every (epoch, rank, step), the batch resolution, the nominal
batch size, and the exact dataset indices consumed, before any training
happens. Sampler kinds:

* ``ssc-fbs``  — single scale, fixed batch: every step uses the reference
  resolution and batch size.
* ``msc-fbs``  — multi scale, fixed batch: resolution drawn per step from the
  pool, batch size stays at the reference.
* ``msc-vbs``  — multi scale, variable batch: resolution drawn per step, batch
  rescaled to hold the reference pixel budget (``floor(B*H*W / (h*w))``).
* ``msc-vbswc`` — msc-vbs over a pool that starts compressed and expands per
  epoch under a curriculum schedule.

Within an epoch, indices come from one full-dataset permutation; rank ``r`` of
``world_size`` owns the strided shard ``perm[r::world_size]``. In synchronized
mode all ranks share one resolution stream and emit equal step counts; in
independent mode each rank draws its own resolutions and pads by wrapping its
shard so step counts still match.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .respool import ReferenceShape, ResolutionPool, batch_size_for, compress_pool
from .schedule import CurriculumSchedule, ScheduleKind, schedule_value
from .seeding import STREAM_PERMUTE, STREAM_RANK_SHAPES, STREAM_SHAPES, stream

__all__ = [
    "SamplerKind",
    "SyncMode",
    "SamplerConfig",
    "IterationSpec",
    "EpochPlan",
    "CoverageReport",
    "plan_epoch",
    "plan_run",
    "verify_plan",
]

_DRAW_BLOCK = 1024


class SamplerKind(str, Enum):
    SSC_FBS = "ssc-fbs"
    MSC_FBS = "msc-fbs"
    MSC_VBS = "msc-vbs"
    MSC_VBSWC = "msc-vbswc"


class SyncMode(str, Enum):
    SYNCHRONIZED = "synchronized"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class SamplerConfig:
    kind: SamplerKind
    reference: ReferenceShape
    dataset_size: int
    epochs: int
    pool: ResolutionPool | None = None
    curriculum: CurriculumSchedule | None = None
    world_size: int = 1
    seed: int = 0
    resolution_sync: SyncMode = SyncMode.SYNCHRONIZED
    drop_last: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SamplerKind(self.kind))
        object.__setattr__(self, "resolution_sync", SyncMode(self.resolution_sync))
        if self.dataset_size < 1:
            raise ConfigError(
                f"dataset_size must be >= 1, got {self.dataset_size}",
                code="sampler.dataset_size",
            )
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}", code="sampler.epochs")
        if self.world_size < 1:
            raise ConfigError(
                f"world_size must be >= 1, got {self.world_size}", code="sampler.world_size"
            )
        if self.world_size > self.dataset_size:
            raise ConfigError(
                f"world_size {self.world_size} exceeds dataset_size {self.dataset_size}",
                code="sampler.world_size",
            )
        if self.kind is not SamplerKind.SSC_FBS and self.pool is None:
            raise ConfigError(
                f"sampler kind {self.kind.value} requires a resolution pool",
                code="sampler.pool",
            )
        if self.kind is SamplerKind.MSC_VBSWC:
            if self.curriculum is None:
                raise ConfigError(
                    "msc-vbswc requires a curriculum schedule", code="sampler.curriculum"
                )
            if self.curriculum.total_epochs != self.epochs:
                raise ConfigError(
                    f"curriculum.total_epochs ({self.curriculum.total_epochs}) must equal "
                    f"sampler epochs ({self.epochs})",
                    code="curriculum.total_epochs",
                )
        elif self.curriculum is not None:
            raise ConfigError(
                f"curriculum is only valid for msc-vbswc, not {self.kind.value}",
                code="sampler.curriculum",
            )

    @property
    def variable_batch(self) -> bool:
        return self.kind in (SamplerKind.MSC_VBS, SamplerKind.MSC_VBSWC)

    def active_pool(self, epoch: int) -> ResolutionPool:
        """Pool the sampler draws from at ``epoch`` (singleton for ssc-fbs)."""
        if not 0 <= epoch < self.epochs:
            raise ConfigError(
                f"epoch {epoch} outside [0, {self.epochs})", code="sampler.epoch"
            )
        if self.kind is SamplerKind.SSC_FBS:
            ref = self.reference
            return ResolutionPool(((ref.height, ref.width),), divisor=1)
        assert self.pool is not None
        if self.kind is SamplerKind.MSC_VBSWC:
            assert self.curriculum is not None
            return compress_pool(self.pool, schedule_value(self.curriculum, epoch))
        return self.pool

    def step_batch_sizes(self, pool: ResolutionPool) -> tuple[int, ...]:
        """Nominal batch size for each pool entry under this sampler kind."""
        if self.variable_batch:
            return tuple(batch_size_for(self.reference, res) for res in pool.resolutions)
        return (self.reference.batch,) * len(pool)

    def with_seed(self, seed: int) -> "SamplerConfig":
        return replace(self, seed=seed)


@dataclass(eq=False, slots=True)
class IterationSpec:
    """One planned optimizer step for one rank."""

    epoch: int
    step: int
    rank: int
    height: int
    width: int
    batch_size: int
    indices: np.ndarray  # int64 dataset indices, len <= batch_size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IterationSpec):
            return NotImplemented
        return (
            (self.epoch, self.step, self.rank, self.height, self.width, self.batch_size)
            == (other.epoch, other.step, other.rank, other.height, other.width, other.batch_size)
            and np.array_equal(self.indices, other.indices)
        )

    @property
    def pixel_budget(self) -> int:
        return self.batch_size * self.height * self.width


@dataclass(eq=False)
class EpochPlan:
    epoch: int
    active_pool: ResolutionPool
    per_rank: list[list[IterationSpec]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EpochPlan):
            return NotImplemented
        return (
            self.epoch == other.epoch
            and self.active_pool == other.active_pool
            and self.per_rank == other.per_rank
        )

    @property
    def steps_per_rank(self) -> tuple[int, ...]:
        return tuple(len(steps) for steps in self.per_rank)

    def all_steps(self) -> Iterator[IterationSpec]:
        for steps in self.per_rank:
            yield from steps


@dataclass(frozen=True)
class CoverageReport:
    """What one epoch of a plan actually consumes."""

    epoch: int
    dataset_size: int
    per_rank_steps: tuple[int, ...]
    covered: int  # distinct real indices consumed
    duplicates: int  # real index occurrences beyond the first
    missing: int  # dataset indices never consumed
    padding: int  # index occurrences past a rank's natural shard length
    max_pixel_budget: int

    @property
    def exact_once(self) -> bool:
        return self.duplicates == 0 and self.missing == 0


def _shard_sizes(dataset_size: int, world_size: int) -> list[int]:
    # perm[r::world] has ceil((N - r) / world) elements
    return [(dataset_size - r + world_size - 1) // world_size for r in range(world_size)]


def _shape_schedule(
    gen: np.random.Generator,
    pool: ResolutionPool,
    batch_sizes: Sequence[int],
    target: int,
) -> list[tuple[int, int, int]]:
    """Draw (h, w, batch) steps until cumulative batch size reaches ``target``.

    Draws come in fixed blocks so the stream is identical however the caller
    consumes the schedule. A singleton pool skips drawing entirely.
    """
    entries = pool.resolutions
    if len(entries) == 1:
        (h, w), b = entries[0], batch_sizes[0]
        return [(h, w, b)] * ((target + b - 1) // b)
    sizes = np.asarray(batch_sizes, dtype=np.int64)
    steps: list[tuple[int, int, int]] = []
    cum = 0
    while cum < target:
        block = gen.integers(0, len(entries), size=_DRAW_BLOCK)
        csum = cum + np.cumsum(sizes[block])
        hit = int(np.searchsorted(csum, target, side="left"))
        take = block[: hit + 1] if hit < len(block) else block
        steps.extend((entries[i][0], entries[i][1], int(sizes[i])) for i in take)
        cum = int(csum[min(hit, len(block) - 1)])
    return steps


def _trim_full_steps(schedule: list[tuple[int, int, int]], limit: int) -> list[tuple[int, int, int]]:
    """Longest prefix of the schedule whose nominal batches fit inside ``limit``."""
    out, cum = [], 0
    for h, w, b in schedule:
        if cum + b > limit:
            break
        out.append((h, w, b))
        cum += b
    return out


def plan_epoch(cfg: SamplerConfig, epoch: int) -> EpochPlan:
    """Materialize the full plan of one epoch for every rank."""
    pool = cfg.active_pool(epoch)
    batch_sizes = cfg.step_batch_sizes(pool)
    perm = stream(cfg.seed, epoch, STREAM_PERMUTE).permutation(cfg.dataset_size)
    shards = [perm[r :: cfg.world_size] for r in range(cfg.world_size)]
    sizes = [len(s) for s in shards]

    per_rank: list[list[IterationSpec]] = []
    if cfg.resolution_sync is SyncMode.SYNCHRONIZED:
        gen = stream(cfg.seed, epoch, STREAM_SHAPES)
        schedule = _shape_schedule(gen, pool, batch_sizes, max(sizes))
        if cfg.drop_last:
            schedule = _trim_full_steps(schedule, min(sizes))
        for rank, shard in enumerate(shards):
            pos, steps = 0, []
            for s, (h, w, b) in enumerate(schedule):
                take = min(b, max(0, sizes[rank] - pos))
                steps.append(
                    IterationSpec(epoch, s, rank, h, w, b, shard[pos : pos + take])
                )
                pos += take
            per_rank.append(steps)
    else:
        gens = [stream(cfg.seed, epoch, STREAM_RANK_SHAPES, r) for r in range(cfg.world_size)]
        schedules = []
        for rank in range(cfg.world_size):
            sched = _shape_schedule(gens[rank], pool, batch_sizes, sizes[rank])
            if cfg.drop_last:
                sched = _trim_full_steps(sched, sizes[rank])
            schedules.append(sched)
        total_steps = max(len(s) for s in schedules)
        for rank, shard in enumerate(shards):
            sched = schedules[rank]
            natural = len(sched)
            # ranks that finish early draw extra padding steps so step counts match
            while len(sched) < total_steps:
                i = 0 if len(pool) == 1 else int(gens[rank].integers(0, len(pool)))
                h, w = pool.resolutions[i]
                sched.append((h, w, batch_sizes[i]))
            pos, steps = 0, []
            size = sizes[rank]
            for s, (h, w, b) in enumerate(sched):
                if s < natural:
                    take = min(b, size - pos)
                    idx = shard[pos : pos + take]
                    pos += take
                else:
                    # padding: full batches wrapping cyclically through the shard
                    offs = (pos + np.arange(b, dtype=np.int64)) % size
                    idx = shard[offs]
                    pos += b
                steps.append(IterationSpec(epoch, s, rank, h, w, b, idx))
            per_rank.append(steps)
    return EpochPlan(epoch=epoch, active_pool=pool, per_rank=per_rank)


def plan_run(cfg: SamplerConfig) -> Iterator[EpochPlan]:
    """Lazily yield the plan of every epoch in order."""
    for epoch in range(cfg.epochs):
        yield plan_epoch(cfg, epoch)


def verify_plan(plan: EpochPlan, cfg: SamplerConfig) -> CoverageReport:
    """Audit one epoch plan against its config.

    Indices a rank emits past its natural shard length are padding (possible
    only in independent mode); the rest are "real" and checked for exact-once
    coverage.
    """
    sizes = _shard_sizes(cfg.dataset_size, cfg.world_size)
    real_parts: list[np.ndarray] = []
    padding = 0
    max_budget = 0
    for rank, steps in enumerate(plan.per_rank):
        pos = 0
        for spec in steps:
            n = len(spec.indices)
            real = max(0, min(n, sizes[rank] - pos))
            if real:
                real_parts.append(spec.indices[:real])
            padding += n - real
            pos += n
            max_budget = max(max_budget, spec.pixel_budget)
    if real_parts:
        real = np.concatenate(real_parts)
        unique = np.unique(real)
        covered = len(unique)
        duplicates = len(real) - covered
    else:
        covered = duplicates = 0
    return CoverageReport(
        epoch=plan.epoch,
        dataset_size=cfg.dataset_size,
        per_rank_steps=plan.steps_per_rank,
        covered=covered,
        duplicates=duplicates,
        missing=cfg.dataset_size - covered,
        padding=padding,
        max_pixel_budget=max_budget,
    )
