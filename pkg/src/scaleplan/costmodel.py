"""Training-cost simulation for sampler configs.

Costs are architecture-agnostic: a :class:`CostProfile` maps a resolution to
per-sample forward FLOPs either analytically (``per_pixel_flops * h * w +
fixed_flops``, the pixel-linear law that fits conv backbones) or via a
measured table. Three quantities are reported per run:

* ``total_flops``   — sum over all ranks and steps of samples x per-sample cost
* ``updates``       — optimizer steps taken by one rank
* ``peak_activation_units`` — max over steps of
  ``act_units_per_pixel * batch * h * w * (1 + depth_factor)``

``expected`` mode evaluates closed forms (uniform resolution draws, exact
real-valued batch sizes); ``montecarlo`` mode runs the actual planner for one
or more seeds and counts what the plan does, including floor rounding and
partial final batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .encoding import digest
from .errors import ConfigError, DataError
from .planner import SamplerConfig, SyncMode, plan_run
from .respool import batch_size_for

__all__ = [
    "ProfileKind",
    "CostProfile",
    "EpochCost",
    "CostReport",
    "RelativeReport",
    "flops_per_sample",
    "simulate",
    "compare",
]


class ProfileKind(str, Enum):
    ANALYTIC = "analytic"
    TABULATED = "tabulated"


class SimulationMode(str, Enum):
    EXPECTED = "expected"
    MONTECARLO = "montecarlo"


@dataclass(frozen=True)
class CostProfile:
    kind: ProfileKind = ProfileKind.ANALYTIC
    per_pixel_flops: float = 1.0
    fixed_flops: float = 0.0
    table: tuple[tuple[int, int, float], ...] | None = None
    act_units_per_pixel: float = 1.0
    depth_factor: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ProfileKind(self.kind))
        if self.kind is ProfileKind.ANALYTIC:
            if not self.per_pixel_flops > 0:
                raise ConfigError(
                    f"per_pixel_flops must be > 0, got {self.per_pixel_flops}",
                    code="profile.per_pixel_flops",
                )
            if self.fixed_flops < 0:
                raise ConfigError(
                    f"fixed_flops must be >= 0, got {self.fixed_flops}",
                    code="profile.fixed_flops",
                )
        else:
            if not self.table:
                raise ConfigError(
                    "tabulated profile requires a non-empty table", code="profile.table"
                )
            table = tuple(sorted((int(h), int(w), float(f)) for h, w, f in self.table))
            if any(f <= 0 for _, _, f in table):
                raise ConfigError(
                    "tabulated flops must be > 0", code="profile.table"
                )
            object.__setattr__(self, "table", table)
        if self.act_units_per_pixel <= 0:
            raise ConfigError(
                f"act_units_per_pixel must be > 0, got {self.act_units_per_pixel}",
                code="profile.act_units_per_pixel",
            )
        if self.depth_factor < 0:
            raise ConfigError(
                f"depth_factor must be >= 0, got {self.depth_factor}",
                code="profile.depth_factor",
            )

    def to_mapping(self) -> dict:
        m: dict = {"kind": self.kind.value, "act_units_per_pixel": self.act_units_per_pixel,
                   "depth_factor": self.depth_factor}
        if self.kind is ProfileKind.ANALYTIC:
            m["per_pixel_flops"] = self.per_pixel_flops
            m["fixed_flops"] = self.fixed_flops
        else:
            m["table"] = [list(row) for row in self.table or ()]
        return m

    @property
    def digest(self) -> str:
        return digest(self.to_mapping())


def flops_per_sample(profile: CostProfile, resolution: tuple[int, int]) -> float:
    """Forward FLOPs for one sample at ``resolution`` under ``profile``."""
    h, w = resolution
    if profile.kind is ProfileKind.ANALYTIC:
        return profile.per_pixel_flops * h * w + profile.fixed_flops
    for th, tw, f in profile.table or ():
        if (th, tw) == (h, w):
            return f
    raise ConfigError(
        f"tabulated profile has no entry for resolution {(h, w)}", code="profile.table"
    )


@dataclass(frozen=True)
class EpochCost:
    epoch: int
    flops: float
    updates: int


@dataclass(frozen=True)
class CostReport:
    config_digest: str
    profile_digest: str
    mode: str
    seeds: tuple[int, ...]
    total_flops: float
    updates: int
    peak_activation_units: float
    per_epoch: tuple[EpochCost, ...]


@dataclass(frozen=True)
class RelativeReport:
    candidate_digest: str
    baseline_digest: str
    flops_ratio: float
    updates_ratio: float
    peak_ratio: float


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _peak_for_pool(cfg: SamplerConfig, profile: CostProfile, pool) -> float:
    scale = profile.act_units_per_pixel * (1.0 + profile.depth_factor)
    budgets = [
        b * h * w
        for (h, w), b in zip(pool.resolutions, cfg.step_batch_sizes(pool))
    ]
    return scale * max(budgets)


def _simulate_expected(cfg: SamplerConfig, profile: CostProfile) -> CostReport:
    if cfg.resolution_sync is not SyncMode.SYNCHRONIZED:
        raise ConfigError(
            "expected mode models synchronized resolution draws only; "
            "use montecarlo for independent mode",
            code="simulate.mode",
        )
    per_epoch: list[EpochCost] = []
    peak = 0.0
    shard = cfg.dataset_size / cfg.world_size
    for epoch in range(cfg.epochs):
        pool = cfg.active_pool(epoch)
        if cfg.variable_batch:
            budget = cfg.reference.pixel_budget
            exact_b = [budget / (h * w) for h, w in pool.resolutions]
        else:
            exact_b = [float(cfg.reference.batch)] * len(pool)
        flops = [flops_per_sample(profile, res) for res in pool.resolutions]
        mean_b = sum(exact_b) / len(exact_b)
        # sample-weighted per-sample cost; uniform weights when batch is fixed
        per_sample = sum(b * f for b, f in zip(exact_b, flops)) / sum(exact_b)
        epoch_updates = _round_half_up(shard / mean_b)
        epoch_flops = cfg.dataset_size * per_sample
        per_epoch.append(EpochCost(epoch, epoch_flops, epoch_updates))
        peak = max(peak, _peak_for_pool(cfg, profile, pool))
    return CostReport(
        config_digest=digest(cfg_mapping(cfg)),
        profile_digest=profile.digest,
        mode=SimulationMode.EXPECTED.value,
        seeds=(),
        total_flops=float(sum(c.flops for c in per_epoch)),
        updates=sum(c.updates for c in per_epoch),
        peak_activation_units=peak,
        per_epoch=tuple(per_epoch),
    )


def _simulate_montecarlo(
    cfg: SamplerConfig, profile: CostProfile, seeds: Sequence[int]
) -> CostReport:
    flops_by_epoch = [0.0] * cfg.epochs
    updates_by_epoch = [0.0] * cfg.epochs
    peak = 0.0
    scale = profile.act_units_per_pixel * (1.0 + profile.depth_factor)
    cache: dict[tuple[int, int], float] = {}
    for seed in seeds:
        for plan in plan_run(cfg.with_seed(seed)):
            epoch_flops = 0.0
            for spec in plan.all_steps():
                n = len(spec.indices)
                key = (spec.height, spec.width)
                f = cache.get(key)
                if f is None:
                    f = cache[key] = flops_per_sample(profile, key)
                epoch_flops += n * f
                peak = max(peak, scale * n * spec.height * spec.width)
            flops_by_epoch[plan.epoch] += epoch_flops
            updates_by_epoch[plan.epoch] += len(plan.per_rank[0])
    k = len(seeds)
    per_epoch = tuple(
        EpochCost(e, flops_by_epoch[e] / k, _round_half_up(updates_by_epoch[e] / k))
        for e in range(cfg.epochs)
    )
    return CostReport(
        config_digest=digest(cfg_mapping(cfg)),
        profile_digest=profile.digest,
        mode=SimulationMode.MONTECARLO.value,
        seeds=tuple(seeds),
        total_flops=float(sum(c.flops for c in per_epoch)),
        updates=sum(c.updates for c in per_epoch),
        peak_activation_units=peak,
        per_epoch=per_epoch,
    )


def simulate(
    cfg: SamplerConfig,
    profile: CostProfile | None = None,
    mode: str = "expected",
    seeds: Iterable[int] | None = None,
) -> CostReport:
    """Cost report for one sampler config under one cost profile.

    ``seeds`` applies to montecarlo mode only (default: the config's own
    seed); per-epoch numbers are averaged across seeds and the peak is the
    max across seeds.
    """
    profile = profile if profile is not None else CostProfile()
    mode_e = SimulationMode(mode)
    if mode_e is SimulationMode.EXPECTED:
        if seeds is not None:
            raise ConfigError("seeds apply to montecarlo mode only", code="simulate.seeds")
        return _simulate_expected(cfg, profile)
    seed_list = list(seeds) if seeds is not None else [cfg.seed]
    if not seed_list:
        raise ConfigError("montecarlo requires at least one seed", code="simulate.seeds")
    return _simulate_montecarlo(cfg, profile, seed_list)


def compare(candidate: CostReport, baseline: CostReport) -> RelativeReport:
    """Candidate cost relative to baseline (ratios < 1 mean cheaper)."""
    if candidate.profile_digest != baseline.profile_digest:
        raise ConfigError(
            "cost reports were computed under different cost profiles "
            f"({candidate.profile_digest} vs {baseline.profile_digest})",
            code="compare.profile",
        )
    if baseline.total_flops <= 0 or baseline.updates <= 0 or baseline.peak_activation_units <= 0:
        raise DataError("baseline report has zero cost", code="compare.baseline")
    return RelativeReport(
        candidate_digest=candidate.config_digest,
        baseline_digest=baseline.config_digest,
        flops_ratio=candidate.total_flops / baseline.total_flops,
        updates_ratio=candidate.updates / baseline.updates,
        peak_ratio=candidate.peak_activation_units / baseline.peak_activation_units,
    )


def cfg_mapping(cfg: SamplerConfig) -> dict:
    """JSON-ready mapping of a sampler config (canonical digest input)."""
    m: dict = {
        "kind": cfg.kind.value,
        "reference": {
            "batch": cfg.reference.batch,
            "channels": cfg.reference.channels,
            "height": cfg.reference.height,
            "width": cfg.reference.width,
        },
        "dataset_size": cfg.dataset_size,
        "epochs": cfg.epochs,
        "world_size": cfg.world_size,
        "seed": cfg.seed,
        "resolution_sync": cfg.resolution_sync.value,
        "drop_last": cfg.drop_last,
    }
    if cfg.pool is not None:
        m["pool"] = {
            "resolutions": [list(r) for r in cfg.pool.resolutions],
            "divisor": cfg.pool.divisor,
        }
    if cfg.curriculum is not None:
        c = cfg.curriculum
        cm: dict = {
            "kind": c.kind.value,
            "rho0": c.rho0,
            "tau": c.tau,
            "total_epochs": c.total_epochs,
        }
        if c.kind.value == "polynomial":
            cm["poly_power"] = c.poly_power
        if c.kind.value == "multistep":
            cm["steps"] = [list(s) for s in c.steps or ()]
        m["curriculum"] = cm
    return m
