"""Deterministic multi-scale batch sampling plans, cost simulation, and metrics."""

from .costmodel import (
    CostProfile,
    CostReport,
    ProfileKind,
    RelativeReport,
    compare,
    flops_per_sample,
    simulate,
)
from .errors import ConfigError, DataError, InvariantViolation, ScaleplanError
from .metrics import (
    CalibrationReport,
    PredictionRecord,
    VarianceGrouping,
    accuracy_by_resolution,
    delta_table,
    ece,
    embedding_variance,
    entropy,
    entropy_stats,
    skewness,
    skewness_curve,
)
from .planner import (
    CoverageReport,
    EpochPlan,
    IterationSpec,
    SamplerConfig,
    SamplerKind,
    SyncMode,
    plan_epoch,
    plan_run,
    verify_plan,
)
from .respool import ReferenceShape, ResolutionPool, batch_size_for, build_pool, compress_pool
from .schedule import CurriculumSchedule, ScheduleKind, schedule_table, schedule_value

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConfigError",
    "DataError",
    "InvariantViolation",
    "ScaleplanError",
    "CurriculumSchedule",
    "ScheduleKind",
    "schedule_value",
    "schedule_table",
    "ReferenceShape",
    "ResolutionPool",
    "build_pool",
    "compress_pool",
    "batch_size_for",
    "SamplerConfig",
    "SamplerKind",
    "SyncMode",
    "IterationSpec",
    "EpochPlan",
    "CoverageReport",
    "plan_epoch",
    "plan_run",
    "verify_plan",
    "CostProfile",
    "ProfileKind",
    "CostReport",
    "RelativeReport",
    "flops_per_sample",
    "simulate",
    "compare",
    "PredictionRecord",
    "CalibrationReport",
    "VarianceGrouping",
    "entropy",
    "entropy_stats",
    "skewness",
    "skewness_curve",
    "ece",
    "embedding_variance",
    "accuracy_by_resolution",
    "delta_table",
]
