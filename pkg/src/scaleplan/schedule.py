"""Compression-factor schedules for curriculum resolution expansion.

A schedule maps a training epoch ``e`` to a factor ``rho(e)`` in ``(0, 1]``
that scales every resolution in a sampling pool. Training starts from a
compressed pool (``rho(0) = rho0``) and expands monotonically until the full
pool is reached after ``ceil(tau * total_epochs)`` epochs, where it stays.

All kinds guarantee, exactly in float64:

* ``rho(0) == rho0``
* ``rho(e) == 1.0`` for every ``e >= tau * total_epochs``
* ``rho`` is non-decreasing in ``e``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigError

__all__ = [
    "ScheduleKind",
    "CurriculumSchedule",
    "schedule_value",
    "schedule_table",
    "DEFAULT_RHO0",
    "DEFAULT_TAU",
]

DEFAULT_RHO0 = 0.75
DEFAULT_TAU = 0.5
DEFAULT_POLY_POWER = 2.0


class ScheduleKind(str, Enum):
    LINEAR = "linear"
    COSINE = "cosine"
    POLYNOMIAL = "polynomial"
    MULTISTEP = "multistep"


def _default_steps(rho0: float, tau: float) -> tuple[tuple[float, float], ...]:
    """Default multistep table: half the ramp at rho0/midpoint, full pool at tau."""
    return ((0.0, rho0), (tau / 2.0, (1.0 + rho0) / 2.0), (tau, 1.0))


@dataclass(frozen=True)
class CurriculumSchedule:
    """Parameters of one compression schedule.

    ``steps`` is only meaningful for the multistep kind: a sequence of
    ``(epoch_fraction, rho)`` pairs, right-continuous, starting at
    ``(0, rho0)`` and ending at a fraction <= tau with rho 1.0. When omitted
    it is derived from ``rho0`` and ``tau``.
    """

    kind: ScheduleKind
    rho0: float = DEFAULT_RHO0
    tau: float = DEFAULT_TAU
    total_epochs: int = 1
    poly_power: float = DEFAULT_POLY_POWER
    steps: tuple[tuple[float, float], ...] | None = field(default=None)

    def __post_init__(self) -> None:
        kind = ScheduleKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not 0.0 < self.rho0 <= 1.0:
            raise ConfigError(
                f"rho0 must lie in (0, 1], got {self.rho0}", code="curriculum.rho0"
            )
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(
                f"tau must lie in (0, 1], got {self.tau}", code="curriculum.tau"
            )
        if self.total_epochs < 1:
            raise ConfigError(
                f"total_epochs must be >= 1, got {self.total_epochs}",
                code="curriculum.total_epochs",
            )
        if kind is ScheduleKind.POLYNOMIAL and not self.poly_power > 0:
            raise ConfigError(
                f"poly_power must be > 0, got {self.poly_power}",
                code="curriculum.poly_power",
            )
        if kind is ScheduleKind.MULTISTEP:
            steps = self.steps if self.steps is not None else _default_steps(self.rho0, self.tau)
            steps = tuple((float(f), float(v)) for f, v in steps)
            self._validate_steps(steps)
            object.__setattr__(self, "steps", steps)
        elif self.steps is not None:
            raise ConfigError(
                f"steps is only valid for the multistep kind, not {kind.value}",
                code="curriculum.steps",
            )

    def _validate_steps(self, steps: tuple[tuple[float, float], ...]) -> None:
        if not steps:
            raise ConfigError("multistep table must be non-empty", code="curriculum.steps")
        if steps[0][0] != 0.0 or steps[0][1] != self.rho0:
            raise ConfigError(
                f"multistep table must start at (0, rho0={self.rho0}), got {steps[0]}",
                code="curriculum.steps",
            )
        fracs = [f for f, _ in steps]
        vals = [v for _, v in steps]
        if any(b < a for a, b in zip(fracs, fracs[1:])):
            raise ConfigError(
                "multistep fractions must be non-decreasing", code="curriculum.steps"
            )
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ConfigError(
                "multistep values must be non-decreasing", code="curriculum.steps"
            )
        if fracs[-1] > self.tau:
            raise ConfigError(
                f"last multistep fraction {fracs[-1]} exceeds tau={self.tau}",
                code="curriculum.steps",
            )
        if vals[-1] != 1.0:
            raise ConfigError(
                f"last multistep value must be 1.0, got {vals[-1]}", code="curriculum.steps"
            )
        if any(not 0.0 < v <= 1.0 for v in vals):
            raise ConfigError(
                "multistep values must lie in (0, 1]", code="curriculum.steps"
            )


def schedule_value(sched: CurriculumSchedule, epoch: int) -> float:
    """Compression factor for ``epoch`` (0-based, < total_epochs)."""
    if not 0 <= epoch < sched.total_epochs:
        raise ConfigError(
            f"epoch {epoch} outside [0, {sched.total_epochs})", code="schedule.epoch"
        )
    ramp = sched.tau * sched.total_epochs
    if epoch == 0:
        return sched.rho0
    if epoch >= ramp:
        return 1.0
    if sched.kind is ScheduleKind.LINEAR:
        return sched.rho0 + (1.0 - sched.rho0) * (epoch / ramp)
    if sched.kind is ScheduleKind.COSINE:
        return sched.rho0 + (1.0 - sched.rho0) * (1.0 - math.cos(math.pi * epoch / ramp)) / 2.0
    if sched.kind is ScheduleKind.POLYNOMIAL:
        return sched.rho0 + (1.0 - sched.rho0) * (epoch / ramp) ** sched.poly_power
    # multistep: value of the last step whose fraction <= e / total_epochs
    frac = epoch / sched.total_epochs
    value = sched.rho0
    for f, v in sched.steps:  # type: ignore[union-attr]  # steps set in __post_init__
        if frac >= f:
            value = v
        else:
            break
    return value


def schedule_table(sched: CurriculumSchedule) -> list[tuple[int, float]]:
    """(epoch, rho) rows for the whole run, for plotting and the CLI."""
    return [(e, schedule_value(sched, e)) for e in range(sched.total_epochs)]
