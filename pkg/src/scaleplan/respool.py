"""Resolution pools and the pixel-budget batch-size rule.

A pool is an ordered set of (height, width) pairs, every side a positive
multiple of the pool's divisor, sorted by (area, height, width) with no
duplicates. The batch-size rule keeps the per-step pixel budget of a
reference shape constant: ``b(res) = floor(B * H * W / (h * w))``, clamped
to at least 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

__all__ = [
    "ReferenceShape",
    "ResolutionPool",
    "build_pool",
    "compress_pool",
    "batch_size_for",
]


@dataclass(frozen=True)
class ReferenceShape:
    """Reference batch shape (batch, channels, height, width) whose pixel
    budget ``batch * height * width`` the variable-batch rule preserves."""

    batch: int
    channels: int
    height: int
    width: int

    def __post_init__(self) -> None:
        for name in ("batch", "channels", "height", "width"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(
                    f"reference.{name} must be a positive integer, got {value!r}",
                    code=f"reference.{name}",
                )

    @property
    def pixel_budget(self) -> int:
        return self.batch * self.height * self.width


@dataclass(frozen=True)
class ResolutionPool:
    resolutions: tuple[tuple[int, int], ...]
    divisor: int = 32

    def __post_init__(self) -> None:
        if self.divisor < 1:
            raise ConfigError(
                f"pool.divisor must be >= 1, got {self.divisor}", code="pool.divisor"
            )
        res = tuple((int(h), int(w)) for h, w in self.resolutions)
        if not res:
            raise ConfigError("pool must contain at least one resolution", code="pool.resolutions")
        for h, w in res:
            if h < 1 or w < 1:
                raise ConfigError(
                    f"resolutions must be positive, got {(h, w)}", code="pool.resolutions"
                )
            if h % self.divisor or w % self.divisor:
                raise ConfigError(
                    f"resolution {(h, w)} is not a multiple of divisor {self.divisor}",
                    code="pool.resolutions",
                )
        if len(set(res)) != len(res):
            raise ConfigError("pool contains duplicate resolutions", code="pool.resolutions")
        ordered = tuple(sorted(res, key=lambda r: (r[0] * r[1], r[0], r[1])))
        object.__setattr__(self, "resolutions", ordered)

    def __len__(self) -> int:
        return len(self.resolutions)

    @property
    def areas(self) -> tuple[int, ...]:
        return tuple(h * w for h, w in self.resolutions)


def build_pool(
    min_res: tuple[int, int], max_res: tuple[int, int], divisor: int = 32
) -> ResolutionPool:
    """All divisor-aligned resolutions on the grid between min and max (inclusive).

    Square bounds give a square ladder; rectangular bounds give the cartesian
    grid of aligned heights and widths.
    """
    (h0, w0), (h1, w1) = min_res, max_res
    if divisor < 1:
        raise ConfigError(f"divisor must be >= 1, got {divisor}", code="pool.divisor")
    for name, lo, hi in (("height", h0, h1), ("width", w0, w1)):
        if lo < 1 or hi < lo:
            raise ConfigError(
                f"pool {name} bounds must satisfy 1 <= min <= max, got ({lo}, {hi})",
                code="pool.resolutions",
            )
        if lo % divisor or hi % divisor:
            raise ConfigError(
                f"pool {name} bounds ({lo}, {hi}) must be multiples of divisor {divisor}",
                code="pool.resolutions",
            )
    heights = range(h0, h1 + 1, divisor)
    widths = range(w0, w1 + 1, divisor)
    if h0 == w0 and h1 == w1:
        res = tuple((s, s) for s in heights)
    else:
        res = tuple((h, w) for h in heights for w in widths)
    return ResolutionPool(res, divisor=divisor)


def _snap(side: int, rho: float, divisor: int) -> int:
    """Scale one side by rho and round half-up to the divisor grid, floor 1 cell."""
    return max(divisor, int(math.floor(side * rho / divisor + 0.5)) * divisor)


def compress_pool(pool: ResolutionPool, rho: float) -> ResolutionPool:
    """Pool with every resolution scaled by ``rho`` and snapped to the grid.

    Resolutions that collapse onto the same grid cell are deduplicated, so the
    result can be smaller than the input. ``rho == 1`` returns the pool
    unchanged.
    """
    if not 0.0 < rho <= 1.0:
        raise ConfigError(f"rho must lie in (0, 1], got {rho}", code="compress.rho")
    if rho == 1.0:
        return pool
    seen: dict[tuple[int, int], None] = {}
    for h, w in pool.resolutions:
        seen[(_snap(h, rho, pool.divisor), _snap(w, rho, pool.divisor))] = None
    return ResolutionPool(tuple(seen), divisor=pool.divisor)


def batch_size_for(reference: ReferenceShape, resolution: tuple[int, int]) -> int:
    """Largest batch at ``resolution`` whose pixel count does not exceed the
    reference budget (never below 1)."""
    h, w = resolution
    if h < 1 or w < 1:
        raise ConfigError(f"resolution must be positive, got {(h, w)}", code="resolution")
    return max(1, reference.pixel_budget // (h * w))
