"""File formats: run configs, plan files, prediction dumps, cost reports.

All record files are line-delimited JSON in canonical encoding (sorted keys,
compact separators, shortest round-tripping floats): semantically equal
artifacts are byte-identical, so determinism checks can compare bytes. Every
file starts with a header record carrying a ``format`` name and ``version``.

Config parsing is strict: unknown fields are rejected and every error names
the dotted path of the offending field.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping

import numpy as np

from .costmodel import CostProfile, CostReport, EpochCost, ProfileKind, RelativeReport, cfg_mapping
from .encoding import canonical_json
from .errors import ConfigError, DataError
from .metrics import PredictionRecord
from .planner import EpochPlan, IterationSpec, SamplerConfig, SamplerKind, SyncMode
from .respool import ReferenceShape, ResolutionPool, build_pool
from .schedule import CurriculumSchedule, ScheduleKind

__all__ = [
    "FORMAT_VERSION",
    "RunConfig",
    "DumpHeader",
    "load_config",
    "parse_config",
    "parse_sampler",
    "parse_profile",
    "set_override",
    "write_plan",
    "read_plan",
    "write_dump",
    "read_dump",
    "iter_dump",
    "write_cost_report",
    "read_cost_report",
    "format_cost_summary",
    "format_relative_table",
]

logger = logging.getLogger("scaleplan.io")

FORMAT_VERSION = 1
PLAN_FORMAT = "scaleplan.plan"
DUMP_FORMAT = "scaleplan.predictions"
REPORT_FORMAT = "scaleplan.cost_report"

_PROB_SUM_TOLERANCE = 1e-4


# ---------------------------------------------------------------------------
# strict mapping helpers

def _as_mapping(value: Any, path: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise ConfigError(f"{path} must be an object, got {type(value).__name__}", code=path)
    return value


def _check_keys(m: Mapping, path: str, required: set[str], optional: set[str]) -> None:
    unknown = sorted(set(m) - required - optional)
    if unknown:
        raise ConfigError(
            f"unknown field {path}.{unknown[0]}" + (f" (+{len(unknown) - 1} more)" if len(unknown) > 1 else ""),
            code=f"{path}.{unknown[0]}",
        )
    missing = sorted(required - set(m))
    if missing:
        raise ConfigError(f"missing required field {path}.{missing[0]}", code=f"{path}.{missing[0]}")


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer, got {value!r}", code=path)
    return value


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path} must be a number, got {value!r}", code=path)
    return float(value)


def _as_bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path} must be a boolean, got {value!r}", code=path)
    return value


def _as_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path} must be a string, got {value!r}", code=path)
    return value


def _as_pair(value: Any, path: str) -> tuple[int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{path} must be a [height, width] pair, got {value!r}", code=path)
    return (_as_int(value[0], path), _as_int(value[1], path))


# ---------------------------------------------------------------------------
# config parsing

def _parse_reference(value: Any, path: str) -> ReferenceShape:
    m = _as_mapping(value, path)
    _check_keys(m, path, {"batch", "channels", "height", "width"}, set())
    return ReferenceShape(
        batch=_as_int(m["batch"], f"{path}.batch"),
        channels=_as_int(m["channels"], f"{path}.channels"),
        height=_as_int(m["height"], f"{path}.height"),
        width=_as_int(m["width"], f"{path}.width"),
    )


def _parse_pool(value: Any, path: str) -> ResolutionPool:
    m = _as_mapping(value, path)
    divisor = _as_int(m.get("divisor", 32), f"{path}.divisor")
    if "resolutions" in m:
        _check_keys(m, path, {"resolutions"}, {"divisor"})
        raw = m["resolutions"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError(f"{path}.resolutions must be a non-empty list", code=f"{path}.resolutions")
        res = tuple(_as_pair(r, f"{path}.resolutions") for r in raw)
        return ResolutionPool(res, divisor=divisor)
    _check_keys(m, path, {"min", "max"}, {"divisor"})
    return build_pool(
        _as_pair(m["min"], f"{path}.min"), _as_pair(m["max"], f"{path}.max"), divisor=divisor
    )


def _parse_curriculum(value: Any, path: str, default_total: int) -> CurriculumSchedule:
    m = _as_mapping(value, path)
    _check_keys(m, path, {"kind"}, {"rho0", "tau", "total_epochs", "poly_power", "steps"})
    kind = _as_str(m["kind"], f"{path}.kind")
    try:
        kind_e = ScheduleKind(kind)
    except ValueError:
        raise ConfigError(
            f"{path}.kind must be one of {[k.value for k in ScheduleKind]}, got {kind!r}",
            code=f"{path}.kind",
        ) from None
    steps = None
    if "steps" in m:
        raw = m["steps"]
        if not isinstance(raw, list):
            raise ConfigError(f"{path}.steps must be a list", code=f"{path}.steps")
        steps = tuple(
            (_as_float(s[0], f"{path}.steps"), _as_float(s[1], f"{path}.steps"))
            if isinstance(s, (list, tuple)) and len(s) == 2
            else _raise_steps(path)
            for s in raw
        )
    kwargs: dict[str, Any] = dict(
        kind=kind_e,
        total_epochs=_as_int(m.get("total_epochs", default_total), f"{path}.total_epochs"),
        steps=steps,
    )
    if "rho0" in m:
        kwargs["rho0"] = _as_float(m["rho0"], f"{path}.rho0")
    if "tau" in m:
        kwargs["tau"] = _as_float(m["tau"], f"{path}.tau")
    if "poly_power" in m:
        kwargs["poly_power"] = _as_float(m["poly_power"], f"{path}.poly_power")
    return CurriculumSchedule(**kwargs)


def _raise_steps(path: str):
    raise ConfigError(f"{path}.steps entries must be [fraction, rho] pairs", code=f"{path}.steps")


def parse_sampler(value: Any, path: str = "sampler") -> SamplerConfig:
    m = _as_mapping(value, path)
    _check_keys(
        m,
        path,
        {"kind", "reference", "dataset_size", "epochs"},
        {"pool", "curriculum", "world_size", "seed", "resolution_sync", "drop_last"},
    )
    kind_raw = _as_str(m["kind"], f"{path}.kind")
    try:
        kind = SamplerKind(kind_raw)
    except ValueError:
        raise ConfigError(
            f"{path}.kind must be one of {[k.value for k in SamplerKind]}, got {kind_raw!r}",
            code=f"{path}.kind",
        ) from None
    epochs = _as_int(m["epochs"], f"{path}.epochs")
    pool = _parse_pool(m["pool"], f"{path}.pool") if "pool" in m else None
    curriculum = None
    if "curriculum" in m:
        curriculum = _parse_curriculum(m["curriculum"], f"{path}.curriculum", epochs)
    elif kind is SamplerKind.MSC_VBSWC:
        curriculum = CurriculumSchedule(kind=ScheduleKind.COSINE, total_epochs=epochs)
    sync_raw = _as_str(m.get("resolution_sync", "synchronized"), f"{path}.resolution_sync")
    try:
        sync = SyncMode(sync_raw)
    except ValueError:
        raise ConfigError(
            f"{path}.resolution_sync must be one of {[s.value for s in SyncMode]}, got {sync_raw!r}",
            code=f"{path}.resolution_sync",
        ) from None
    return SamplerConfig(
        kind=kind,
        reference=_parse_reference(m["reference"], f"{path}.reference"),
        dataset_size=_as_int(m["dataset_size"], f"{path}.dataset_size"),
        epochs=epochs,
        pool=pool,
        curriculum=curriculum,
        world_size=_as_int(m.get("world_size", 1), f"{path}.world_size"),
        seed=_as_int(m.get("seed", 0), f"{path}.seed"),
        resolution_sync=sync,
        drop_last=_as_bool(m.get("drop_last", False), f"{path}.drop_last"),
    )


def parse_profile(value: Any, path: str = "profile") -> CostProfile:
    m = _as_mapping(value, path)
    kind_raw = _as_str(m.get("kind", "analytic"), f"{path}.kind")
    try:
        kind = ProfileKind(kind_raw)
    except ValueError:
        raise ConfigError(
            f"{path}.kind must be one of {[k.value for k in ProfileKind]}, got {kind_raw!r}",
            code=f"{path}.kind",
        ) from None
    common = {"kind", "act_units_per_pixel", "depth_factor"}
    kwargs: dict[str, Any] = {"kind": kind}
    if "act_units_per_pixel" in m:
        kwargs["act_units_per_pixel"] = _as_float(m["act_units_per_pixel"], f"{path}.act_units_per_pixel")
    if "depth_factor" in m:
        kwargs["depth_factor"] = _as_float(m["depth_factor"], f"{path}.depth_factor")
    if kind is ProfileKind.ANALYTIC:
        _check_keys(m, path, set(), common | {"per_pixel_flops", "fixed_flops"})
        if "per_pixel_flops" in m:
            kwargs["per_pixel_flops"] = _as_float(m["per_pixel_flops"], f"{path}.per_pixel_flops")
        if "fixed_flops" in m:
            kwargs["fixed_flops"] = _as_float(m["fixed_flops"], f"{path}.fixed_flops")
    else:
        _check_keys(m, path, {"table"}, common)
        raw = m["table"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError(f"{path}.table must be a non-empty list", code=f"{path}.table")
        table = []
        for row in raw:
            if not isinstance(row, (list, tuple)) or len(row) != 3:
                raise ConfigError(
                    f"{path}.table entries must be [height, width, flops]", code=f"{path}.table"
                )
            table.append(
                (_as_int(row[0], f"{path}.table"), _as_int(row[1], f"{path}.table"),
                 _as_float(row[2], f"{path}.table"))
            )
        kwargs["table"] = tuple(table)
    return CostProfile(**kwargs)


@dataclass(frozen=True)
class RunConfig:
    sampler: SamplerConfig
    profile: CostProfile | None = None
    plan_path: str | None = None
    report_path: str | None = None


def parse_config(value: Any, source: str = "<config>") -> RunConfig:
    m = _as_mapping(value, "config")
    _check_keys(m, "config", {"format_version", "sampler"}, {"profile", "output"})
    version = _as_int(m["format_version"], "config.format_version")
    if version != FORMAT_VERSION:
        raise ConfigError(
            f"unsupported config format_version {version} (expected {FORMAT_VERSION})",
            code="config.format_version",
            location=source,
        )
    plan_path = report_path = None
    if "output" in m:
        out = _as_mapping(m["output"], "config.output")
        _check_keys(out, "config.output", set(), {"plan", "report"})
        if "plan" in out:
            plan_path = _as_str(out["plan"], "config.output.plan")
        if "report" in out:
            report_path = _as_str(out["report"], "config.output.report")
    return RunConfig(
        sampler=parse_sampler(m["sampler"]),
        profile=parse_profile(m["profile"]) if "profile" in m else None,
        plan_path=plan_path,
        report_path=report_path,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", code="config.path") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", code="config.json",
                          location=f"{path}:{e.lineno}") from None
    return parse_config(raw, source=path)


def set_override(mapping: dict, dotted_key: str, raw_value: str) -> None:
    """Apply one ``--set key.path=value`` override onto a raw config mapping.

    Values parse as JSON when possible, otherwise as literal strings.
    """
    try:
        value = json.loads(raw_value)
    except json.JSONDecodeError:
        value = raw_value
    keys = dotted_key.split(".")
    node = mapping
    for key in keys[:-1]:
        nxt = node.get(key)
        if nxt is None:
            nxt = node[key] = {}
        if not isinstance(nxt, dict):
            raise ConfigError(
                f"cannot override {dotted_key}: {key} is not an object", code=dotted_key
            )
        node = nxt
    node[keys[-1]] = value


# ---------------------------------------------------------------------------
# plan files

def write_plan(cfg: SamplerConfig, plans: Iterable[EpochPlan], path: str) -> None:
    """Write epoch plans as one header plus one record per (epoch, rank, step)."""
    with open(path, "w", encoding="utf-8") as f:
        header = {"format": PLAN_FORMAT, "version": FORMAT_VERSION, "sampler": cfg_mapping(cfg)}
        f.write(canonical_json(header) + "\n")
        for plan in plans:
            for steps in plan.per_rank:
                for spec in steps:
                    f.write(
                        canonical_json(
                            {
                                "epoch": spec.epoch,
                                "rank": spec.rank,
                                "step": spec.step,
                                "h": spec.height,
                                "w": spec.width,
                                "batch": spec.batch_size,
                                "indices": spec.indices.tolist(),
                            }
                        )
                        + "\n"
                    )


def _load_json_line(line: str, path: str, lineno: int, last_good: int) -> Any:
    try:
        return json.loads(line)
    except json.JSONDecodeError:
        raise DataError(
            f"corrupt or truncated record (last complete record at line {last_good})",
            code="record.corrupt",
            location=f"{path}:{lineno}",
        ) from None


def read_plan(path: str) -> tuple[SamplerConfig, list[EpochPlan]]:
    """Read a plan file (or several concatenated ones for the same config).

    Epoch plans return sorted by epoch. Concatenated segments must carry
    byte-identical sampler configs; duplicate (epoch, rank, step) records are
    rejected.
    """
    cfg: SamplerConfig | None = None
    header_json: str | None = None
    records: dict[int, dict[int, list[tuple[int, int, int, int, np.ndarray]]]] = {}
    try:
        f = open(path, "r", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"plan file not found: {path}", code="plan.path") from None
    last_good = 0
    with f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            obj = _load_json_line(line, path, lineno, last_good)
            loc = f"{path}:{lineno}"
            if isinstance(obj, Mapping) and "format" in obj:
                if obj.get("format") != PLAN_FORMAT:
                    raise DataError(
                        f"not a plan file (format {obj.get('format')!r})",
                        code="plan.format", location=loc,
                    )
                if obj.get("version") != FORMAT_VERSION:
                    raise DataError(
                        f"unsupported plan version {obj.get('version')!r} "
                        f"(expected {FORMAT_VERSION})",
                        code="plan.version", location=loc,
                    )
                sampler_json = canonical_json(obj.get("sampler"))
                if cfg is None:
                    cfg = parse_sampler(obj.get("sampler"))
                    header_json = sampler_json
                elif sampler_json != header_json:
                    raise DataError(
                        "concatenated plan segments carry different configs",
                        code="plan.header", location=loc,
                    )
                last_good = lineno
                continue
            if cfg is None:
                raise DataError("plan record before header", code="plan.header", location=loc)
            m = _as_mapping(obj, "record")
            for key in ("epoch", "rank", "step", "h", "w", "batch", "indices"):
                if key not in m:
                    raise DataError(f"plan record lacks {key!r}", code="plan.record", location=loc)
            epoch, rank = int(m["epoch"]), int(m["rank"])
            if not 0 <= epoch < cfg.epochs:
                raise DataError(f"epoch {epoch} outside config range", code="plan.record", location=loc)
            if not 0 <= rank < cfg.world_size:
                raise DataError(f"rank {rank} outside config range", code="plan.record", location=loc)
            records.setdefault(epoch, {}).setdefault(rank, []).append(
                (int(m["step"]), int(m["h"]), int(m["w"]), int(m["batch"]),
                 np.asarray(m["indices"], dtype=np.int64))
            )
            last_good = lineno
    if cfg is None:
        raise DataError("empty plan file", code="plan.empty", location=path)
    plans: list[EpochPlan] = []
    for epoch in sorted(records):
        by_rank = records[epoch]
        missing_ranks = set(range(cfg.world_size)) - set(by_rank)
        if missing_ranks:
            raise DataError(
                f"epoch {epoch} lacks records for rank {min(missing_ranks)}",
                code="plan.record", location=path,
            )
        per_rank: list[list[IterationSpec]] = []
        for rank in range(cfg.world_size):
            entries = sorted(by_rank[rank], key=lambda t: t[0])
            steps = [t[0] for t in entries]
            if steps != list(range(len(steps))):
                raise DataError(
                    f"epoch {epoch} rank {rank} has duplicate or missing steps",
                    code="plan.record", location=path,
                )
            per_rank.append(
                [IterationSpec(epoch, s, rank, h, w, b, idx) for s, h, w, b, idx in entries]
            )
        plans.append(EpochPlan(epoch=epoch, active_pool=cfg.active_pool(epoch), per_rank=per_rank))
    return cfg, plans


# ---------------------------------------------------------------------------
# prediction dumps

@dataclass(frozen=True)
class DumpHeader:
    num_classes: int
    embed_dim: int | None = None


def write_dump(
    records: Iterable[PredictionRecord],
    path: str,
    *,
    num_classes: int,
    embed_dim: int | None = None,
) -> None:
    with open(path, "w", encoding="utf-8") as f:
        header: dict[str, Any] = {
            "format": DUMP_FORMAT,
            "version": FORMAT_VERSION,
            "num_classes": num_classes,
        }
        if embed_dim is not None:
            header["embed_dim"] = embed_dim
        f.write(canonical_json(header) + "\n")
        for rec in records:
            obj: dict[str, Any] = {
                "image_id": rec.image_id,
                "label": rec.label,
                "probs": [float(p) for p in rec.probs],
                "h": rec.eval_height,
                "w": rec.eval_width,
            }
            if rec.embedding is not None:
                obj["embedding"] = [float(x) for x in rec.embedding]
            if rec.epoch is not None:
                obj["epoch"] = rec.epoch
            f.write(canonical_json(obj) + "\n")


def _parse_dump_header(obj: Any, path: str, lineno: int) -> DumpHeader:
    loc = f"{path}:{lineno}"
    if not isinstance(obj, Mapping) or obj.get("format") != DUMP_FORMAT:
        raise DataError("not a prediction dump (missing header)", code="dump.format", location=loc)
    if obj.get("version") != FORMAT_VERSION:
        raise DataError(
            f"unsupported dump version {obj.get('version')!r} (expected {FORMAT_VERSION})",
            code="dump.version", location=loc,
        )
    num_classes = obj.get("num_classes")
    if not isinstance(num_classes, int) or num_classes < 2:
        raise DataError("header num_classes must be an integer >= 2", code="dump.num_classes", location=loc)
    embed_dim = obj.get("embed_dim")
    if embed_dim is not None and (not isinstance(embed_dim, int) or embed_dim < 1):
        raise DataError("header embed_dim must be a positive integer", code="dump.embed_dim", location=loc)
    extra = set(obj) - {"format", "version", "num_classes", "embed_dim"}
    if extra:
        raise DataError(f"unknown header field {sorted(extra)[0]!r}", code="dump.header", location=loc)
    return DumpHeader(num_classes=num_classes, embed_dim=embed_dim)


def _parse_dump_record(
    obj: Any, header: DumpHeader, path: str, lineno: int, warn_state: dict
) -> PredictionRecord:
    loc = f"{path}:{lineno}"
    m = _as_mapping(obj, "record")
    required = {"image_id", "label", "probs", "h", "w"}
    allowed = required | {"embedding", "epoch"}
    missing = required - set(m)
    if missing:
        raise DataError(f"record lacks {sorted(missing)[0]!r}", code="dump.record", location=loc)
    extra = set(m) - allowed
    if extra:
        raise DataError(f"unknown record field {sorted(extra)[0]!r}", code="dump.record", location=loc)
    probs_raw = m["probs"]
    if not isinstance(probs_raw, list) or len(probs_raw) != header.num_classes:
        raise DataError(
            f"probs must list {header.num_classes} values, got "
            f"{len(probs_raw) if isinstance(probs_raw, list) else type(probs_raw).__name__}",
            code="dump.probs", location=loc,
        )
    probs = np.asarray(probs_raw, dtype=np.float64)
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise DataError("probs must be finite and non-negative", code="dump.probs", location=loc)
    total = math.fsum(probs_raw)
    if total <= 0:
        raise DataError("probs sum to zero", code="dump.probs", location=loc)
    if abs(total - 1.0) > _PROB_SUM_TOLERANCE and not warn_state.get("warned"):
        warn_state["warned"] = True
        logger.warning(
            "%s: probs sum to %.6f; renormalizing (further occurrences suppressed)", loc, total
        )
    probs = probs / total
    label = m["label"]
    if not isinstance(label, int) or not 0 <= label < header.num_classes:
        raise DataError(
            f"label must be an integer in [0, {header.num_classes}), got {label!r}",
            code="dump.label", location=loc,
        )
    embedding = None
    if "embedding" in m:
        if header.embed_dim is None:
            raise DataError(
                "record carries an embedding but header declares no embed_dim",
                code="dump.embedding", location=loc,
            )
        emb_raw = m["embedding"]
        if not isinstance(emb_raw, list) or len(emb_raw) != header.embed_dim:
            raise DataError(
                f"embedding must list {header.embed_dim} values", code="dump.embedding", location=loc
            )
        embedding = np.asarray(emb_raw, dtype=np.float64)
    epoch = m.get("epoch")
    if epoch is not None and (not isinstance(epoch, int) or epoch < 0):
        raise DataError("epoch must be a non-negative integer", code="dump.epoch", location=loc)
    h = m["h"]
    w = m["w"]
    if not isinstance(h, int) or not isinstance(w, int) or h < 1 or w < 1:
        raise DataError("h and w must be positive integers", code="dump.resolution", location=loc)
    return PredictionRecord(
        image_id=str(m["image_id"]),
        label=label,
        probs=probs,
        eval_height=h,
        eval_width=w,
        embedding=embedding,
        epoch=epoch,
    )


def iter_dump(path: str) -> Iterator[PredictionRecord]:
    """Stream records from a dump without materializing the whole file."""
    try:
        f = open(path, "r", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"dump file not found: {path}", code="dump.path") from None
    header: DumpHeader | None = None
    warn_state: dict = {}
    last_good = 0
    with f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            obj = _load_json_line(line, path, lineno, last_good)
            if header is None:
                header = _parse_dump_header(obj, path, lineno)
            else:
                yield _parse_dump_record(obj, header, path, lineno, warn_state)
            last_good = lineno
    if header is None:
        raise DataError("empty dump file", code="dump.empty", location=path)


def read_dump(path: str) -> tuple[DumpHeader, list[PredictionRecord]]:
    try:
        f = open(path, "r", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"dump file not found: {path}", code="dump.path") from None
    header: DumpHeader | None = None
    records: list[PredictionRecord] = []
    warn_state: dict = {}
    last_good = 0
    with f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            obj = _load_json_line(line, path, lineno, last_good)
            if header is None:
                header = _parse_dump_header(obj, path, lineno)
            else:
                records.append(_parse_dump_record(obj, header, path, lineno, warn_state))
            last_good = lineno
    if header is None:
        raise DataError("empty dump file", code="dump.empty", location=path)
    return header, records


# ---------------------------------------------------------------------------
# cost reports

def write_cost_report(report: CostReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(
            canonical_json(
                {
                    "format": REPORT_FORMAT,
                    "version": FORMAT_VERSION,
                    "mode": report.mode,
                    "seeds": list(report.seeds),
                    "config_digest": report.config_digest,
                    "profile_digest": report.profile_digest,
                }
            )
            + "\n"
        )
        for c in report.per_epoch:
            f.write(
                canonical_json(
                    {"record": "epoch", "epoch": c.epoch, "flops": c.flops, "updates": c.updates}
                )
                + "\n"
            )
        f.write(
            canonical_json(
                {
                    "record": "total",
                    "flops": report.total_flops,
                    "updates": report.updates,
                    "peak_activation_units": report.peak_activation_units,
                }
            )
            + "\n"
        )


def read_cost_report(path: str) -> CostReport:
    try:
        f = open(path, "r", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"report file not found: {path}", code="report.path") from None
    header = None
    per_epoch: list[EpochCost] = []
    total = None
    last_good = 0
    with f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            obj = _load_json_line(line, path, lineno, last_good)
            loc = f"{path}:{lineno}"
            if header is None:
                if not isinstance(obj, Mapping) or obj.get("format") != REPORT_FORMAT:
                    raise DataError("not a cost report", code="report.format", location=loc)
                if obj.get("version") != FORMAT_VERSION:
                    raise DataError(
                        f"unsupported report version {obj.get('version')!r}",
                        code="report.version", location=loc,
                    )
                header = obj
            elif obj.get("record") == "epoch":
                per_epoch.append(EpochCost(int(obj["epoch"]), float(obj["flops"]), int(obj["updates"])))
            elif obj.get("record") == "total":
                total = obj
            else:
                raise DataError(f"unknown record {obj.get('record')!r}", code="report.record", location=loc)
            last_good = lineno
    if header is None or total is None:
        raise DataError("incomplete cost report", code="report.incomplete", location=path)
    return CostReport(
        config_digest=str(header["config_digest"]),
        profile_digest=str(header["profile_digest"]),
        mode=str(header["mode"]),
        seeds=tuple(int(s) for s in header.get("seeds", [])),
        total_flops=float(total["flops"]),
        updates=int(total["updates"]),
        peak_activation_units=float(total["peak_activation_units"]),
        per_epoch=tuple(per_epoch),
    )


# ---------------------------------------------------------------------------
# human-readable tables

def format_cost_summary(report: CostReport, name: str = "") -> str:
    label = f"{name}: " if name else ""
    seeds = f" seeds={list(report.seeds)}" if report.seeds else ""
    return (
        f"{label}updates={report.updates} flops={report.total_flops:.6g} "
        f"peak={report.peak_activation_units:.6g} (mode={report.mode}{seeds})"
    )


def format_relative_table(rows: Iterable[tuple[str, RelativeReport]]) -> str:
    rows = list(rows)
    name_w = max([len(name) for name, _ in rows] + [len("sampler")])
    lines = [f"{'sampler'.ljust(name_w)}  flops   updates  peak"]
    for name, rel in rows:
        lines.append(
            f"{name.ljust(name_w)}  {rel.flops_ratio:.2f}x   {rel.updates_ratio:.2f}x    {rel.peak_ratio:.2f}x"
        )
    return "\n".join(lines)
