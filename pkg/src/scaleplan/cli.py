"""Command-line interface.

Verbs:

* ``plan``      — materialize a batch plan file from a run config
* ``verify``    — audit a plan file against its embedded config
* ``simulate``  — compute a cost report (optionally relative to a baseline config)
* ``compare``   — relative table from two cost report files
* ``metrics``   — calibration/robustness metrics over a prediction dump
* ``schedules`` — tabulate the curriculum compression factor per epoch

Exit codes: 0 success, 2 config error, 3 data error, 4 invariant violation.
``SCALEPLAN_LOG`` sets the log level (default WARNING). Output carries no
timestamps, so repeated invocations are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

from . import costmodel, io, metrics
from .errors import ConfigError, DataError, InvariantViolation, ScaleplanError
from .planner import SamplerConfig, SamplerKind, SyncMode, plan_run, verify_plan
from .schedule import schedule_table

__all__ = ["main"]


def _load_run_config(args: argparse.Namespace) -> io.RunConfig:
    try:
        with open(args.config, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {args.config}", code="config.path") from None
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"invalid JSON: {e.msg}", code="config.json", location=f"{args.config}:{e.lineno}"
        ) from None
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key.path=value, got {item!r}", code="cli.set")
        key, _, value = item.partition("=")
        io.set_override(raw, key.strip(), value)
    return io.parse_config(raw, source=args.config)


def _parse_seeds(raw: str | None) -> list[int] | None:
    if raw is None:
        return None
    try:
        return [int(s) for s in raw.split(",") if s.strip() != ""]
    except ValueError:
        raise ConfigError(f"--seeds expects comma-separated integers, got {raw!r}",
                          code="cli.seeds") from None


def _cmd_plan(args: argparse.Namespace) -> int:
    rc = _load_run_config(args)
    out = args.out or rc.plan_path
    if not out:
        raise ConfigError("no output path: pass --out or set output.plan", code="cli.out")
    cfg = rc.sampler
    io.write_plan(cfg, plan_run(cfg), out)
    print(f"wrote plan {out} (epochs={cfg.epochs} ranks={cfg.world_size} "
          f"dataset={cfg.dataset_size} kind={cfg.kind.value})")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    cfg, plans = io.read_plan(args.plan)
    violations: list[str] = []
    for plan in plans:
        report = verify_plan(plan, cfg)
        steps = report.per_rank_steps
        print(
            f"epoch {report.epoch}: steps={steps[0] if len(set(steps)) == 1 else list(steps)} "
            f"covered={report.covered}/{report.dataset_size} duplicates={report.duplicates} "
            f"missing={report.missing} padding={report.padding} "
            f"max_budget={report.max_pixel_budget}"
        )
        if len(set(steps)) != 1:
            violations.append(f"epoch {report.epoch}: ranks disagree on step count {list(steps)}")
        if report.duplicates:
            violations.append(f"epoch {report.epoch}: {report.duplicates} duplicate indices")
        if report.missing and not cfg.drop_last:
            violations.append(f"epoch {report.epoch}: {report.missing} indices never sampled")
        if report.padding and cfg.resolution_sync is SyncMode.SYNCHRONIZED:
            violations.append(f"epoch {report.epoch}: padding in synchronized mode")
        if cfg.variable_batch:
            budget = cfg.reference.pixel_budget
            for steps in plan.per_rank:
                for spec in steps:
                    # floor clamp: a lone sample may legitimately exceed the budget
                    if spec.batch_size > 1 and spec.pixel_budget > budget:
                        violations.append(
                            f"epoch {report.epoch}: step {spec.step} budget "
                            f"{spec.pixel_budget} exceeds reference {budget}"
                        )
                        break
    if violations:
        raise InvariantViolation("; ".join(violations), code="verify.failed")
    print(f"plan OK ({len(plans)} epochs)")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    rc = _load_run_config(args)
    profile = rc.profile or costmodel.CostProfile()
    seeds = _parse_seeds(args.seeds)
    report = costmodel.simulate(rc.sampler, profile, mode=args.mode, seeds=seeds)
    print(io.format_cost_summary(report, name=rc.sampler.kind.value))
    if args.baseline:
        base_rc = io.load_config(args.baseline)
        base_profile = base_rc.profile or profile
        base_report = costmodel.simulate(base_rc.sampler, base_profile, mode=args.mode, seeds=seeds)
        rel = costmodel.compare(report, base_report)
        print(io.format_relative_table(
            [(f"{rc.sampler.kind.value} vs {base_rc.sampler.kind.value}", rel)]
        ))
    out = args.out or rc.report_path
    if out:
        io.write_cost_report(report, out)
        print(f"wrote report {out}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    candidate = io.read_cost_report(args.candidate)
    baseline = io.read_cost_report(args.baseline)
    rel = costmodel.compare(candidate, baseline)
    table = io.format_relative_table([(args.name, rel)])
    print(table)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(table + "\n")
    return 0


def _metric_rows(args: argparse.Namespace) -> list[str]:
    op = args.op
    if op == "delta":
        try:
            with open(args.input, "r", encoding="utf-8") as f:
                candidate = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(f"cannot read metric map {args.input}: {e}", code="delta.input") from None
        if not args.baseline:
            raise ConfigError("delta requires --baseline metric map", code="cli.baseline")
        try:
            with open(args.baseline, "r", encoding="utf-8") as f:
                baseline = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(f"cannot read metric map {args.baseline}: {e}", code="delta.baseline") from None
        return metrics.delta_table(candidate, baseline).splitlines()

    if op == "ece":
        report = metrics.ece(io.iter_dump(args.input), num_bins=args.bins)
        rows = [f"ece={report.ece:.6f} bins={report.num_bins} records={report.total}"]
        for b in report.bins:
            if b.count:
                rows.append(
                    f"bin ({b.lower:.4f}, {b.upper:.4f}]: count={b.count} "
                    f"accuracy={b.accuracy:.4f} confidence={b.mean_confidence:.4f}"
                )
        return rows
    if op == "entropy":
        stats = metrics.entropy_stats(io.iter_dump(args.input))
        skew = "n/a" if stats.skewness is None else f"{stats.skewness:.6f}"
        return [f"entropy mean={stats.mean:.6f} std={stats.std:.6f} skewness={skew} "
                f"records={len(stats.entropies)}"]
    if op == "skewness-curve":
        curve = metrics.skewness_curve(io.iter_dump(args.input))
        return [
            f"epoch {e}: skewness={'n/a' if s is None else f'{s:.6f}'}" for e, s in curve
        ]
    if op == "embedding-variance":
        grouping = metrics.VarianceGrouping(args.grouping)
        table = metrics.embedding_variance(io.iter_dump(args.input), grouping)
        rows = [
            f"{k[0]}x{k[1]}: variance={v:.6g}" if isinstance(k, tuple) else f"{k}: variance={v:.6g}"
            for k, v in sorted(table.items(), key=lambda kv: str(kv[0]))
        ]
        mean = sum(table.values()) / len(table)
        rows.append(f"mean variance ({grouping.value}): {mean:.6g}")
        return rows
    if op == "accuracy":
        table = metrics.accuracy_by_resolution(io.iter_dump(args.input))
        return [f"{h}x{w}: accuracy={acc:.4f}" for (h, w), acc in table.items()]
    raise ConfigError(f"unknown metrics op {op!r}", code="cli.metrics")


def _cmd_metrics(args: argparse.Namespace) -> int:
    rows = _metric_rows(args)
    for row in rows:
        print(row)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write("\n".join(rows) + "\n")
    return 0


def _cmd_schedules(args: argparse.Namespace) -> int:
    rc = _load_run_config(args)
    curriculum = rc.sampler.curriculum
    if curriculum is None:
        raise ConfigError(
            f"sampler kind {rc.sampler.kind.value} has no curriculum to tabulate",
            code="sampler.curriculum",
        )
    lines = ["epoch,rho"] + [f"{e},{rho!r}" for e, rho in schedule_table(curriculum)]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
        print(f"wrote schedule table {args.out} ({curriculum.total_epochs} epochs)")
    else:
        for line in lines:
            print(line)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scaleplan",
        description="Deterministic multi-scale batch plans, cost simulation, and prediction metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="run config JSON path")
        p.add_argument("--set", action="append", metavar="KEY.PATH=VALUE",
                       help="override a config field (JSON value or bare string)")

    p = sub.add_parser("plan", help="materialize a batch plan file")
    add_config_args(p)
    p.add_argument("--out", help="plan output path (default: config output.plan)")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("verify", help="audit a plan file against its embedded config")
    p.add_argument("plan", help="plan file path")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("simulate", help="compute a training-cost report")
    add_config_args(p)
    p.add_argument("--mode", choices=["expected", "montecarlo"], default="expected")
    p.add_argument("--seeds", help="comma-separated seeds (montecarlo only)")
    p.add_argument("--baseline", help="baseline run config for a relative table")
    p.add_argument("--out", help="report output path (default: config output.report)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="relative table from two cost report files")
    p.add_argument("candidate", help="candidate cost report path")
    p.add_argument("--baseline", required=True, help="baseline cost report path")
    p.add_argument("--name", default="candidate", help="row label")
    p.add_argument("--out", help="write the table to a file as well")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("metrics", help="metrics over a prediction dump")
    p.add_argument("op", choices=["ece", "entropy", "skewness-curve",
                                  "embedding-variance", "accuracy", "delta"])
    p.add_argument("input", help="prediction dump path (metric map JSON for delta)")
    p.add_argument("--bins", type=int, default=15, help="confidence bins for ece")
    p.add_argument("--grouping", choices=[g.value for g in metrics.VarianceGrouping],
                   default=metrics.VarianceGrouping.PER_RESOLUTION.value)
    p.add_argument("--baseline", help="baseline metric map JSON (delta only)")
    p.add_argument("--out", help="write rows to a file as well")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("schedules", help="tabulate the curriculum compression factor")
    add_config_args(p)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=_cmd_schedules)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("SCALEPLAN_LOG", "WARNING"), format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except InvariantViolation as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 4
    except ScaleplanError as e:  # pragma: no cover - defensive
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
