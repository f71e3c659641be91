import json
from pathlib import Path

import pytest

from scaleplan.cli import main
from scaleplan.io import read_cost_report, read_plan

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestPlanVerify:
    def test_plan_then_verify_ok(self, tmp_path, capsys):
        plan_path = tmp_path / "plan.jsonl"
        code, out, _ = run(
            capsys, "plan", "--config", CONFIGS / "toy_mscvbs_dist.json", "--out", plan_path
        )
        assert code == 0
        assert "wrote plan" in out
        code, out, _ = run(capsys, "verify", plan_path)
        assert code == 0
        assert "plan OK (2 epochs)" in out
        assert out.count("epoch ") == 2

    def test_plan_uses_config_output_path(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run(capsys, "plan", "--config", CONFIGS / "toy_sscfbs.json")
        assert code == 0
        assert (tmp_path / "toy_sscfbs_plan.jsonl").exists()

    def test_plan_without_output_path(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        raw = json.loads((CONFIGS / "toy_sscfbs.json").read_text())
        del raw["output"]
        cfg.write_text(json.dumps(raw))
        code, _, err = run(capsys, "plan", "--config", cfg)
        assert code == 2
        assert "--out" in err

    def test_tampered_plan_fails_verify(self, tmp_path, capsys):
        plan_path = tmp_path / "plan.jsonl"
        run(capsys, "plan", "--config", CONFIGS / "toy_mscvbs_dist.json", "--out", plan_path)
        lines = plan_path.read_text().splitlines()
        record = json.loads(lines[-1])
        record["indices"] = [record["indices"][0]] * len(record["indices"])
        from scaleplan.encoding import canonical_json

        lines[-1] = canonical_json(record)
        plan_path.write_text("\n".join(lines) + "\n")
        code, _, err = run(capsys, "verify", plan_path)
        assert code == 4
        assert "duplicate" in err

    def test_verify_missing_file(self, tmp_path, capsys):
        code, _, err = run(capsys, "verify", tmp_path / "nope.jsonl")
        assert code == 3

    def test_plan_respects_set_override(self, tmp_path, capsys):
        plan_path = tmp_path / "plan.jsonl"
        code, _, _ = run(
            capsys, "plan", "--config", CONFIGS / "toy_mscvbs_dist.json",
            "--set", "sampler.epochs=1", "--out", plan_path,
        )
        assert code == 0
        _, plans = read_plan(str(plan_path))
        assert len(plans) == 1


class TestSimulate:
    def test_summary_and_report_file(self, tmp_path, capsys):
        report_path = tmp_path / "report.jsonl"
        code, out, _ = run(
            capsys, "simulate", "--config", CONFIGS / "resnet_mscvbs.json",
            "--out", report_path,
        )
        assert code == 0
        assert out.startswith("msc-vbs: updates=")
        report = read_cost_report(str(report_path))
        assert report.mode == "expected"
        assert report.updates > 0

    def test_baseline_prints_relative_row(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--config", CONFIGS / "resnet_mscvbs.json",
            "--baseline", CONFIGS / "resnet_sscfbs.json",
        )
        assert code == 0
        lines = out.splitlines()
        row = next(l for l in lines if l.startswith("msc-vbs vs ssc-fbs"))
        flops, updates, peak = [float(tok.rstrip("x")) for tok in row.split()[3:]]
        assert 0.75 <= flops <= 0.79
        assert 0.75 <= updates <= 0.79
        assert peak == 1.0

    def test_montecarlo_seeds(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "simulate", "--config", CONFIGS / "toy_mscvbs_dist.json",
            "--mode", "montecarlo", "--seeds", "5,6",
        )
        assert code == 0
        assert "seeds=[5, 6]" in out

    def test_bad_seeds_exit_2(self, capsys):
        code, _, err = run(
            capsys, "simulate", "--config", CONFIGS / "toy_mscvbs_dist.json",
            "--mode", "montecarlo", "--seeds", "1,x",
        )
        assert code == 2
        assert "--seeds" in err

    def test_seeds_with_expected_mode_exit_2(self, capsys):
        code, _, err = run(
            capsys, "simulate", "--config", CONFIGS / "toy_mscvbs_dist.json", "--seeds", "1",
        )
        assert code == 2

    def test_compare_command(self, tmp_path, capsys):
        cand, base = tmp_path / "cand.jsonl", tmp_path / "base.jsonl"
        run(capsys, "simulate", "--config", CONFIGS / "resnet_mscvbs.json", "--out", cand)
        run(capsys, "simulate", "--config", CONFIGS / "resnet_sscfbs.json", "--out", base)
        code, out, _ = run(
            capsys, "compare", cand, "--baseline", base, "--name", "vbs-vs-fixed"
        )
        assert code == 0
        assert out.splitlines()[1].startswith("vbs-vs-fixed")
        assert "0.76x" in out


class TestMetrics:
    def test_ece_on_bundled_dump(self, capsys):
        code, out, _ = run(
            capsys, "metrics", "ece", DATA / "calibrated_dump.jsonl", "--bins", "15"
        )
        assert code == 0
        first = out.splitlines()[0]
        assert first.startswith("ece=")
        assert float(first.split()[0].split("=")[1]) < 0.01

    def test_entropy(self, capsys):
        code, out, _ = run(capsys, "metrics", "entropy", DATA / "calibrated_dump.jsonl")
        assert code == 0
        assert out.startswith("entropy mean=")

    def test_skewness_curve(self, capsys):
        code, out, _ = run(capsys, "metrics", "skewness-curve", DATA / "calibrated_dump.jsonl")
        assert code == 0
        assert out.startswith("epoch 0: skewness=")

    def test_embedding_variance_groupings(self, capsys):
        code, out, _ = run(
            capsys, "metrics", "embedding-variance", DATA / "calibrated_dump.jsonl"
        )
        assert code == 0
        assert "160x160: variance=" in out
        assert "mean variance (per_resolution):" in out
        code, out, _ = run(
            capsys, "metrics", "embedding-variance", DATA / "calibrated_dump.jsonl",
            "--grouping", "per_image",
        )
        assert code == 0
        assert "mean variance (per_image):" in out

    def test_accuracy(self, capsys):
        code, out, _ = run(capsys, "metrics", "accuracy", DATA / "calibrated_dump.jsonl")
        assert code == 0
        assert out.splitlines()[0].startswith("160x160: accuracy=")

    def test_delta(self, tmp_path, capsys):
        cand, base = tmp_path / "cand.json", tmp_path / "base.json"
        cand.write_text(json.dumps({"val/acc@224": 17.91, "val/acc@160": 15.2}))
        base.write_text(json.dumps({"val/acc@224": 16.05, "val/acc@160": 16.05}))
        code, out, _ = run(capsys, "metrics", "delta", cand, "--baseline", base)
        assert code == 0
        assert "17.91 (+1.86)" in out
        assert "15.20 (-0.85)" in out

    def test_delta_requires_baseline(self, tmp_path, capsys):
        cand = tmp_path / "cand.json"
        cand.write_text("{}")
        code, _, _ = run(capsys, "metrics", "delta", cand)
        assert code == 2

    def test_missing_dump_exit_3(self, tmp_path, capsys):
        code, _, err = run(capsys, "metrics", "ece", tmp_path / "nope.jsonl")
        assert code == 3
        assert "data error" in err

    def test_out_file(self, tmp_path, capsys):
        out_path = tmp_path / "rows.txt"
        code, out, _ = run(
            capsys, "metrics", "accuracy", DATA / "calibrated_dump.jsonl", "--out", out_path
        )
        assert code == 0
        assert out_path.read_text().strip() == out.strip()


class TestSchedules:
    def test_csv_on_stdout(self, capsys):
        code, out, _ = run(capsys, "schedules", "--config", CONFIGS / "toy_mscvbswc.json")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "epoch,rho"
        assert lines[1] == "0,0.75"
        assert lines[-1] == "9,1.0"
        assert len(lines) == 11

    def test_set_override_changes_schedule(self, capsys):
        code, out, _ = run(
            capsys, "schedules", "--config", CONFIGS / "toy_mscvbswc.json",
            "--set", "sampler.curriculum.kind=linear",
        )
        assert code == 0
        assert out.splitlines()[2] == "1,0.8"

    def test_no_curriculum_exit_2(self, capsys):
        code, _, err = run(capsys, "schedules", "--config", CONFIGS / "toy_sscfbs.json")
        assert code == 2
        assert "curriculum" in err

    def test_csv_to_file(self, tmp_path, capsys):
        out_path = tmp_path / "sched.csv"
        code, out, _ = run(
            capsys, "schedules", "--config", CONFIGS / "toy_mscvbswc.json", "--out", out_path
        )
        assert code == 0
        assert out_path.read_text().splitlines()[0] == "epoch,rho"


class TestExitCodes:
    def test_invalid_config_value_exit_2(self, capsys):
        code, _, err = run(
            capsys, "schedules", "--config", CONFIGS / "toy_mscvbswc.json",
            "--set", "sampler.curriculum.rho0=1.5",
        )
        assert code == 2
        assert "config error" in err

    def test_missing_config_exit_2(self, tmp_path, capsys):
        code, _, _ = run(capsys, "plan", "--config", tmp_path / "nope.json")
        assert code == 2

    def test_bad_set_syntax_exit_2(self, capsys):
        code, _, err = run(
            capsys, "plan", "--config", CONFIGS / "toy_sscfbs.json", "--set", "oops"
        )
        assert code == 2
        assert "--set" in err
