"""Command-line contract: config validation, file schemas, determinism,
and offline report regeneration."""

import csv
import json

import numpy as np
import pytest

from momf import cli
from momf.cli import cmd_bench, cmd_front, cmd_run, load_config
from momf.problems import get_problem


def write_config(path, **overrides):
    cfg = {
        "problem": "branin-currin",
        "algorithm": "momf1",
        "total_budget": 40.0,
        "trials": 1,
        "seed": 3,
        "init_count": 3,
        "candidate_pool": 64,
        "restarts": 2,
        "trace_points": 300,
        "oracle_points": 1500,
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


class TestConfigValidation:
    def test_unknown_key_named(self, tmp_path):
        path = write_config(tmp_path / "c.json")
        raw = json.loads(path.read_text())
        raw["walltime"] = 10
        path.write_text(json.dumps(raw))
        with pytest.raises(cli.ConfigError, match="walltime"):
            load_config(str(path))

    def test_unknown_algorithm_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path / "c.json", algorithm="simulated-annealing")
        assert cli.main(["run", "--config", str(path)]) == 2
        assert "algorithm" in capsys.readouterr().err

    def test_unknown_problem_named(self, tmp_path):
        path = write_config(tmp_path / "c.json", problem="rastrigin")
        with pytest.raises(cli.ConfigError, match="problem"):
            load_config(str(path))

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"problem": "park",\n  "algorithm": }')
        with pytest.raises(cli.ConfigError, match=r":2:"):
            load_config(str(path))

    def test_missing_required_field(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"problem": "park", "algorithm": "momf1"}))
        with pytest.raises(cli.ConfigError, match="total_budget"):
            load_config(str(path))

    def test_seeds_must_match_trials(self, tmp_path):
        path = write_config(tmp_path / "c.json", trials=2, seeds=[1, 2, 3])
        with pytest.raises(cli.ConfigError, match="seeds"):
            load_config(str(path))


class TestRun:
    def test_csv_contract_and_determinism(self, tmp_path):
        out1 = tmp_path / "out1"
        path = write_config(tmp_path / "c.json", output_dir=str(out1))
        assert cmd_run(str(path)) == 0
        csv_path = out1 / "momf1_trial_000_observations.csv"
        with open(csv_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["trial", "iter", "x1", "x2", "s", "y1", "y2", "cost", "cum_cost"]
        assert len(rows) > 1
        # byte-identical rerun
        first = csv_path.read_bytes()
        assert cmd_run(str(path)) == 0
        assert csv_path.read_bytes() == first
        manifest = json.loads((out1 / "manifest.json").read_text())
        assert manifest["trials"][0]["status"] == "ok"

    def test_env_var_overrides_output_dir(self, tmp_path, monkeypatch):
        override = tmp_path / "elsewhere"
        monkeypatch.setenv("MOMF_OUT_DIR", str(override))
        path = write_config(tmp_path / "c.json", output_dir=str(tmp_path / "ignored"))
        assert cmd_run(str(path)) == 0
        assert (override / "momf1_trial_000_observations.csv").exists()

    def test_csv_round_trip_is_stable(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path / "c.json", output_dir=str(out))
        cmd_run(str(path))
        problem = get_problem("branin-currin")
        csv_path = out / "momf1_trial_000_observations.csv"
        trial_idx, data = cli.read_observations(csv_path, problem)
        rewritten = tmp_path / "copy.csv"
        from momf.engine import LoopConfig, TrialRecord

        record = TrialRecord("branin-currin", LoopConfig(algorithm="momf1", total_budget=1.0), data, [])
        cli.write_observations(rewritten, trial_idx, record, problem)
        assert rewritten.read_bytes() == csv_path.read_bytes()


@pytest.fixture(scope="module")
def bench_dir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("bench")
    out = tmp / "out"
    path = write_config(
        tmp / "c.json",
        algorithm=["momf1", "sf-ehvi"],
        total_budget={"momf1": 150.0, "sf-ehvi": 1100.0},
        init_count={"momf1": 3, "sf-ehvi": 1},
        trials=2,
        max_iterations={"momf1": 12},
        threshold=0.5,
        output_dir=str(out),
    )
    assert cmd_bench(str(path), jobs=2) == 0
    return path, out


class TestBench:

    def test_report_contract(self, bench_dir):
        _, out = bench_dir
        report = json.loads((out / "report.json").read_text())
        assert "momf1" in report["reduction_factors"]
        assert report["baseline"] == "sf-ehvi"
        assert set(report["mean_fidelity"]) == {"momf1", "sf-ehvi"}
        assert report["mean_fidelity"]["sf-ehvi"] == 1.0
        hv_rows = (out / "hv_trace.csv").read_text().splitlines()
        assert hv_rows[0] == "algorithm,trial,cum_cost,hv_fraction"
        hist_rows = (out / "fidelity_hist.csv").read_text().splitlines()
        assert hist_rows[0] == "algorithm,bin_low,bin_high,count"

    def test_from_logs_regenerates_bit_identical(self, bench_dir):
        path, out = bench_dir
        before = {
            name: (out / name).read_bytes()
            for name in ("report.json", "hv_trace.csv", "fidelity_hist.csv")
        }
        assert cmd_bench(str(path), from_logs=True) == 0
        for name, blob in before.items():
            assert (out / name).read_bytes() == blob

    def test_from_logs_without_manifest(self, tmp_path, capsys):
        path = write_config(tmp_path / "c.json", output_dir=str(tmp_path / "empty"))
        assert cmd_bench(str(path), from_logs=True) == 2


class TestFront:
    def test_writes_nondominated_rows(self, tmp_path):
        assert cmd_front("branin-currin", 1500, 0, str(tmp_path)) == 0
        with open(tmp_path / "oracle_front.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["y1", "y2"]
        pts = np.array([[float(v) for v in r] for r in rows[1:]])
        order = np.argsort(-pts[:, 0])
        assert np.all(np.diff(pts[order][:, 1]) > 0)  # staircase: nondominated

    def test_seed_stability(self, tmp_path, capsys):
        cmd_front("park", 10_000, 0, str(tmp_path))
        hv0 = float(capsys.readouterr().out.splitlines()[0].split(":")[1])
        cmd_front("park", 10_000, 1, str(tmp_path))
        hv1 = float(capsys.readouterr().out.splitlines()[0].split(":")[1])
        assert abs(hv0 - hv1) / hv0 < 0.02

    def test_unknown_problem_exit_2(self, capsys):
        assert cmd_front("ackley", 2000, 0, ".") == 2

    def test_small_sample_exit_2(self, capsys):
        assert cmd_front("park", 999, 0, ".") == 2
