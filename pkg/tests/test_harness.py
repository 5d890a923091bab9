"""Tests fuer harness: Konfiguration, Schranken, Sweeps, Pruefung und CLI."""

import json
import math

import pandas as pd
import pytest
import yaml

from harness import (
    ExperimentConfig,
    MissingCountersError,
    read_report_csv,
    run_sweep,
    run_trial,
    verify_bounds,
)
from harness import bounds
from harness.cli import main
from harness.sweep import REPORT_COLUMNS, STATUS_FAILED, STATUS_OK, STATUS_TIMEOUT

SMALL_INSTANCE = {"horizon": 2, "level_width": 2, "actions": 2, "target_gap": [0.2, 0.4], "d": 3, "class_size": 4}


def small_config(mode, trials=4, **sections):
    data = {"mode": mode, "instance": dict(SMALL_INSTANCE), "run": {"trials": trials}}
    for name, values in sections.items():
        data[name] = {**data.get(name, {}), **values}
    return ExperimentConfig.model_validate(data)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    raw = {
        "linear_agent": {"memoize": False},
        "experiment": {"mode": "general", "instance": SMALL_INSTANCE, "run": {"trials": 3, "master_seed": 5}},
    }
    path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Konfiguration
# ---------------------------------------------------------------------------


class TestExperimentConfig:
    def test_reads_experiment_section(self, config_file):
        cfg = ExperimentConfig.from_file(config_file, environ={})
        assert cfg.mode == "general"
        assert cfg.run.trials == 3
        assert cfg.run.master_seed == 5
        assert cfg.instance.target_gap == (0.2, 0.4)

    def test_overrides_then_environment_seed(self, config_file):
        cfg = ExperimentConfig.from_file(
            config_file,
            overrides={"run.trials": 7, "mode": None, "agent.rho": 0.3},
            environ={"AGNOSTICQ_SEED": "42"},
        )
        assert cfg.run.trials == 7
        assert cfg.mode == "general"
        assert cfg.agent.rho == 0.3
        assert cfg.run.master_seed == 42

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ExperimentConfig.from_file(tmp_path / "fehlt.yaml")

    def test_errors_are_collected(self):
        cfg = ExperimentConfig.model_validate({"agent": {"rho": 0.2, "delta": 0.1}, "run": {"trials": 0}})
        errors = cfg.collect_errors()
        assert len(errors) == 2
        assert any("rho/2" in e for e in errors)

    def test_brute_force_domain_limited(self):
        cfg = ExperimentConfig.model_validate({"instance": {"eluder_points": [4, 13]}})
        assert cfg.collect_errors()

    def test_json_alias(self):
        cfg = ExperimentConfig.model_validate({"output": {"json": "report.json"}})
        assert str(cfg.output.json_report) == "report.json"
        assert cfg.echo()["output"]["json"] == "report.json"


# ---------------------------------------------------------------------------
# Schranken
# ---------------------------------------------------------------------------


class TestBounds:
    @pytest.mark.parametrize("dim_e", [1, 2, 5, 12])
    def test_general_and_dataset_premise_at_max_delta(self, dim_e):
        rho = 0.3
        delta = bounds.general_max_delta(rho, dim_e)
        assert bounds.general_premise(rho, delta * (1 - 1e-9), dim_e)
        assert not bounds.general_premise(rho, delta * (1 + 1e-9), dim_e)
        delta = bounds.dataset_max_delta(rho, dim_e)
        assert bounds.dataset_premise(rho, delta * (1 - 1e-9), dim_e)
        assert not bounds.dataset_premise(rho, delta * (1 + 1e-9), dim_e)

    @pytest.mark.parametrize("d", [2, 4, 8])
    def test_linear_premise_at_max_delta(self, d):
        delta = bounds.linear_max_delta(0.25, d)
        assert bounds.linear_premise(0.25, delta * (1 - 1e-9), d)
        assert not bounds.linear_premise(0.25, delta * (1 + 1e-9), d)
        assert bounds.linear_premise_factor(d, 0.25) == pytest.approx(4 * (math.sqrt(2 * d * math.log(256)) + 1))

    def test_dataset_premise_weaker_than_general(self):
        # Mit c = 18 ist die Datensatz-Voraussetzung schwaecher als die allgemeine
        for dim_e in range(1, 20):
            assert bounds.dataset_max_delta(0.3, dim_e) >= bounds.general_max_delta(0.3, dim_e)
        assert bounds.dataset_bound(3) == 54

    @pytest.mark.parametrize("dim_e", range(1, 7))
    def test_default_delta_r_keeps_stochastic_premise(self, dim_e):
        rho = 0.4
        delta = 0.999 * rho / (12 * math.sqrt(2) * math.sqrt(dim_e))
        delta_r = bounds.default_delta_r(rho, dim_e)
        assert delta_r == pytest.approx(rho / (24 * math.sqrt(2) * dim_e))
        assert bounds.stochastic_premise(rho, delta, delta_r, dim_e)
        assert bounds.stochastic_max_delta(rho, delta_r, dim_e) >= delta

    def test_zero_dimension(self):
        assert bounds.general_max_delta(0.3, 0) == 0.15
        assert bounds.estimate_bound(0, 3) == 54


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


class TestSweep:
    def test_general_sweep_passes_checks(self):
        report = run_sweep(small_config("general"))
        frame = report.frame()
        assert list(frame.columns) == list(REPORT_COLUMNS)
        assert list(frame["seed"]) == [0, 1, 2, 3]
        assert (frame["status"] == STATUS_OK).all()
        assert frame["premise_satisfied"].all()
        assert frame["wall_ms"].eq(0.0).all()
        assert verify_bounds(report).passed
        (summary,) = report.summary()
        assert summary["mode"] == "general"
        assert summary["trials"] == 4
        assert summary["success_rate"] == 1.0

    def test_report_is_reproducible(self):
        cfg = small_config("general", trials=3)
        first, second = run_sweep(cfg), run_sweep(cfg)
        assert first.csv_text() == second.csv_text()
        assert json.dumps(first.to_dict()) == json.dumps(second.to_dict())

    def test_thread_pool_same_report(self):
        sequential = run_sweep(small_config("linear", trials=4))
        pooled = run_sweep(small_config("linear", trials=4, run={"trials": 4, "parallelism": 3}))
        assert sequential.csv_text() == pooled.csv_text()

    def test_master_seed_shifts_trials(self):
        report = run_sweep(small_config("eluder", trials=2, run={"trials": 2, "master_seed": 10}))
        assert [row.seed for row in report.rows] == [10, 11]

    def test_linear_sweep_passes_checks(self):
        report = run_sweep(small_config("linear"))
        frame = report.frame()
        assert (frame["status"] == STATUS_OK).all()
        assert (frame["data_additions"] <= frame["bound_data_additions"]).all()
        assert verify_bounds(report).passed

    def test_eluder_sweep(self):
        report = run_sweep(small_config("eluder", trials=6))
        frame = report.frame()
        assert (frame["eluder_brute_a"] >= frame["eluder_brute_b"]).all()
        assert (frame["eluder_greedy_a"] <= frame["eluder_brute_a"]).all()
        assert verify_bounds(report).passed

    def test_delta_fraction_places_error_below_premise(self):
        cfg = small_config("general", trials=3, agent={"delta_fraction": 0.5})
        frame = run_sweep(cfg).frame()
        assert (frame["status"] == STATUS_OK).all()
        assert (frame["delta"] > 0).all()
        assert frame["premise_satisfied"].all()

    @pytest.mark.parametrize("c", [2.0, 18.0])
    def test_dataset_bound_near_feasibility(self, c):
        cfg = small_config("general", trials=4, agent={"delta_fraction": 0.9, "c": c})
        report = run_sweep(cfg)
        frame = report.frame()
        assert (frame["c"] == c).all()
        assert (frame["status"] == STATUS_OK).all()
        assert verify_bounds(report).passed

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError, match="Fehler in der Konfiguration"):
            run_sweep(small_config("general", run={"trials": 0}))

    def test_failure_recorded_as_row(self):
        # 16 Paare: ohne agent.dim_e_value keine Eluder-Dimension
        cfg = small_config("general", instance={"level_width": 7})
        row = run_trial(cfg, "general", 0)
        assert row.status == STATUS_FAILED
        assert row.error.startswith("ValueError")
        assert row.premise_satisfied is None

    @pytest.mark.parametrize("mode", ["general", "stochastic"])
    def test_error_of_half_gap_recorded_as_failed_row(self, mode):
        # Luecke in [0.2, 0.4], also rho/2 <= 0.2 < delta
        cfg = small_config(mode, trials=2, agent={"delta": 0.3})
        assert cfg.collect_errors() == []
        report = run_sweep(cfg)
        for row in report.rows:
            assert row.status == STATUS_FAILED
            assert row.error.startswith("ValueError") and "rho/2" in row.error
            assert row.premise_satisfied is False

    def test_timeout_recorded_as_row(self):
        cfg = small_config("linear", run={"trials": 1, "trial_budget_s": 1e-9})
        row = run_trial(cfg, "linear", 0)
        assert row.status == STATUS_TIMEOUT
        assert row.premise_satisfied is not None


# ---------------------------------------------------------------------------
# Pruefung
# ---------------------------------------------------------------------------


class TestVerify:
    @pytest.fixture(scope="class")
    def linear_frame(self):
        return run_sweep(small_config("linear")).frame()

    @pytest.fixture(scope="class")
    def general_frame(self):
        return run_sweep(small_config("general")).frame()

    def test_fabricated_counter_is_caught(self, linear_frame):
        frame = linear_frame.copy()
        frame.loc[2, "data_additions"] = int(math.ceil(frame.loc[2, "bound_data_additions"])) + 10
        result = verify_bounds(frame)
        assert not result.passed
        (line,) = [line for line in result.lines if not line.passed]
        assert line.name.startswith("data additions")
        assert line.offending_seeds == [int(frame.loc[2, "seed"])]

    def test_rows_without_premise_are_not_checked(self, general_frame):
        frame = general_frame.copy()
        frame.loc[0, "y_size"] = 10_000
        frame.loc[0, "premise_satisfied"] = False
        frame.loc[0, "dataset_premise"] = False
        assert verify_bounds(frame).passed

    def test_failed_row_counts_against_completion(self, general_frame):
        frame = general_frame.copy()
        frame.loc[1, "status"] = STATUS_FAILED
        result = verify_bounds(frame)
        (line,) = [line for line in result.lines if not line.passed]
        assert line.name == "trials completed"
        assert line.offending_seeds == [1]

    def test_missing_counters(self, general_frame):
        with pytest.raises(MissingCountersError):
            verify_bounds(general_frame.drop(columns=["y_size"]))
        frame = general_frame.copy()
        frame.loc[0, "y_size"] = pd.NA
        with pytest.raises(MissingCountersError):
            verify_bounds(frame)

    def test_csv_report_checks_like_memory(self, tmp_path):
        report = run_sweep(small_config("general", trials=3))
        frame = read_report_csv(report.to_csv(tmp_path / "general.csv"))
        assert verify_bounds(frame).to_dict() == verify_bounds(report).to_dict()

    def test_missing_report(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_report_csv(tmp_path / "fehlt.csv")


# ---------------------------------------------------------------------------
# Kommandozeile
# ---------------------------------------------------------------------------


class TestCli:
    @pytest.fixture
    def instance_files(self, tmp_path):
        mdp = tmp_path / "mdp.json"
        assert main(["gen", "mdp", "--seed", "1", "--horizon", "2", "--widths", "1,2", "--gap", "0.25", "--out", str(mdp)]) == 0
        truth = tmp_path / "truth.json"
        assert main(["solve", "--mdp", str(mdp), "--out", str(truth)]) == 0
        gap = json.loads(truth.read_text())["gap"]
        return tmp_path, mdp, gap

    def test_learn_linear(self, instance_files):
        tmp_path, mdp, gap = instance_files
        phi = tmp_path / "phi.json"
        assert main(["gen", "features", "--mdp", str(mdp), "--d", "3", "--out", str(phi)]) == 0
        assert "theta_star" in json.loads(phi.read_text())
        out = tmp_path / "linear.json"
        assert main(["learn-linear", "--mdp", str(mdp), "--features", str(phi), "--rho", str(gap), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["matched_pi_star"] is True

    def test_learn_general_and_eluder(self, instance_files, capsys):
        tmp_path, mdp, gap = instance_files
        cls = tmp_path / "class.json"
        assert main(["gen", "class", "--mdp", str(mdp), "--size", "4", "--out", str(cls)]) == 0
        out = tmp_path / "general.json"
        assert main(["learn-general", "--mdp", str(mdp), "--class", str(cls), "--rho", str(gap), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["matched_pi_star"] is True

        capsys.readouterr()
        assert main(["eluder", "--class", str(cls), "--eps", "0.1"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["domain_size"] == 6
        assert result["greedy"] <= result["bruteforce"]

    def test_learn_general_refuses_half_gap_error(self, instance_files):
        tmp_path, mdp, gap = instance_files
        cls = tmp_path / "class.json"
        assert main(["gen", "class", "--mdp", str(mdp), "--size", "3", "--out", str(cls)]) == 0
        args = ["learn-general", "--mdp", str(mdp), "--class", str(cls), "--rho", str(gap)]
        assert main(args + ["--delta", str(gap / 2)]) == 1
        assert main(args + ["--delta", str(gap)]) == 1

    def test_learn_stochastic_seed_from_environment(self, instance_files, monkeypatch):
        tmp_path, _, gap = instance_files
        mdp = tmp_path / "roomy.json"
        noisy = tmp_path / "noisy.json"
        cls = tmp_path / "class.json"
        assert main(["gen", "mdp", "--seed", "1", "--horizon", "2", "--widths", "1,2", "--gap", "0.25",
                     "--max-path-sum", "0.7", "--out", str(mdp)]) == 0
        assert main(["gen", "stochastic", "--mdp", str(mdp), "--width", "0.1", "--out", str(noisy)]) == 0
        assert main(["gen", "class", "--mdp", str(mdp), "--size", "2", "--out", str(cls)]) == 0
        out = tmp_path / "stochastic.json"
        args = ["learn-stochastic", "--mdp", str(noisy), "--class", str(cls), "--rho", "0.25",
                "--delta-r", "0.05", "--dim-e", "1", "--seed", "3", "--out", str(out)]

        monkeypatch.delenv("AGNOSTICQ_SEED", raising=False)
        assert main(args) == 0
        assert json.loads(out.read_text())["seed"] == 3
        monkeypatch.setenv("AGNOSTICQ_SEED", "17")
        assert main(args) == 0
        assert json.loads(out.read_text())["seed"] == 17

    def test_missing_input_file(self, tmp_path):
        assert main(["solve", "--mdp", str(tmp_path / "fehlt.json")]) == 1

    def test_invalid_config_exits(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({"experiment": {"run": {"trials": 0}}}), encoding="utf-8")
        with pytest.raises(SystemExit) as excinfo:
            main(["sweep", "--config", str(path)])
        assert excinfo.value.code == 1

    def test_sweep_then_verify_report(self, config_file, tmp_path, capsys):
        csv_path = tmp_path / "report.csv"
        assert main(["sweep", "--config", str(config_file), "--out-csv", str(csv_path)]) == 0
        capsys.readouterr()
        assert main(["verify", "--report", str(csv_path)]) == 0
        assert json.loads(capsys.readouterr().out)["passed"] is True
