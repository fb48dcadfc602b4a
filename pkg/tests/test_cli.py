"""Command-line interface: records, artifacts, exit codes, reproducibility."""

import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qccsim.cli import main, parse_range
from qccsim.errors import ValidationError

from oracles import fit_exponent

DATA = Path(__file__).parent / "data"

MANDATED_WEAK_VALUE_FIELDS = (
    "weak_value_re",
    "weak_value_im",
    "transition_re",
    "transition_im",
    "postselect_prob",
    "exact_shift",
    "predicted_shift",
    "validity_margin",
)


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def record_without_timestamp(text: str) -> dict:
    record = json.loads(text)
    record.pop("timestamp")
    return record


class TestRunRecord:
    def test_qcc_record_matches_golden(self, capsys):
        code, out, _ = run_cli(capsys, "qcc", "--g", "0.02")
        assert code == 0
        golden = record_without_timestamp((DATA / "qcc_run.json").read_text())
        assert record_without_timestamp(out) == golden

    def test_record_envelope(self, capsys):
        _, out, _ = run_cli(capsys, "neutron-absorber", "--arm", "II", "--M", "0.3")
        record = json.loads(out)
        assert record["artifact"] == "qccsim"
        assert record["scenario"] == "neutron-absorber"
        assert record["config"] == {"arm": "II", "M": 0.3}
        assert record["results"]["ratio"] == pytest.approx(1.0, abs=1e-15)

    def test_weak_value_mandated_fields(self, capsys):
        code, out, _ = run_cli(capsys, "weak-value", "--context", "qcc-pi-I", "--g", "0.01")
        assert code == 0
        results = json.loads(out)["results"]
        for field in MANDATED_WEAK_VALUE_FIELDS:
            assert field in results
        assert results["weak_value_re"] == pytest.approx(1.0, abs=1e-12)
        assert results["exact_shift"] == pytest.approx(0.01, abs=1e-12)

    def test_json_file_equals_stdout(self, capsys, tmp_path):
        target = tmp_path / "record.json"
        _, out, _ = run_cli(capsys, "qcc", "--g", "0.02", "--json", str(target))
        assert target.read_text() == out

    def test_reruns_are_identical_up_to_timestamp(self, capsys):
        _, first, _ = run_cli(capsys, "qcc-joint", "--g", "0.03")
        _, second, _ = run_cli(capsys, "qcc-joint", "--g", "0.03")
        assert record_without_timestamp(first) == record_without_timestamp(second)

    def test_orthogonal_context_reports_null_weak_value(self, capsys):
        code, out, _ = run_cli(
            capsys, "montecarlo", "--mode", "pointer", "--context", "qcc-pi-I",
            "--g", "0.1", "--n", "200", "--seed", "3",
        )
        assert code == 0
        results = json.loads(out)["results"]
        assert results["exact_weak_value_re"] == pytest.approx(1.0, abs=1e-12)


class TestCsvArtifacts:
    def test_sweep_csv_matches_golden(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        code, _, _ = run_cli(
            capsys, "sweep", "--scenario", "qcc", "--g", "0.0:0.04:3", "--csv", str(target)
        )
        assert code == 0
        assert target.read_text() == (DATA / "qcc_sweep.csv").read_text()

    def test_grid_csv_matches_golden(self, capsys, tmp_path):
        target = tmp_path / "grid.csv"
        code, _, _ = run_cli(
            capsys, "weak-value", "--context", "anomalous", "--g", "0.1",
            "--grid-xmin", "-10", "--grid-xmax", "10", "--grid-points", "64",
            "--csv", str(target),
        )
        assert code == 0
        assert target.read_text() == (DATA / "anomalous_grid.csv").read_text()

    def test_trials_csv_matches_golden(self, capsys, tmp_path):
        target = tmp_path / "trials.csv"
        code, _, _ = run_cli(
            capsys, "montecarlo", "--mode", "pointer", "--context", "qcc-pi-I",
            "--g", "0.1", "--n", "50", "--seed", "7", "--csv", str(target),
        )
        assert code == 0
        assert target.read_text() == (DATA / "trials_n50.csv").read_text()

    def test_grid_density_is_normalized(self, capsys, tmp_path):
        target = tmp_path / "grid.csv"
        run_cli(
            capsys, "weak-value", "--context", "qcc-pi-I", "--g", "0.01",
            "--csv", str(target),
        )
        with open(target) as fh:
            rows = list(csv.DictReader(fh))
        xs = np.array([float(r["x"]) for r in rows])
        dens = np.array([float(r["prob_density"]) for r in rows])
        total = np.trapezoid(dens, xs)
        # The postselected pointer is unnormalized: density integrates
        # to the coupled postselection probability.
        assert total == pytest.approx(0.25, abs=1e-6)

    def test_csv_rejected_for_scalar_scenarios(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "neutron-absorber", "--arm", "I", "--M", "0.1",
            "--csv", str(tmp_path / "x.csv"),
        )
        assert code == 3
        assert "csv" in json.loads(err)["error"]["message"]

    def test_outdir_env_var_anchors_relative_paths(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("QCCSIM_OUTDIR", str(tmp_path))
        code, _, _ = run_cli(
            capsys, "sweep", "--scenario", "neutron-absorber", "--arm", "I",
            "--M", "0.0:0.2:3", "--csv", "ratios.csv",
        )
        assert code == 0
        assert (tmp_path / "ratios.csv").exists()

    def test_out_flag_overrides_cwd(self, capsys, tmp_path):
        code, _, _ = run_cli(
            capsys, "sweep", "--scenario", "qcc", "--g", "0.0:0.02:2",
            "--csv", "table.csv", "--out", str(tmp_path),
        )
        assert code == 0
        assert (tmp_path / "table.csv").exists()


class TestSweeps:
    def test_qcc_sweep_header_and_signature(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        run_cli(capsys, "sweep", "--scenario", "qcc", "--g", "0.005:0.02:4",
                "--csv", str(target))
        with open(target) as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        assert header == [
            "g", "wv_pi_I_re", "wv_sigma_I_re", "wv_pi_II_re", "wv_sigma_II_re",
            "shift_I", "shift_II", "postselect_prob",
        ]
        assert len(rows) == 4
        for row in rows:
            assert float(row[1]) == pytest.approx(1.0, abs=1e-12)
            assert float(row[5]) == pytest.approx(float(row[0]), abs=1e-12)

    def test_neutron_sweep_header(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        run_cli(capsys, "sweep", "--scenario", "neutron-absorber", "--arm", "I",
                "--M", "0.05:0.2:3", "--csv", str(target))
        with open(target) as fh:
            header = next(csv.reader(fh))
        assert header == ["param", "ratio_exact", "ratio_predicted", "inferred_wv", "expansion_error"]

    def test_magnetic_sweep_expansion_error_is_quartic(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        run_cli(capsys, "sweep", "--scenario", "neutron-magnetic", "--arm", "II",
                "--alpha", "0.05:0.4:6", "--csv", str(target))
        with open(target) as fh:
            rows = list(csv.DictReader(fh))
        alphas = np.array([float(r["param"]) for r in rows])
        errors = np.array([float(r["expansion_error"]) for r in rows])
        assert fit_exponent(alphas, errors) == pytest.approx(4.0, abs=0.3)

    def test_absorber_sweep_prediction_column(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        run_cli(capsys, "sweep", "--scenario", "neutron-absorber", "--arm", "I",
                "--M", "0.0:0.2:3", "--csv", str(target))
        with open(target) as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            assert float(row["ratio_predicted"]) == pytest.approx(
                1.0 - 2.0 * float(row["param"]), abs=1e-14
            )

    def test_range_parsing(self):
        assert parse_range("0:1:5").tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert parse_range("0.3:0.3:1").tolist() == [0.3]
        with pytest.raises(ValidationError):
            parse_range("0:1")
        with pytest.raises(ValidationError):
            parse_range("0:1:0")
        with pytest.raises(ValidationError):
            parse_range("a:b:3")


class TestConfigFile:
    def test_config_values_are_applied(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"g": 0.05, "observable_I": "sigma_x"}))
        _, out, _ = run_cli(capsys, "qcc", "--config", str(cfg))
        record = json.loads(out)
        assert record["config"]["g"] == 0.05
        assert record["config"]["observable_I"] == "sigma_x"

    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"g": 0.05}))
        _, out, _ = run_cli(capsys, "qcc", "--config", str(cfg), "--g", "0.01")
        assert json.loads(out)["config"]["g"] == 0.01

    def test_unknown_config_key_is_a_violation(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"coupling": 0.05}))
        code, _, err = run_cli(capsys, "qcc", "--config", str(cfg))
        assert code == 3
        assert "coupling" in json.loads(err)["error"]["message"]

    def test_malformed_config_exits_two(self, capsys, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        code, _, err = run_cli(capsys, "qcc", "--config", str(cfg))
        assert code == 2
        assert json.loads(err)["error"]["type"] == "ConfigParseError"

    def test_non_object_config_exits_two(self, capsys, tmp_path):
        cfg = tmp_path / "list.json"
        cfg.write_text("[1, 2]")
        code, _, _ = run_cli(capsys, "qcc", "--config", str(cfg))
        assert code == 2

    def test_missing_config_exits_two(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "qcc", "--config", str(tmp_path / "absent.json"))
        assert code == 2


class TestExitCodes:
    def test_success_is_zero(self, capsys):
        code, _, _ = run_cli(capsys, "neutron-magnetic", "--arm", "II", "--alpha", "0.1")
        assert code == 0

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["qcc", "--coupling", "0.1"])
        assert exc.value.code == 2

    def test_validation_failure_exits_three(self, capsys):
        code, _, err = run_cli(capsys, "neutron-absorber", "--arm", "I", "--M", "-1")
        assert code == 3
        assert "M" in json.loads(err)["error"]["message"]

    def test_capacity_failure_exits_four(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "weak-value", "--context", "qcc-pi-I", "--g", "0.01",
            "--grid-points", str(2**21), "--csv", str(tmp_path / "grid.csv"),
        )
        assert code == 4
        assert json.loads(err)["error"]["type"] == "CapacityError"

    def test_numerical_failure_exits_five(self, capsys):
        code, _, err = run_cli(capsys, "weak-value", "--context", "orthogonal", "--g", "0.01")
        assert code == 5
        assert json.loads(err)["error"]["type"] == "OrthogonalPostselection"


class TestValidateOnly:
    def test_violations_are_listed_without_running(self, capsys):
        code, out, _ = run_cli(
            capsys, "montecarlo", "--mode", "pointer", "--g", "0", "--validate-only"
        )
        assert code == 3
        report = json.loads(out)
        assert report["scenario"] == "montecarlo"
        assert any(v.startswith("g:") for v in report["violations"])

    def test_valid_parameters_pass(self, capsys):
        code, out, _ = run_cli(capsys, "qcc", "--g", "0.02", "--validate-only")
        assert code == 0
        assert json.loads(out)["violations"] == []


class TestMonteCarloCli:
    def test_worker_count_does_not_change_results(self, capsys):
        args = ("montecarlo", "--mode", "pointer", "--context", "anomalous",
                "--g", "0.05", "--n", "20000", "--seed", "11")
        _, out1, _ = run_cli(capsys, *args, "--workers", "1")
        _, out4, _ = run_cli(capsys, *args, "--workers", "4")
        assert json.loads(out1)["results"] == json.loads(out4)["results"]

    def test_intensity_mode_reports_counts_and_inference(self, capsys):
        code, out, _ = run_cli(
            capsys, "montecarlo", "--mode", "intensity-magnetic", "--arm", "II",
            "--alpha", "0.5", "--n", "200000", "--seed", "2",
        )
        assert code == 0
        results = json.loads(out)["results"]
        assert results["counts"]["n_trials"] == 200000
        assert results["exact"]["ratio"] == pytest.approx(
            1.0 + math.sin(0.25) ** 2, abs=1e-12
        )
        assert results["inferred_from_counts"] == pytest.approx(1.0, abs=0.2)

    def test_intensity_absorber_mode(self, capsys):
        code, out, _ = run_cli(
            capsys, "montecarlo", "--mode", "intensity-absorber", "--arm", "I",
            "--M", "0.2", "--n", "100000", "--seed", "9",
        )
        assert code == 0
        results = json.loads(out)["results"]
        se = results["counts"]["ratio_std_error"]
        assert abs(results["counts"]["ratio"] - math.exp(-0.4)) <= 4.0 * se


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "qccsim.cli", "qcc", "--g", "0.02"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["shift_I"] == 0.02
