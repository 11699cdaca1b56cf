"""Command-line harness: formats, determinism, exit codes."""

import csv
import io
import json
import subprocess
import sys

import pytest

from womkalman import run_trajectory, CascadeConfig
from womkalman.cli import main


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


class TestPrecisionCommand:
    def test_hand_values_csv(self, capsys):
        code, out, _ = run_cli(
            ["precision", "--m", "2", "--lambda-e", "1", "--lambda-w", "1",
             "--rho0", "1", "--kmax", "2", "--sample", "all"], capsys)
        assert code == 0
        header, rows = parse_csv(out)
        assert header == ["k", "rho", "denom", "gamma_1", "alpha_1", "alpha_2"]
        assert float(rows[0][1]) == 1.2
        assert float(rows[1][1]) == pytest.approx(1.2 + 1.0 / 5.84, rel=1e-15)

    def test_csv_round_trips_floats_exactly(self, capsys):
        code, out, _ = run_cli(["precision", "--kmax", "37"], capsys)
        assert code == 0
        _, rows = parse_csv(out)
        states = run_trajectory(CascadeConfig(m=2, lambda_e=1.0, lambda_w=(1.0,)), 37)
        for row, st in zip(rows, states):
            assert int(row[0]) == st.k
            assert float(row[1]) == st.rho  # exact: 17 significant digits
            assert float(row[2]) == st.denom

    def test_single_agent_classical_column(self, capsys):
        # an empty --lambda-w list is not expressible as a flag (use a config
        # file instead); argparse exits with the usage status
        with pytest.raises(SystemExit) as exc:
            main(["precision", "--m", "1", "--lambda-w", "--kmax", "5"])
        assert exc.value.code == 2

    def test_single_agent_via_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "m1.json"
        cfg.write_text(json.dumps({"m": 1, "lambda_w": []}))
        code, out, _ = run_cli(
            ["precision", "--config", str(cfg), "--kmax", "5"], capsys)
        assert code == 0
        _, rows = parse_csv(out)
        assert [float(r[1]) for r in rows] == [2.0, 3.0, 4.0, 5.0, 6.0]

    def test_zeroed_constant_increments(self, capsys):
        code, out, _ = run_cli(
            ["precision", "--m", "3", "--lambda-w", "1", "1", "--regime", "zeroed",
             "--kmax", "9"], capsys)
        assert code == 0
        _, rows = parse_csv(out)
        rhos = [float(r[1]) for r in rows]
        incs = {round(b - a, 12) for a, b in zip(rhos, rhos[1:])}
        assert len(incs) == 1

    def test_json_structure(self, capsys):
        code, out, _ = run_cli(
            ["precision", "--kmax", "3", "--format", "json"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["config"]["m"] == 2
        assert len(payload["results"]) == 3
        assert payload["results"][0]["rho"] == 1.2

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "traj.csv"
        code, out, _ = run_cli(
            ["precision", "--kmax", "3", "--output", str(target)], capsys)
        assert code == 0
        assert out == ""
        assert target.read_text().startswith("k,rho,denom")

    def test_byte_determinism(self, capsys):
        args = ["precision", "--m", "3", "--lambda-w", "0.5", "2", "--kmax", "50",
                "--sample", "geometric"]
        _, out1, _ = run_cli(args, capsys)
        _, out2, _ = run_cli(args, capsys)
        assert out1 == out2

    def test_validation_error_exit_code(self, capsys):
        code, _, err = run_cli(["precision", "--lambda-e", "0"], capsys)
        assert code == 2
        assert "lambda_e" in err


class TestRateCommand:
    def test_report_fields_and_theory(self, capsys):
        code, out, _ = run_cli(
            ["rate", "--kmax", "20000", "--format", "json"], capsys)
        assert code == 0
        res = json.loads(out)["results"][0]
        assert res["beta_theory"] == pytest.approx(1.0 / 3.0)
        assert res["constant_theory"] == pytest.approx(3.0 ** (1.0 / 3.0))
        assert set(res) == {"beta_hat", "beta_theory", "constant_hat",
                            "constant_theory", "r_squared", "rel_err_beta",
                            "rel_err_constant"}

    def test_scaled_delta_one_theory(self, capsys):
        code, out, _ = run_cli(
            ["rate", "--regime", "scaled", "--delta", "1", "--kmax", "10000",
             "--format", "json"], capsys)
        assert code == 0
        res = json.loads(out)["results"][0]
        assert res["beta_theory"] == 1.0
        assert res["rel_err_constant"] < 0.03

    def test_saturation_theory(self, capsys):
        code, out, _ = run_cli(
            ["rate", "--regime", "scaled", "--delta", "2", "--kmax", "10000",
             "--format", "json"], capsys)
        assert code == 0
        res = json.loads(out)["results"][0]
        assert res["beta_theory"] == 1.0
        assert res["constant_theory"] == pytest.approx(0.5)


class TestMonteCarloCommand:
    def test_requires_seed(self, capsys):
        code, _, err = run_cli(["montecarlo", "--kmax", "10", "--paths", "10"], capsys)
        assert code == 2
        assert "seed" in err

    def test_rows_and_determinism(self, capsys):
        args = ["montecarlo", "--kmax", "100", "--paths", "400", "--seed", "7",
                "--checkpoints", "1", "10", "100"]
        code, out1, _ = run_cli(args, capsys)
        assert code == 0
        header, rows = parse_csv(out1)
        assert header == ["k", "empirical_mse", "predicted_var", "ratio", "lo", "hi", "status"]
        assert [r[0] for r in rows] == ["1", "10", "100"]
        assert all(r[6] == "pass" for r in rows)
        _, out2, _ = run_cli(args, capsys)
        assert out1 == out2

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "mc.json"
        cfg.write_text(json.dumps({"kmax": 50, "paths": 100, "seed": 5,
                                   "checkpoints": [50]}))
        code, out, _ = run_cli(["montecarlo", "--config", str(cfg)], capsys)
        assert code == 0
        _, rows = parse_csv(out)
        assert [r[0] for r in rows] == ["50"]
        # flag wins over file
        code, out, _ = run_cli(
            ["montecarlo", "--config", str(cfg), "--checkpoints", "1", "2"], capsys)
        assert code == 0
        _, rows = parse_csv(out)
        assert [r[0] for r in rows] == ["1", "2"]

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"paths": 10, "bogus": 1}))
        code, _, err = run_cli(["montecarlo", "--config", str(cfg), "--seed", "1"], capsys)
        assert code == 2
        assert "bogus" in err


class TestRiccatiCommand:
    def test_linear_preset(self, capsys):
        code, out, _ = run_cli(
            ["riccati", "--c", "1", "--n", "1", "--delta", "0", "--f", "linear",
             "--kmax", "20000", "--format", "json"], capsys)
        assert code == 0
        res = json.loads(out)["results"][0]
        assert res["beta"] == pytest.approx(0.5)
        assert res["constant_theory"] == pytest.approx(2**0.5)
        assert res["rel_err"] < 0.02

    def test_affine_and_power_presets(self, capsys):
        code, out, _ = run_cli(
            ["riccati", "--f", "affine", "--f-param", "2.0", "--kmax", "1000",
             "--format", "json"], capsys)
        assert code == 0
        code, out, _ = run_cli(
            ["riccati", "--f", "power", "--f-param", "0.5", "--kmax", "1000",
             "--format", "json"], capsys)
        assert code == 0
        with pytest.raises(SystemExit):
            main(["riccati", "--f", "cubic"])
        code, _, err = run_cli(["riccati", "--f", "power", "--f-param", "2.0"], capsys)
        assert code == 2

    def test_delta_one_fixed_point_route(self, capsys):
        code, out, _ = run_cli(
            ["riccati", "--delta", "1", "--kmax", "20000", "--format", "json"], capsys)
        assert code == 0
        res = json.loads(out)["results"][0]
        assert res["method"] == "fixed-point"
        assert res["rel_err"] < 0.01


class TestGaussianCheckCommand:
    def test_passes_at_default_tolerance(self, capsys):
        code, out, _ = run_cli(
            ["gaussian-check", "--trials", "2000", "--format", "json"], capsys)
        assert code == 0
        res = json.loads(out)["results"][0]
        assert res["status"] == "pass"
        assert res["max_rel_err_mean"] <= 1e-12


class TestVerifyCommand:
    def test_quick_suite_passes(self, capsys):
        code, out, _ = run_cli(["verify", "--quick"], capsys)
        assert code == 0
        lines = [ln for ln in out.splitlines() if ln.endswith(("PASS", "FAIL"))]
        assert len(lines) >= 10
        assert all(ln.endswith("PASS") for ln in lines)


class TestEntryPoints:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "womkalman", "precision", "--kmax", "2"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("k,rho")

    def test_usage_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "womkalman", "bogus-command"],
            capture_output=True, text=True)
        assert proc.returncode == 2
