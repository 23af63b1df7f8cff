import json
import math

import numpy as np
import pytest

from holosim import cli

PI = math.pi


def run(tmp_path, *argv):
    return cli.main([*argv, "--out-dir", str(tmp_path)])


def read_summary(path):
    values = {}
    for line in path.read_text().splitlines():
        if line.startswith("#") or " = " not in line:
            continue
        key, raw = line.split(" = ", 1)
        values[key] = raw
    return values


def read_table(path):
    meta, header, rows = [], None, []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            meta.append(line)
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, header, rows


class TestGateCommand:
    def test_time_optimal_reference_point(self, tmp_path):
        code = run(
            tmp_path, "gate", "--scheme", "tounhqc",
            "--theta", "1.5707963267948966", "--phi", "0",
            "--gamma", "1.5707963267948966", "--omega0-mhz", "8.660",
        )
        assert code == 0
        summary = read_summary(tmp_path / "gate_summary.txt")
        assert float(summary["tau_ns"]) == pytest.approx(100.0, abs=0.05)
        assert float(summary["gate_infidelity"]) < 1e-6

    def test_conventional_reference_point(self, tmp_path):
        code = run(
            tmp_path, "gate", "--scheme", "nhqc",
            "--gamma", "1.5707963267948966", "--omega0-mhz", "8.660",
        )
        assert code == 0
        summary = read_summary(tmp_path / "gate_summary.txt")
        assert float(summary["tau_ns"]) == pytest.approx(115.47, abs=0.05)

    def test_degenerate_gamma_is_config_error(self, tmp_path, capsys):
        assert run(tmp_path, "gate", "--gamma", "0") == 1
        assert "gamma" in capsys.readouterr().err

    def test_all_problems_reported_in_one_pass(self, tmp_path, capsys):
        code = run(
            tmp_path, "gate", "--gamma", "0", "--theta", "9", "--omega0-mhz", "-1"
        )
        assert code == 1
        err = capsys.readouterr().err
        assert "--gamma" in err and "--theta" in err and "--omega0-mhz" in err

    def test_numeric_failure_exit_code(self, tmp_path):
        # a 50 ns step on a 100 ns schedule violates the step-size contract
        assert run(tmp_path, "gate", "--dt-ns", "50") == 2


class TestTrajectoryCommand:
    def test_sqrt_x_files_and_endpoint(self, tmp_path):
        assert run(tmp_path, "trajectory", "--initial", "0") == 0
        summary = read_summary(tmp_path / "trajectory_summary.txt")
        assert float(summary["final_p0"]) == pytest.approx(0.5, abs=1e-4)
        assert float(summary["final_bloch_y"]) == pytest.approx(-1.0, abs=1e-4)
        _, header, rows = read_table(tmp_path / "trajectory_populations.csv")
        assert header == ["t_ns", "p0", "p1", "pe"]
        assert len(rows) > 50


class TestRamseyCommand:
    def test_phase_shift_quarter_pi(self, tmp_path):
        assert run(tmp_path, "ramsey", "--gamma", str(PI / 4)) == 0
        summary = read_summary(tmp_path / "ramsey_summary.txt")
        assert float(summary["phase_shift_rad"]) == pytest.approx(PI / 4, abs=1e-3)
        _, header, rows = read_table(tmp_path / "ramsey_fringes.csv")
        assert header == ["theta_rad", "p_gate_on", "p_gate_off"]
        assert len(rows) == 41


class TestRBCommand:
    def test_rerun_is_byte_identical(self, tmp_path):
        argv = ("rb", "--lengths", "2,4,8", "--sequences", "10", "--seed", "42")
        assert run(tmp_path, *argv) == 0
        first = (tmp_path / "rb_survival.csv").read_bytes()
        first_summary = (tmp_path / "rb_summary.txt").read_bytes()
        assert run(tmp_path, *argv) == 0
        assert (tmp_path / "rb_survival.csv").read_bytes() == first
        assert (tmp_path / "rb_summary.txt").read_bytes() == first_summary

    def test_survival_rows_cover_all_sequences(self, tmp_path):
        assert run(tmp_path, "rb", "--lengths", "2,4,8", "--sequences", "10") == 0
        _, header, rows = read_table(tmp_path / "rb_survival.csv")
        assert header == ["m", "sequence_index", "survival"]
        assert len(rows) == 30

    def test_bad_lengths_rejected(self, tmp_path):
        assert run(tmp_path, "rb", "--lengths", "8,4") == 1
        assert run(tmp_path, "rb", "--lengths", "4,8") == 1


class TestScanCommand:
    def test_default_grid_size(self, tmp_path):
        assert run(tmp_path, "scan", "--threads", "4") == 0
        _, header, rows = read_table(tmp_path / "scan_grid.csv")
        assert header == ["amp_err", "det_err", "fidelity"]
        assert len(rows) == 441
        summary = read_summary(tmp_path / "scan_summary.txt")
        assert float(summary["fidelity_origin"]) >= 0.999

    def test_table_round_trips_at_full_precision(self, tmp_path):
        assert run(tmp_path, "scan", "--resolution", "5") == 0
        _, _, rows = read_table(tmp_path / "scan_grid.csv")
        for row in rows:
            for token in row:
                assert cli._fmt(float(token)) == token

    def test_low_resolution_rejected(self, tmp_path):
        assert run(tmp_path, "scan", "--resolution", "3") == 1


class TestCompareCommand:
    def test_noiseless_reports_not_applicable(self, tmp_path):
        assert run(tmp_path, "compare") == 0
        summary = read_summary(tmp_path / "compare_summary.txt")
        assert summary["error_reduction"] == "n/a"
        assert float(summary["tau_ratio"]) == pytest.approx(math.sqrt(7) / 4, rel=1e-9)

    def test_default_noise_reduction_in_window(self, tmp_path):
        assert run(tmp_path, "compare", "--default-noise") == 0
        summary = read_summary(tmp_path / "compare_summary.txt")
        assert 0.0 < float(summary["error_reduction"]) < 1.0


class TestConfigFile:
    def test_file_provides_defaults_flags_override(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"gamma": PI / 4, "omega0_mhz": 4.0}))
        code = cli.main(
            ["gate", "--config", str(cfg), "--omega0-mhz", "8.660",
             "--out-dir", str(tmp_path)]
        )
        assert code == 0
        summary = read_summary(tmp_path / "gate_summary.txt")
        # gamma came from the file, omega0 from the explicit flag
        assert float(summary["gamma_rad"]) == pytest.approx(PI / 4)
        assert float(summary["omega0_mhz"]) == pytest.approx(8.660)

    def test_unknown_keys_rejected(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"no_such_flag": 1}))
        assert cli.main(["gate", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1

    def test_config_hash_stable_across_out_dirs(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        assert cli.main(["gate", "--out-dir", str(d1)]) == 0
        assert cli.main(["gate", "--out-dir", str(d2)]) == 0
        h1 = read_summary(d1 / "gate_summary.txt")
        h2 = read_summary(d2 / "gate_summary.txt")
        meta1 = (d1 / "gate_summary.txt").read_text().splitlines()[:4]
        meta2 = (d2 / "gate_summary.txt").read_text().splitlines()[:4]
        assert meta1 == meta2
        assert h1 == h2


class TestFormatting:
    def test_float_formatting_round_trips(self, rng):
        for _ in range(1000):
            x = float(rng.normal() * 10.0 ** float(rng.integers(-12, 12)))
            assert float(cli._fmt(x)) == x

    def test_complex_formatting_round_trips(self, rng):
        for _ in range(100):
            z = complex(rng.normal(), rng.normal())
            assert complex(cli._fmt(z)) == z
