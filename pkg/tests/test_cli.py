import json
import math
import os

import pytest

from graf.cli import main, parse_args
from graf.combinatorics import ball_size
from graf.field import sample_cost_matrix, write_matrix_csv
from graf.montecarlo import estimate
from graf.serialize import parse_csv_text, to_json_text
from graf.solvers import solve_max_exact


@pytest.fixture
def matrix_file(tmp_path):
    path = tmp_path / "matrix.csv"
    write_matrix_csv(sample_cost_matrix(4, 42), path)
    return path


class TestParsing:
    def test_valid_estimate(self):
        config = parse_args(["estimate", "--n", "10", "--reps", "1000", "--seed", "1"])
        assert config.subcommand == "estimate"
        assert config.n == 10 and config.reps == 1000 and config.seed == 1

    def test_eps_out_of_range_is_usage_error(self, capsys):
        assert main(["nearmax", "--n", "4", "--eps", "1.5", "--reps", "10", "--seed", "1"]) == 2
        assert "--eps" in capsys.readouterr().err

    def test_missing_subcommand(self, capsys):
        assert main([]) == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_missing_seed_is_usage_error(self, capsys):
        assert main(["estimate", "--n", "4", "--reps", "10"]) == 2
        assert "--seed" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(["bounds", "--n-list", "3", "--frobnicate"]) == 2

    def test_bad_seed_rejected(self, capsys):
        assert main(["estimate", "--n", "4", "--reps", "10", "--seed", str(2**64)]) == 2


class TestConfigFile:
    def test_config_supplies_required_flags(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("n=4\nreps=50\nseed=3\nformat=csv\n")
        out = tmp_path / "report.csv"
        assert main(["estimate", "--config", str(config), "--out", str(out)]) == 0
        assert out.exists()

    def test_flags_override_config(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("n=4\nreps=50\nseed=3\n")
        parsed = parse_args(
            ["estimate", "--config", str(config), "--reps", "75"]
        )
        assert parsed.reps == 75
        assert parsed.n == 4

    def test_unknown_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("bogus=1\n")
        assert main(["estimate", "--config", str(config)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_malformed_line_rejected(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("just-a-word\n")
        assert main(["estimate", "--config", str(config)]) == 2

    def test_comments_and_blanks_ignored(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("# comment\n\nn=4\nreps=20\nseed=1\n")
        parsed = parse_args(["estimate", "--config", str(config)])
        assert parsed.n == 4

    def test_flag_keys(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("sensitivity=true\n")
        parsed = parse_args(
            ["nearmax", "--config", str(config), "--n", "3", "--eps", "0.2",
             "--reps", "10", "--seed", "1"]
        )
        assert parsed.sensitivity is True


class TestSolveCommand:
    def test_json_output_matches_solver(self, matrix_file, capsys):
        assert main(["solve", "--input", str(matrix_file), "--method", "exact"]) == 0
        payload = json.loads(capsys.readouterr().out)
        expected = solve_max_exact(sample_cost_matrix(4, 42))
        assert payload["n"] == 4
        assert payload["method"] == "exact"
        assert tuple(payload["assignment"]) == expected.assignment.mapping
        assert payload["raw_sum"] == pytest.approx(expected.raw_sum, rel=1e-15)
        assert payload["field_value"] == pytest.approx(expected.field_value, rel=1e-15)

    @pytest.mark.parametrize("method", ["brute", "exact", "greedy", "min"])
    def test_all_methods_run(self, matrix_file, method, capsys):
        assert main(["solve", "--input", str(matrix_file), "--method", method]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert sorted(payload["assignment"]) == [1, 2, 3, 4]

    def test_missing_input_fails(self, tmp_path, capsys):
        missing = tmp_path / "nope.csv"
        assert main(["solve", "--input", str(missing)]) == 1
        assert "error" in capsys.readouterr().err


class TestBoundsCommand:
    def test_table_contents(self, tmp_path):
        out = tmp_path / "bounds.csv"
        assert main(
            ["bounds", "--n-list", "2,5,25", "--eps", "0.1", "--delta", "0.3",
             "--out", str(out)]
        ) == 0
        header, rows = parse_csv_text(out.read_text())
        assert header[:5] == ["n", "upper_E", "trivial_upper_E", "greedy_lower_E", "var_lower"]
        assert "nearmax_eps_0.1" in header and "V_delta_0.3" in header
        by_n = {row[0]: dict(zip(header, row)) for row in rows}
        assert by_n["5"]["V_delta_0.3"] == str(ball_size(5, 0.3))
        # Exact counting is capped; larger sizes leave the cell empty.
        assert by_n["25"]["V_delta_0.3"] == ""
        assert float(by_n["25"]["Vbound_delta_0.3"]) > 0

    def test_stdout_when_no_out(self, capsys):
        assert main(["bounds", "--n-list", "3"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("n,upper_E")


class TestEstimateCommand:
    def test_json_document(self, tmp_path):
        out = tmp_path / "report.json"
        assert main(
            ["estimate", "--n", "3", "--reps", "200", "--seed", "5",
             "--workers", "1", "--out", str(out)]
        ) == 0
        payload = json.loads(out.read_text())
        report = estimate(3, 200, 5)
        assert payload["replications"] == 200
        assert payload["statistics"]["max_value"]["mean"] == pytest.approx(
            report.max_value.mean, rel=1e-15
        )
        assert payload["greedy_violations"] == 0

    def test_csv_format(self, tmp_path):
        out = tmp_path / "report.csv"
        assert main(
            ["estimate", "--n", "3", "--reps", "200", "--seed", "5",
             "--workers", "1", "--format", "csv", "--out", str(out)]
        ) == 0
        header, rows = parse_csv_text(out.read_text())
        assert header == [
            "n", "reps", "mean_M", "se_M", "var_M", "se_var_M", "mean_W",
            "mean_greedy", "mean_gbar", "var_gbar", "cov_gbar_L", "ratio",
            "upper_E", "greedy_lower_E", "var_lower",
        ]
        assert len(rows) == 1 and rows[0][0] == "3"

    def test_manifest_echoed_for_file_output(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        main(["estimate", "--n", "3", "--reps", "120", "--seed", "5", "--out", str(out)])
        manifest = json.loads(capsys.readouterr().out)
        assert manifest["tool"] == "graf"
        assert manifest["subcommand"] == "estimate"
        assert manifest["config"]["reps"] == 120
        assert "elapsed_seconds" in manifest


class TestEnumerateCommand:
    def test_row_count_and_values(self, matrix_file, tmp_path):
        out = tmp_path / "fields.csv"
        assert main(["enumerate", "--input", str(matrix_file), "--out", str(out)]) == 0
        header, rows = parse_csv_text(out.read_text())
        assert header == ["permutation", "field_value"]
        assert len(rows) == math.factorial(4)
        assert rows[0][0] == "1,2,3,4"


class TestVerifyCommand:
    def test_passes_and_prints(self, capsys):
        assert main(["verify", "--n", "4", "--delta", "0.3", "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "ok: ball size n=4" in out
        assert "FAIL" not in out

    def test_writes_report_file(self, tmp_path):
        out = tmp_path / "verify.txt"
        assert main(
            ["verify", "--n", "3", "--delta", "0.5", "--seed", "2", "--out", str(out)]
        ) == 0
        assert "ok:" in out.read_text()


class TestReproducibility:
    def test_byte_identical_reruns_and_worker_invariance(self, tmp_path):
        flags = ["estimate", "--n", "4", "--reps", "6000", "--seed", "9"]
        paths = [tmp_path / name for name in ("a.json", "b.json", "c.json")]
        assert main(flags + ["--workers", "1", "--out", str(paths[0])]) == 0
        assert main(flags + ["--workers", "1", "--out", str(paths[1])]) == 0
        assert main(flags + ["--workers", "2", "--out", str(paths[2])]) == 0
        blobs = [p.read_bytes() for p in paths]
        assert blobs[0] == blobs[1] == blobs[2]

    def test_ratio_table_reruns(self, tmp_path):
        flags = ["ratio-table", "--n-list", "3,4", "--reps", "300", "--seed", "2"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(flags + ["--out", str(a), "--workers", "1"]) == 0
        assert main(flags + ["--out", str(b), "--workers", "2"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_nearmax_reruns(self, tmp_path):
        flags = [
            "nearmax", "--n", "3", "--eps", "0.2", "--reps", "40", "--seed", "3",
            "--m-reps", "300", "--workers", "1",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(flags + ["--out", str(a)]) == 0
        assert main(flags + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_no_partial_output_on_failure(self, tmp_path):
        out = tmp_path / "missing-dir" / "report.json"
        assert main(
            ["estimate", "--n", "3", "--reps", "100", "--seed", "1", "--out", str(out)]
        ) == 1
        assert not out.exists()
        assert not list(tmp_path.glob("**/*.tmp"))


class TestLogging:
    def test_invalid_level_rejected(self, capsys, monkeypatch):
        monkeypatch.setenv("GRAF_LOG", "loud")
        assert main(["bounds", "--n-list", "3"]) == 2
        assert "GRAF_LOG" in capsys.readouterr().err

    def test_levels_accepted(self, monkeypatch, capsys):
        monkeypatch.setenv("GRAF_LOG", "debug")
        assert main(["bounds", "--n-list", "3"]) == 0


class TestJsonEmitter:
    def test_seventeen_digit_floats_round_trip(self):
        value = 0.1 + 0.2
        text = to_json_text({"x": value, "flag": True, "items": [1, 2.5]})
        parsed = json.loads(text)
        assert parsed["x"] == value
        assert parsed["flag"] is True

    def test_non_finite_becomes_null(self):
        assert json.loads(to_json_text({"x": math.nan}))["x"] is None
