"""CLI surface: reports, exit codes, determinism, CSV artifacts."""

import io
import json
import os

import pytest

from liesym import GridSpec, base_solution, gss_preset, residual_grid
from liesym.cli import emit_csv, read_csv_sup_norm, run


def run_cli(argv, env_seed=None):
    out, err = io.StringIO(), io.StringIO()
    old = os.environ.pop("LIESYM_SEED", None)
    if env_seed is not None:
        os.environ["LIESYM_SEED"] = env_seed
    try:
        code = run(argv, out=out, err=err)
    finally:
        os.environ.pop("LIESYM_SEED", None)
        if old is not None:
            os.environ["LIESYM_SEED"] = old
    return code, out.getvalue(), err.getvalue()


def json_report(text):
    """Parse the JSON object that ends a CLI output stream."""
    start = text.index('{\n  "command"')
    return json.loads(text[start:])


def strip_timestamp(text):
    return "\n".join(
        line for line in text.splitlines() if '"timestamp"' not in line)


class TestExponents:
    def test_gss_parameters(self):
        code, out, _ = run_cli(["exponents", "--a", "-1", "--r", "2"])
        assert code == 0
        report = json.loads(out)
        assert report["c1"] == -7.0
        assert report["c2"] == -3.0
        assert report["c1_exact"] == "-7"

    def test_fractional_output(self):
        code, out, _ = run_cli(["exponents", "--a", "3", "--r", "1"])
        assert code == 0
        report = json.loads(out)
        assert report["c2_exact"] == "7/3"

    def test_zero_a_is_usage_error(self):
        code, _, err = run_cli(["exponents", "--a", "0", "--r", "2"])
        assert code == 2
        assert "nonzero" in err


class TestCheckSymmetry:
    def test_gss_admitted_exit_zero(self):
        code, out, _ = run_cli(
            ["check-symmetry", "--preset", "gss", "--field", "X",
             "--samples", "200"])
        assert code == 0
        report = json.loads(out)
        assert report["admitted"] is True
        assert report["max_onshell_residual"] <= 1e-9

    def test_perturbed_exponent_exit_one(self):
        code, out, _ = run_cli(
            ["check-symmetry", "--a", "-1", "--r", "2", "--c1", "-6.9",
             "--c2", "-3", "--gamma1", "-1.5", "--gamma2", "0.25",
             "--samples", "200"])
        assert code == 1
        report = json.loads(out)
        assert report["status"] == "refuted"
        assert report["max_onshell_residual"] >= 1e-3

    def test_rotation_field_refuted(self):
        code, out, _ = run_cli(
            ["check-symmetry", "--preset", "gss", "--field", "Y"])
        assert code == 1

    def test_missing_instance_flags(self):
        code, _, err = run_cli(["check-symmetry", "--field", "X"])
        assert code == 2


class TestTransform:
    def test_structural_and_numeric_match(self):
        code, out, _ = run_cli(
            ["transform", "--a", "-1", "--lambda", "1",
             "--x", "0.5", "--y", "-0.5"])
        assert code == 0
        report = json.loads(out)
        assert report["structural_match"] is True
        assert report["equiv"]["equivalent"] is True
        assert report["point"]["u"] == pytest.approx(0.25 ** 0.25)
        assert report["point"]["mapped"] == [pytest.approx(1.0), pytest.approx(0.0)]


class TestResidualGrid:
    def test_csv_artifact_and_round_trip(self, tmp_path):
        csv_path = tmp_path / "field.csv"
        code, out, _ = run_cli(
            ["residual-grid", "--preset", "gss", "--solution", "family",
             "--lambda", "1", "--nx", "30", "--ny", "30",
             "--output", str(csv_path)])
        assert code == 0
        report = json.loads(out)
        assert report["within_tolerance"] is True
        with open(csv_path) as fh:
            recomputed = read_csv_sup_norm(fh)
        assert recomputed == report["sup_residual"]

    def test_stdout_trailer_mode(self):
        code, out, _ = run_cli(
            ["residual-grid", "--preset", "gss", "--solution", "base",
             "--nx", "5", "--ny", "5"])
        assert code == 0
        assert out.startswith("x,y,in_domain,u,residual\n")
        report = json_report(out)
        assert report["in_domain_nodes"] == 25

    def test_masked_nodes_empty_fields(self):
        field = residual_grid(gss_preset(), base_solution(-1),
                              GridSpec(0.5, 2.0, 0.0, 1.8, 4, 4))
        sink = io.StringIO()
        emit_csv(field, sink)
        lines = sink.getvalue().splitlines()
        assert lines[0] == "x,y,in_domain,u,residual"
        masked = [ln for ln in lines[1:] if ",0,," in ln]
        assert masked and all(ln.endswith(",0,,") for ln in masked)

    def test_two_by_two_grid_rows(self):
        field = residual_grid(gss_preset(), base_solution(-1),
                              GridSpec(1.0, 2.0, -0.4, 0.4, 2, 2))
        sink = io.StringIO()
        emit_csv(field, sink)
        assert len(sink.getvalue().splitlines()) == 5  # header + 4 nodes

    def test_seventeen_significant_digits(self):
        field = residual_grid(gss_preset(), base_solution(-1),
                              GridSpec(1.0, 2.0, -0.4, 0.4, 2, 2))
        sink = io.StringIO()
        emit_csv(field, sink)
        row = sink.getvalue().splitlines()[1].split(",")
        assert float(row[3]) == field.nodes[0].u  # round-trips exactly


class TestRegion:
    def test_geometry_and_xor_check(self):
        code, out, _ = run_cli(["region", "--lambda", "1", "--samples", "10000"])
        assert code == 0
        report = json.loads(out)
        assert report["center1"] == [0.5, -0.5]
        assert report["center2"] == [-0.5, -0.5]
        assert report["xor_check"]["mismatches"] == 0

    def test_point_membership(self):
        code, out, _ = run_cli(
            ["region", "--lambda", "1", "--x", "0.5", "--y", "-0.5"])
        assert code == 0
        assert json.loads(out)["point"]["member"] is True

    def test_nonpositive_lambda_rejected(self):
        code, _, err = run_cli(["region", "--lambda", "0"])
        assert code == 2


class TestReduce:
    def test_gss_exit_zero(self):
        code, out, _ = run_cli(["reduce", "--preset", "gss"])
        assert code == 0
        report = json.loads(out)
        assert report["profile_solves_both"] is True
        assert report["residual_a"] == "0"
        assert report["gammas_match_profile"] is True

    def test_mismatched_gammas_exit_one(self):
        code, out, _ = run_cli(
            ["reduce", "--a", "-1", "--r", "2", "--c1", "-7", "--c2", "-3",
             "--gamma1", "1", "--gamma2", "1"])
        assert code == 1
        assert json.loads(out)["profile_solves_both"] is False


class TestWeakCS:
    def test_gss_chain_exit_zero(self):
        code, out, _ = run_cli(
            ["weak-cs", "--preset", "gss", "--samples", "100"])
        assert code == 0
        report = json.loads(out)
        assert report["confirmed"] is True
        assert [s["verdict"] for s in report["stages"]] == [
            "nonzero", "nonzero", "zero"]

    def test_degenerate_instance_exit_one(self):
        code, out, _ = run_cli(
            ["weak-cs", "--a", "-1", "--r", "2", "--c1", "-7", "--c2", "-3",
             "--gamma1", "0", "--gamma2", "0.25", "--samples", "60"])
        assert code == 1
        assert json.loads(out)["anti_reduction"]["degenerate_split"] is True


class TestContract:
    SUBCOMMANDS = (
        ["exponents", "--a", "-1", "--r", "2"],
        ["check-symmetry", "--preset", "gss", "--samples", "60"],
        ["transform", "--a", "-1", "--lambda", "1", "--samples", "16"],
        ["residual-grid", "--preset", "gss", "--nx", "6", "--ny", "6"],
        ["region", "--lambda", "1", "--samples", "500"],
        ["reduce", "--preset", "gss"],
        ["weak-cs", "--preset", "gss", "--samples", "60"],
    )

    @pytest.mark.parametrize("argv", SUBCOMMANDS, ids=lambda a: a[0])
    def test_deterministic_modulo_timestamp(self, argv):
        code1, out1, _ = run_cli(argv)
        code2, out2, _ = run_cli(argv)
        assert code1 == code2
        assert strip_timestamp(out1) == strip_timestamp(out2)
        assert out1.count('"timestamp"') == 1

    def test_unknown_flag_exits_two(self):
        code, _, _ = run_cli(["exponents", "--a", "-1", "--r", "2", "--bogus"])
        assert code == 2

    def test_unknown_subcommand_exits_two(self):
        code, _, _ = run_cli(["no-such-command"])
        assert code == 2

    def test_env_seed_overrides_flag(self):
        code, out, _ = run_cli(
            ["check-symmetry", "--preset", "gss", "--samples", "40",
             "--seed", "1"], env_seed="999")
        assert code == 0
        assert json.loads(out)["seed"] == 999

    def test_bad_env_seed_is_usage_error(self):
        code, _, err = run_cli(
            ["check-symmetry", "--preset", "gss"], env_seed="not-a-number")
        assert code == 2

    def test_output_file_receives_report(self, tmp_path):
        path = tmp_path / "report.json"
        code, out, _ = run_cli(
            ["exponents", "--a", "-1", "--r", "2", "--output", str(path)])
        assert code == 0
        assert out == ""
        assert json.loads(path.read_text())["c1"] == -7.0
