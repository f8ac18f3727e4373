import json

import numpy as np
import pytest
from click.testing import CliRunner

from thimble import kernels
from thimble.cli import EXIT_CONFIG, EXIT_NUMERICAL, cli


@pytest.fixture
def run():
    runner = CliRunner(mix_stderr=False)

    def invoke(*args):
        return runner.invoke(cli, [str(arg) for arg in args])

    return invoke


def document(result):
    assert result.exit_code == 0, result.stderr
    return json.loads(result.stdout)


def test_version(run):
    result = run("--version")
    assert result.exit_code == 0
    assert "1.0.0" in result.stdout


def test_kernel_json(run):
    output = document(run("kernel", "--system", "free", "--xi", 0.2, "--xf", -0.3, "--T", 1.5))
    assert set(output) == {"meta", "rows"}
    assert output["meta"]["version"] == "1.0.0"
    assert output["meta"]["config"]["system"] == "free"
    row = output["rows"][0]
    expected = kernels.freeKernel(kernels.KernelParams(xi=0.2, xf=-0.3, T=1.5)).amplitude
    assert row["re_amplitude"] == pytest.approx(expected.real, rel=1e-15)
    assert row["im_amplitude"] == pytest.approx(expected.imag, rel=1e-15)
    assert row["maslov"] == 0


def test_kernel_csv_uses_full_precision(run):
    result = run("kernel", "--system", "free", "--xi", 0, "--xf", 0, "--T", 1, "--format", "csv")
    assert result.exit_code == 0
    header, values = result.stdout.strip().splitlines()
    columns = header.split(",")
    assert columns[:3] == ["system", "re_amplitude", "im_amplitude"]
    cells = dict(zip(columns, values.split(",")))
    expected = kernels.freeKernel(kernels.KernelParams(xi=0, xf=0, T=1)).amplitude
    assert float(cells["re_amplitude"]) == expected.real


def test_circle_kernel_in_real_time_reports_open_tail(run):
    output = document(run("kernel", "--system", "circle", "--xi", 0, "--xf", 1, "--T", 1))
    assert output["rows"][0]["truncation_error"] is None


def test_wick_kernel_defaults_to_heat_kernel(run):
    output = document(run("kernel", "--system", "wick", "--xi", 0, "--xf", 1, "--T", 2))
    row = output["rows"][0]
    assert row["re_amplitude"] == pytest.approx(np.exp(-0.25) / np.sqrt(4 * np.pi))
    assert row["im_amplitude"] == pytest.approx(0.0, abs=1e-15)


def test_config_error_exit_code(run):
    result = run("kernel", "--system", "free", "--T", -1)
    assert result.exit_code == EXIT_CONFIG
    assert "*** Error" in result.stderr


def test_label_outside_set_exit_code(run):
    assert run("trajectory", "--n", 1, "--m", 1).exit_code == EXIT_CONFIG


def test_numerical_error_exit_code(run):
    result = run("kernel", "--system", "harmonic", "--xi", 0, "--xf", 0, "--T", np.pi)
    assert result.exit_code == EXIT_NUMERICAL
    assert "CausticError" in result.stderr


def test_config_file_precedence(run, config_file):
    path = config_file("# kernel defaults\nT = 2.0\nxi = 0.5\nsystem = harmonic\n")
    output = document(run("kernel", "--config", path, "--xi", 0.1))
    settings = output["meta"]["config"]
    assert settings["T"] == 2.0
    assert settings["xi"] == 0.1
    assert settings["xf"] == 1.0
    assert settings["system"] == "harmonic"


def test_config_file_rejects_unknown_keys(run, config_file):
    path = config_file("temperature = 3\n")
    assert run("kernel", "--config", path).exit_code == EXIT_CONFIG


def test_config_file_rejects_malformed_lines(run, config_file):
    path = config_file("T 2.0\n")
    assert run("kernel", "--config", path).exit_code == EXIT_CONFIG


def test_output_is_deterministic(run):
    args = ("action", "--xi", 0, "--xf", 0, "--T", 0.5, "--n", 2, "--m", 1)
    first, second = run(*args), run(*args)
    assert first.exit_code == 0
    assert first.stdout == second.stdout


def test_action_row(run):
    output = document(run("action", "--xi", 0, "--xf", 0, "--T", 0.5, "--n", 2, "--m", 1))
    row = output["rows"][0]
    assert row["class"] == "complexSuppressed"
    assert row["re_action"] < 0
    assert row["n_sigma"] is None


def test_trajectory_of_zero_solution(run):
    output = document(run("trajectory", "--xi", 0, "--xf", 0, "--T", 1, "--n", 0, "--m", 0,
                          "--samples", 11))
    rows = output["rows"]
    assert len(rows) == 11
    assert all(row["re_z"] == 0 and row["im_z"] == 0 for row in rows)
    assert rows[-1]["t"] == pytest.approx(1.0)


def test_saddle_atlas(run):
    output = document(run("saddle-atlas", "--xi", 0, "--xf", 0, "--T", 0.5, "--nmax", 1,
                          "--mmax", 1))
    rows = output["rows"]
    assert [(row["n"], row["m"]) for row in rows] == [(0, 0), (0, 1), (1, 0)]
    zero = rows[0]
    assert zero["re_ksq"] is None
    assert zero["class"] == "realSolution"
    assert all(row["status"] == "solved" for row in rows)


def test_flow_spectrum(run):
    output = document(run("flow-spectrum", "--system", "free", "--grid-n", 64))
    rows = output["rows"]
    assert len(rows) == 126
    assert max(abs(row["pairing_residual"]) for row in rows) < 1e-8
    lambdas = [row["lambda"] for row in rows]
    assert lambdas == sorted(lambdas)


def test_flow_spectrum_rejects_circle(run):
    assert run("flow-spectrum", "--system", "circle", "--grid-n", 64).exit_code == EXIT_CONFIG


def test_output_file(run, tmp_path):
    target = tmp_path / "kernel.json"
    result = run("kernel", "--system", "free", "--T", 1, "--out", target)
    assert result.exit_code == 0
    assert json.loads(target.read_text())["rows"][0]["system"] == "free"


def test_reality_tolerance_changes_class(run, config_file):
    args = ("action", "--xi", 0, "--xf", 0, "--T", 0.5, "--n", 1, "--m", 0)
    assert document(run(*args))["rows"][0]["class"] == "realSolution"
    strict = document(run(*args, "--tol-reality", 0))["rows"][0]
    assert strict["class"] != "realSolution"
    path = config_file("tol-reality = 0\n")
    from_file = document(run(*args, "--config", path))["rows"][0]
    assert from_file["class"] == strict["class"]


def test_stray_numerical_failure_exit_code(run, monkeypatch):
    def overflow(system, params):
        raise FloatingPointError("overflow encountered in exp")

    monkeypatch.setattr(kernels, "kernel", overflow)
    result = run("kernel", "--system", "free", "--T", 1)
    assert result.exit_code == EXIT_NUMERICAL
    assert "*** Error in kernel" in result.stderr
    assert "FloatingPointError" in result.stderr
