"""
Tests for command line interface
"""

from pytwocomp.main import forge_command_line_interface, entrypoint, write_output

import os
import csv
import json
import math
import textwrap

import pytest
from click.testing import CliRunner
import yaml


def read_value(output, key="value"):
    for line in output.splitlines():
        if line.startswith(key + " "):
            return float(line.split()[1])
    raise KeyError(key)


def write_settings(tmpdir, contents):
    with open(tmpdir / "twocomp.yml", "w") as f:
        f.write(textwrap.dedent(contents))


def test_version():
    runner = CliRunner()
    result = runner.invoke(forge_command_line_interface(), ["--version"])
    assert result.exit_code == 0
    assert "0.1.0" in result.output


def test_help():
    runner = CliRunner()
    result = runner.invoke(forge_command_line_interface(), "--help")
    for command in ["verify", "apply", "integrate", "evolve", "simulate", "show"]:
        assert command in result.output


def test_show(tmpdir):
    """Settings from the file and from the command line are merged."""
    write_settings(tmpdir, """
        dim: 1
        region: "0:2"
        seed: 3
        """)
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), ["show", "-d", str(tmpdir), "--seed", "7", "-s"])
    assert result.exit_code == 0
    dictionary = yaml.load(result.output, yaml.SafeLoader)
    assert dictionary["directory"] == os.path.realpath(str(tmpdir))
    assert dictionary["settings"]["seed"] == 7
    assert dictionary["settings"]["region"] == "0:2"
    assert dictionary["sources"]["seed"] == "command line"
    assert dictionary["sources"]["region"].endswith("twocomp.yml")


def test_apply_lhat(tmpdir):
    """Pure death scales a function by the total death rate of the configuration."""
    write_settings(tmpdir, """
        rates:
            name: constant
            params: {m_plus: 1.0, m_minus: 0.5}
        function:
            name: constant
            params: {value: 2.0}
        """)
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), [
        "apply", "lhat", "-d", str(tmpdir), "--plus", "0.2", "--plus", "0.4", "--minus", "0.6", "-o", "lhat.json"
    ])
    assert result.exit_code == 0
    assert read_value(result.output) == pytest.approx(-5.0)
    with open(tmpdir / "lhat.json") as f:
        data = json.load(f)
    assert data["value"] == pytest.approx(-5.0)
    assert data["target"] == "lhat"
    with open(tmpdir / "manifest.json") as f:
        manifest = json.load(f)
    assert manifest["command"] == "apply"
    assert len(manifest["sha256"]) == 64


def test_apply_without_rates(tmpdir):
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), ["apply", "l", "-d", str(tmpdir), "--plus", "0.5"])
    assert result.exit_code == 2
    assert "No rates" in result.output


def test_integrate_exponential(tmpdir):
    """The truncated exponential series of the region volume."""
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), [
        "integrate", "-d", str(tmpdir), "--identity", "exponential", "--orders", "12,0", "--samples", "10",
        "--no-quadrature"
    ])
    assert result.exit_code == 0
    expected = read_value(result.output, "expected")
    assert expected == pytest.approx(math.e, abs=1e-8)
    assert read_value(result.output) == pytest.approx(expected, rel=1e-10)


def test_integrate_bad_region(tmpdir):
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), ["integrate", "-d", str(tmpdir), "--region", "0:x"])
    assert result.exit_code == 2
    assert "Invalid region" in result.output


def test_evolve(tmpdir):
    """Poisson correlations under pure death decay exponentially."""
    write_settings(tmpdir, """
        rates:
            name: constant
            params: {m_plus: 1.0, m_minus: 0.5}
        evolution:
            t_end: 1.0
            dt: 0.01
            grid_points: 3
        """)
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), ["evolve", "-d", str(tmpdir), "--orders", "1,1"])
    assert result.exit_code == 0
    with open(tmpdir / "evolution.csv") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["time", "n_plus", "n_minus", "mean"]
    assert len(rows) == 1 + 4 * 11
    plus = [row for row in rows[1:] if row[1:3] == ["1", "0"]]
    assert float(plus[-1][0]) == pytest.approx(1.0)
    assert float(plus[-1][3]) == pytest.approx(math.exp(-1.0), rel=1e-6)


def test_simulate_flip(tmpdir):
    """Flips keep the number of particles."""
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), [
        "simulate", "-d", str(tmpdir), "--rates", "flip", "--density", "20,0", "--replicas", "50",
        "--t-end", "0.5", "--estimator", "n_total", "--estimator", "n_plus"
    ])
    assert result.exit_code == 0
    with open(tmpdir / "moments.csv") as f:
        rows = list(csv.DictReader(f))
    totals = {row["mean"] for row in rows if row["estimator"] == "n_total"}
    assert len(totals) == 1
    plus = [float(row["mean"]) for row in rows if row["estimator"] == "n_plus"]
    assert plus[-1] < plus[0]


def test_simulate_rerun_from_manifest(tmpdir):
    """The manifest holds every parameter; rerunning from its settings reproduces the output."""
    first, second = tmpdir.mkdir("first"), tmpdir.mkdir("second")
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), [
        "simulate", "-d", str(first), "--rates", "flip", "--density", "2,1", "--replicas", "3", "--t-end", "0.2",
        "--seed", "5", "--estimator", "n_plus"
    ])
    assert result.exit_code == 0
    with open(first / "manifest.json") as f:
        manifest = json.load(f)
    simulation = manifest["settings"]["simulation"]
    assert simulation["replicas"] == 3
    assert simulation["t_end"] == pytest.approx(0.2)
    assert simulation["density"] == [2.0, 1.0]
    assert simulation["estimators"] == ["n_plus"]
    assert manifest["seed"] == 5
    with open(second / "twocomp.json", "w") as f:
        json.dump(manifest["settings"], f)
    result = runner.invoke(forge_command_line_interface(), ["simulate", "-d", str(second)])
    assert result.exit_code == 0
    with open(second / "manifest.json") as f:
        rerun = json.load(f)
    assert rerun["sha256"] == manifest["sha256"]
    with open(first / "moments.csv") as f, open(second / "moments.csv") as g:
        assert f.read() == g.read()


def test_evolve_manifest(tmpdir):
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), [
        "evolve", "-d", str(tmpdir), "--rates", "constant", "--orders", "1,0", "--t-end", "0.1", "--dt", "0.05",
        "--grid-points", "2"
    ])
    assert result.exit_code == 0
    with open(tmpdir / "manifest.json") as f:
        evolution = json.load(f)["settings"]["evolution"]
    assert evolution["t_end"] == pytest.approx(0.1)
    assert evolution["dt"] == pytest.approx(0.05)
    assert evolution["grid_points"] == 2
    assert evolution["side"] == "correlation"


@pytest.mark.parametrize("command", [
    ["evolve", "--rates", "constant", "--t-end", "0"],
    ["simulate", "--rates", "flip", "--density", "1,1", "--replicas", "0"],
])
def test_explicit_zero_rejected(tmpdir, command):
    """Zero is a value, not a missing flag."""
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), command + ["-d", str(tmpdir)])
    assert result.exit_code == 2


def test_simulate_bad_density(tmpdir):
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), [
        "simulate", "-d", str(tmpdir), "--rates", "flip", "--density", "1,2,3"
    ])
    assert result.exit_code == 2


def test_verify(tmpdir):
    runner = CliRunner(env={"PWD": str(tmpdir)})
    result = runner.invoke(forge_command_line_interface(), [
        "verify", "-d", str(tmpdir), "--suite", "algebra", "--n-max", "4", "--trials", "2"
    ])
    assert result.exit_code == 0
    assert "algebra: 10/10 checks passed" in result.output
    with open(tmpdir / "report.json") as f:
        report = json.load(f)
    assert report["pass"]
    assert len(report["checks"]) == 10


def test_write_output(tmpdir):
    write_output({"value": 0.5, "orders": "2,2"}, tmpdir / "out.csv", "csv")
    with open(tmpdir / "out.csv") as f:
        rows = list(csv.reader(f))
    assert rows == [["value", "orders"], ["0.5", "2,2"]]


def test_entrypoint():
    with pytest.raises(SystemExit):
        entrypoint()
