"""
Tests for the verification suites.
"""

import json
import math
import inspect

import pytest

from pytwocomp.configuration import Region
from pytwocomp.lpmeasure import Estimate, LPIntegrator
from pytwocomp.suites import (
    CheckResult, Report, SUITES, check_algebra, check_bounds, check_duality, check_kernels, check_lemma2,
    check_moments, check_oracle, close_check, pass_fraction_check, run_suite, statistical_check
)
from pytwocomp.util import SettingsError


def test_checks():
    assert close_check("a", 1.0, 1.0 + 1e-13).passed
    assert not close_check("a", 1.0, 1.1).passed
    assert close_check("a", 100.0, 101.0, rtol=1e-3, scale=10.0).passed
    result = statistical_check("b", Estimate(1.0, 0.1), Estimate(1.5, 0.0))
    assert not result.passed
    assert result.sigma == pytest.approx(0.1)
    assert statistical_check("b", Estimate(1.0, 0.1), 1.25).passed


def test_report(tmpdir):
    """Optional checks do not decide the outcome."""
    report = Report("demo", [CheckResult("one", 1.0, 1.0, 0.0, 0.0, True),
                             CheckResult("two", 1.0, 2.0, 0.0, 0.0, False, required=False)])
    assert report.passed
    assert report.failures() == []
    assert report.summary().splitlines()[-1] == "demo: 1/1 checks passed"
    report.results.append(CheckResult("three", 1.0, 2.0, 0.0, 0.0, False))
    assert not report.passed
    assert [r.name for r in report.failures()] == ["three"]
    with tmpdir.as_cwd():
        report.to_json("report.json")
        with open("report.json") as f:
            data = json.load(f)
    assert data["suite"] == "demo"
    assert data["pass"] is False
    assert [c["pass"] for c in data["checks"]] == [True, False, False]


def test_algebra():
    results = check_algebra(n_max=4, trials=3, seed=1)
    assert len(results) == 15
    assert all(r.passed for r in results)


def test_kernels():
    results = check_kernels(rates="constant,pp,flip", tuples=10)
    assert {r.name.split(":")[0] for r in results} == {"kernel constant", "kernel pp", "kernel flip"}
    assert all(r.passed for r in results)


def test_run_suite():
    report = run_suite("oracle", LPIntegrator(Region.unit(), quadrature=True), rates="constant", trials=2)
    assert report.suite == "oracle"
    assert len(report.results) == 2
    assert report.passed
    with pytest.raises(SettingsError):
        run_suite("everything")
    assert set(SUITES) == {"algebra", "lemma2", "kernels", "duality", "bounds", "oracle", "moments"}


def test_default_sizes():
    """Full runs use at least the acceptance sample sizes."""
    def default(function, name):
        return inspect.signature(function).parameters[name].default
    assert default(check_oracle, "trials") >= 30
    assert default(check_algebra, "trials") >= 100
    assert default(check_bounds, "trials") >= 20
    assert default(check_lemma2, "trials") >= 20


def test_pass_fraction():
    results = [CheckResult(f"#{i}", 0.0, 0.0, 0.0, 0.0, i >= 1, required=False) for i in range(20)]
    assert pass_fraction_check("fraction", results).passed
    assert pass_fraction_check("fraction", results).lhs == 19
    results[1] = results[1]._replace(passed=False)
    assert not pass_fraction_check("fraction", results).passed


def test_lemma2():
    """Single trials are optional; the pass fraction decides."""
    results = check_lemma2(LPIntegrator(Region.unit(), samples=100), trials=3, orders=(1, 1), samples=500, seed=2)
    assert len(results) == 4
    assert not any(r.required for r in results[:-1])
    fraction = results[-1]
    assert fraction.name == "lemma2 pass fraction"
    assert fraction.required
    assert fraction.lhs == sum(r.passed for r in results[:-1])
    assert fraction.rhs == 3
    assert fraction.passed == (fraction.lhs == 3)
    assert Report("lemma2", results).passed == fraction.passed


def test_duality():
    results = check_duality(LPIntegrator(Region.unit()), rates="constant,flip", orders=(1, 1), samples=2000)
    assert [r.name.split(" (")[0] for r in results] == ["duality constant", "duality flip",
                                                         "duality pure death, G = 1"]
    assert results[-1].passed


def test_bounds():
    I = LPIntegrator(Region.unit(), orders=(1, 1), samples=20)
    results = check_bounds(I, rates="constant", trials=2, samples=20)
    names = [r.name for r in results]
    assert results[0].name == "(1+t)^b a^t bound"
    assert results[0].passed
    n_rows = [r for r in results if r.name.startswith("N constant at")]
    assert n_rows
    assert all(r.passed for r in n_rows)
    assert any(name.startswith("growth constant") for name in names)
    assert [name for name in names if name.startswith("norm bound")] == ["norm bound constant #0",
                                                                         "norm bound constant #1"]
    for r in results:
        if r.name.startswith("norm bound"):
            assert r.passed == (r.lhs <= r.rhs + r.tolerance)


def test_moments():
    """For constant rates the hierarchy gives the exact mean densities; the simulation agrees."""
    results = check_moments(LPIntegrator(Region.unit()), rates="constant", t_end=0.5, replicas=2000, dt=0.01,
                            grid_points=4, seed=3)
    assert [r.name for r in results] == [
        "moments constant plus density at t=0.25", "moments constant plus density at t=0.5",
        "moments constant minus density at t=0.25", "moments constant minus density at t=0.5",
    ]
    expected = [0.5 + 1.5 * math.exp(-0.25), 0.5 + 1.5 * math.exp(-0.5),
                0.6 + 0.4 * math.exp(-0.125), 0.6 + 0.4 * math.exp(-0.25)]
    for r, value in zip(results, expected):
        assert r.rhs == pytest.approx(value, rel=1e-6)
        assert r.sigma > 0.0
        assert abs(r.lhs - r.rhs) <= 5 * r.sigma
