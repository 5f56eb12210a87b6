"""
Tests for the stochastic simulation.
"""

import csv

import pytest

import numpy as np

from pytwocomp.configuration import Region, two_config
from pytwocomp.functions import counting
from pytwocomp.gillespie import (
    MomentSeries, SimConfig, evaluate_estimator, generator_check, poisson_configuration, simulate
)
from pytwocomp.rates import RateSet, constant_rates, flip_rates, make_rates
from pytwocomp.util import PopulationCapExceeded, ThinningBoundViolated, make_generator


def within(series, name, expected, sigmas=5.0):
    return np.all(np.abs(series.mean(name) - expected) <= sigmas * series.stderr(name) + 1e-12)


def test_sim_config():
    region = Region.unit()
    rates = flip_rates()
    with pytest.raises(ValueError):
        SimConfig(region, rates, (1.0, 1.0), t_end=0.0)
    with pytest.raises(ValueError):
        SimConfig(region, rates, (1.0, 1.0), t_end=1.0, replicas=0)
    with pytest.raises(ValueError):
        SimConfig(region, rates, (1.0, 1.0), t_end=1.0, estimators=["energy"])
    cfg = SimConfig(region, rates, (1.0, 0.5), t_end=2.0, replicas=3)
    assert len(cfg.times) == 11
    assert cfg.settings()["initial"] == {"density": [1.0, 0.5]}
    assert cfg.replace(seed=4).seed == 4
    assert cfg.replace(seed=4).replicas == 3


def test_pure_death():
    """Particle numbers decay exponentially at the death rate."""
    initial = two_config(np.linspace(0.01, 0.99, 20), [0.5])
    cfg = SimConfig(Region.unit(), constant_rates(m_plus=1.0, m_minus=0.0), initial, t_end=1.0, replicas=400)
    series = simulate(cfg)
    assert series.mean("n_plus")[0] == 20.0
    assert within(series, "n_plus", 20.0 * np.exp(-series.times))
    assert np.all(series.mean("n_minus") == 1.0)


def test_flips():
    """Independent flips relax to the ratio of the flip rates and conserve the particle number."""
    initial = two_config(np.linspace(0.01, 0.99, 30), [])
    cfg = SimConfig(Region.unit(), flip_rates(kappa_plus=1.0, kappa_minus=2.0), initial, t_end=1.0, replicas=400)
    series = simulate(cfg)
    expected = 30.0 * (2.0 / 3.0 + np.exp(-3.0 * series.times) / 3.0)
    assert within(series, "n_plus", expected)
    assert np.all(series.mean("n_total") == 30.0)
    assert np.all(series.stderr("n_total") == 0.0)


def test_threads_reproducible():
    cfg = SimConfig(Region.unit(), flip_rates(), (5.0, 5.0), t_end=0.5, replicas=20, seed=3)
    first = simulate(cfg)
    second = simulate(cfg.replace(threads=3))
    for name in cfg.estimators:
        assert np.array_equal(first.samples[name], second.samples[name])


def test_population_cap():
    cfg = SimConfig(Region.unit(), constant_rates(m_plus=0.0, m_minus=0.0, z_plus=100.0), two_config(),
                    t_end=1.0, replicas=1, population_cap=10)
    with pytest.raises(PopulationCapExceeded):
        simulate(cfg)


def test_thinning_bound_violated():
    """A rate above its declared bound is detected."""
    rates = RateSet("birth_death", label="cheat", b_plus=lambda x, gamma: 2.0, bounds={"B+": 1.0})
    cfg = SimConfig(Region.unit(), rates, two_config(), t_end=50.0, replicas=1)
    with pytest.raises(ThinningBoundViolated):
        simulate(cfg)


def test_estimators():
    region = Region.unit()
    gamma = two_config([0.1, 0.15, 0.5], [0.95])
    assert evaluate_estimator("n_plus", gamma, region, 0.1) == 3.0
    assert evaluate_estimator("n_total", gamma, region, 0.1) == 4.0
    assert evaluate_estimator("pairs_plus", gamma, region, 0.1) == 1.0
    assert evaluate_estimator("pairs_minus", gamma, region, 0.1) == 0.0
    # periodic distance 0.15 to the plus point at 0.1
    assert evaluate_estimator("pairs_mixed", gamma, region, 0.17) == 1.0
    assert evaluate_estimator("pairs_mixed", gamma, region, 0.1) == 0.0


def test_poisson_configuration():
    rng = make_generator(0, "gillespie")
    region = Region(0.0, 100.0)
    gamma = poisson_configuration(rng, region, 1.0, 0.5)
    n, m = gamma.size
    assert abs(n - 100) < 50
    assert abs(m - 50) < 35
    assert all(region.contains(p) for p in gamma.points())


def test_moment_series_csv(tmpdir):
    series = MomentSeries([0.0, 1.0], {"n_plus": [[2.0, 1.0], [4.0, 3.0]]})
    assert series.estimators == ("n_plus",)
    assert series.mean("n_plus").tolist() == [3.0, 2.0]
    with tmpdir.as_cwd():
        series.to_csv("moments.csv")
        with open("moments.csv") as f:
            rows = list(csv.reader(f))
    assert rows[0] == ["time", "estimator", "mean", "stderr"]
    assert rows[1][:3] == ["0.0", "n_plus", "3.0"]
    assert len(rows) == 3


def test_generator_check():
    """Short-time increments of the particle number match the generator."""
    rates = constant_rates(m_plus=1.0, m_minus=0.0, z_plus=2.0)
    cfg = SimConfig(Region.unit(), rates, two_config(), t_end=1.0, replicas=2000, seed=1)
    gamma0 = two_config([0.1, 0.3, 0.5, 0.7, 0.9], [])
    empirical, exact = generator_check(cfg, counting("plus"), gamma0, 0.01)
    assert exact.value == pytest.approx(-3.0)
    assert empirical.agrees(exact, sigmas=5.0, atol=0.1)
    with pytest.raises(ValueError):
        generator_check(cfg, counting("plus"), gamma0, 0.0)


def test_generator_check_predator_prey():
    """Interacting rates: the prey number changes at births minus deaths caused by predators."""
    region = Region.unit()
    rates = make_rates("pp", None, torus=region)
    cfg = SimConfig(region, rates, two_config(), t_end=1.0, replicas=10000, seed=4)
    gamma0 = two_config([0.1, 0.3, 0.5, 0.7], [0.2, 0.4, 0.6])
    empirical, exact = generator_check(cfg, counting("plus"), gamma0, 1e-3)
    # births 4 * 0.2, deaths 4 * (1 + 3 * 0.5)
    assert exact.value == pytest.approx(-9.2, abs=1e-10)
    assert empirical.stderr > 0.0
    assert empirical.agrees(exact, sigmas=5.0, atol=0.1)
