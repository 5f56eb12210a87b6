"""
Tests for the truncated hierarchical evolution.
"""

import csv

import pytest

import numpy as np

from pytwocomp.configuration import Region
from pytwocomp.functions import constant, poisson_correlation, random_bounded
from pytwocomp.generators import kernel_families
from pytwocomp.hierarchy import GridStates, evolve_truncated, hierarchy_matrix, rk4_step
from pytwocomp.lpmeasure import LPIntegrator
from pytwocomp.rates import constant_rates, make_rates
from pytwocomp.util import StepSizeRejected, make_generator


@pytest.fixture
def pure_death():
    return constant_rates(m_plus=1.0, m_minus=0.5)


def test_grid_states():
    states = GridStates(Region.unit(), (1, 1), 3)
    assert len(states) == 1 + 3 + 3 + 6
    assert states.cell == pytest.approx(1.0 / 3.0)
    assert states.sizes.count((1, 1)) == 6
    assert states.weights[0] == 1.0
    assert states.pairing(np.ones(len(states)), np.ones(len(states))) == pytest.approx(1.0 + 2.0 + 6.0 / 9.0)


def test_rk4_step():
    state = rk4_step(np.array([[-1.0]]), np.array([1.0]), 0.1)
    assert state[0] == pytest.approx(np.exp(-0.1), abs=1e-7)


def test_pure_death_matrix(pure_death):
    """Under pure death the truncated generator is diagonal."""
    states = GridStates(Region.unit(), (2, 1), 3)
    matrix = hierarchy_matrix(kernel_families(pure_death), states).toarray()
    expected = [-(1.0 * n + 0.5 * m) for n, m in states.sizes]
    assert np.allclose(matrix, np.diag(expected))


def test_pure_death_correlations(pure_death):
    """Correlation functions of Poisson initial data decay exponentially."""
    I = LPIntegrator(Region.unit(), orders=(1, 1))
    series = evolve_truncated(pure_death, poisson_correlation(2.0, 1.0), "correlation", t_end=2.0, dt=1e-3,
                              I=I, grid_points=4, times=[0.0, 1.0, 2.0])
    assert series.times == pytest.approx([0.0, 1.0, 2.0])
    assert series.spatial_mean(1, 0) == pytest.approx(2.0 * np.exp(-series.times), abs=1e-6)
    assert series.spatial_mean(1, 1) == pytest.approx(2.0 * np.exp(-1.5 * series.times), abs=1e-6)
    plus, minus = series.expected_counts()
    assert plus == pytest.approx(2.0 * np.exp(-series.times), abs=1e-6)
    assert minus == pytest.approx(np.exp(-0.5 * series.times), abs=1e-6)
    configs, values = series.component(1, 0)
    assert len(configs) == 4
    with pytest.raises(ValueError):
        series.spatial_mean(2, 0)


def test_discrete_duality():
    """Evolving the quasi-observable or the correlation function gives the same pairing."""
    rng = make_generator(0, "hierarchy")
    rates = make_rates("pp")
    I = LPIntegrator(Region.unit(), orders=(2, 1))
    G = random_bounded(rng, 2, 1)
    k = poisson_correlation(1.0, 0.5)
    forward = evolve_truncated(rates, G, "quasi_observable", t_end=0.5, dt=0.01, I=I, grid_points=4)
    backward = evolve_truncated(rates, k, "correlation", t_end=0.5, dt=0.01, I=I, grid_points=4)
    assert len(forward) == 11
    assert forward.pairing(k) == pytest.approx(backward.pairing(G), rel=1e-9, abs=1e-12)


def test_step_size_rejected():
    rates = constant_rates(m_plus=1000.0, m_minus=0.0)
    I = LPIntegrator(Region.unit(), orders=(1, 0))
    with pytest.raises(StepSizeRejected):
        evolve_truncated(rates, constant(1.0), "quasi_observable", t_end=2.0, dt=1.0, I=I, grid_points=2)


def test_invalid_arguments(pure_death):
    I = LPIntegrator(Region.unit(), orders=(1, 0))
    with pytest.raises(ValueError):
        evolve_truncated(pure_death, constant(1.0), "both", t_end=1.0, dt=0.1, I=I)
    with pytest.raises(ValueError):
        evolve_truncated(pure_death, constant(1.0), "correlation", t_end=1.0, dt=0.0, I=I)


def test_to_csv(tmpdir, pure_death):
    I = LPIntegrator(Region.unit(), orders=(1, 1))
    series = evolve_truncated(pure_death, poisson_correlation(1.0, 1.0), "correlation", t_end=0.1, dt=0.05,
                              I=I, grid_points=2, times=[0.0, 0.1])
    with tmpdir.as_cwd():
        series.to_csv("evolution.csv")
        with open("evolution.csv") as f:
            rows = list(csv.reader(f))
    assert rows[0] == ["time", "n_plus", "n_minus", "mean"]
    assert len(rows) == 1 + 4 * 2
    assert rows[1][1:] == ["0", "0", "1.0"]
