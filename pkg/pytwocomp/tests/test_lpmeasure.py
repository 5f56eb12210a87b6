"""
Tests for Lebesgue-Poisson integration.
"""

import math

import pytest

import numpy as np

from pytwocomp.configuration import Region, two_config
from pytwocomp.functions import constant, indicator, poisson_correlation, product, random_bounded
from pytwocomp.lpmeasure import (
    GAUSS_LEGENDRE_NODES, Estimate, LPIntegrator, _gauss_legendre, combine, integrability_check, lemma2_check,
    lp_integrate, norm_KC, norm_LC, pairing
)
from pytwocomp.util import make_generator


def test_integrator_arguments():
    with pytest.raises(ValueError):
        LPIntegrator(Region.unit(), orders=(-1, 2))
    with pytest.raises(ValueError):
        LPIntegrator(Region.unit(), samples=0)
    with pytest.raises(ValueError):
        LPIntegrator(Region.unit(), z=0.0)
    with pytest.raises(ValueError):
        LPIntegrator(Region.unit(), padding=-1.0)
    I = LPIntegrator(([0.0], [2.0]), padding=0.5)
    assert I.region == Region(0.0, 2.0)
    assert I.point_region.volume == pytest.approx(3.0)
    J = I.replace(samples=10, orders=(1, 0))
    assert J.samples == 10 and J.orders == (1, 0) and J.padding == 0.5
    assert I.settings()["orders"] == [2, 2]


def test_constant_integrand():
    """A constant integrand gives the exact truncated exponential series."""
    I = LPIntegrator(Region.unit(), orders=(2, 2), samples=100)
    estimate = lp_integrate(constant(1.0), I)
    assert estimate.value == pytest.approx(6.25, abs=1e-14)
    assert estimate.stderr == 0.0
    assert estimate.orders == (2, 2)
    scaled = lp_integrate(constant(1.0), I.replace(region=Region(0.0, 2.0), z=0.5))
    assert scaled.value == pytest.approx(6.25, abs=1e-14)


def test_exponential_identity():
    """The integral of the product of indicators over a box is the exponential of its volume."""
    region = Region.unit()
    I = LPIntegrator(region, orders=(12, 0), samples=10)
    estimate = lp_integrate(indicator(region, 12, 0), I)
    assert estimate.value == pytest.approx(math.e, abs=1e-8)


def test_quadrature():
    """Gauss-Legendre nodes integrate polynomials exactly."""
    I = LPIntegrator(Region.unit(), orders=(1, 1), quadrature=True)
    G = product(lambda points: points[..., 0], order=(1, 0))
    estimate = lp_integrate(G, I)
    assert estimate.value == pytest.approx(0.5, abs=1e-14)
    assert estimate.method == "quadrature"
    H = product(lambda points: points[..., 0], order=(1, 1))
    assert lp_integrate(H, I).value == pytest.approx(0.25, abs=1e-14)
    assert I.space_integral(lambda u: u[0] ** 2).value == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_quadrature_rules_disjoint():
    """The two quadrature rules share no node, so the tensor grid has no equal points."""
    first, _ = _gauss_legendre(GAUSS_LEGENDRE_NODES[0], 0.0, 1.0)
    second, weights = _gauss_legendre(GAUSS_LEGENDRE_NODES[1], 0.0, 1.0)
    assert GAUSS_LEGENDRE_NODES[0] == 64
    assert np.min(np.abs(first[:, None] - second[None, :])) > 1e-8
    assert weights.sum() == pytest.approx(1.0, abs=1e-14)
    I = LPIntegrator(Region.unit(), orders=(2, 0), quadrature=True)
    G = product(lambda points: points[..., 0] ** 2, order=(2, 0))
    assert lp_integrate(G, I).value == pytest.approx(1.0 / 18.0, abs=1e-14)


def test_monte_carlo_error():
    """Monte Carlo estimates agree with quadrature within their standard errors."""
    rng = make_generator(3, "lp")
    G = random_bounded(rng, 1, 1)
    exact = lp_integrate(G, LPIntegrator(Region.unit(), orders=(1, 1), quadrature=True))
    estimate = lp_integrate(G, LPIntegrator(Region.unit(), orders=(1, 1), samples=20000, seed=5))
    assert estimate.stderr > 0.0
    assert estimate.agrees(exact, sigmas=5.0)


def test_threads_reproducible():
    """Results depend on the seed and chunk size only."""
    rng = make_generator(4, "lp")
    G = random_bounded(rng, 2, 2)
    I = LPIntegrator(Region.unit(), samples=1000, chunk_size=100, seed=9)
    first = lp_integrate(G, I)
    second = lp_integrate(G, I.replace(threads=4))
    assert first.value == second.value
    assert first.stderr == second.stderr
    other = lp_integrate(G, I.replace(seed=10))
    assert other.value != first.value


def test_pairing_and_norms():
    region = Region.unit()
    I = LPIntegrator(region, orders=(2, 2), samples=50)
    G = indicator(region, 1, 0, order=(1, 0))
    assert pairing(G, poisson_correlation(2.0, 1.0), I).value == pytest.approx(2.0, abs=1e-14)
    assert norm_LC(constant(1.0), 2.0, I.replace(orders=(1, 1))).value == pytest.approx(9.0, abs=1e-14)
    norm = norm_KC(poisson_correlation(2.0, 2.0), 2.0, I, probe_budget=90)
    assert norm.value == pytest.approx(1.0)
    assert norm.probes == 1 + 8 * 10
    assert float(norm) == norm.value


def test_lemma2():
    """Both sides of the subset-integration identity agree for a constant integrand."""
    I = LPIntegrator(Region.unit(), orders=(2, 2), samples=20)
    lhs, rhs = lemma2_check(lambda eta, xi: 1.0, I)
    assert lhs.value == pytest.approx(25.0, abs=1e-12)
    assert rhs.value == pytest.approx(25.0, abs=1e-12)


def test_lemma2_random():
    I = LPIntegrator(Region.unit(), orders=(1, 1), samples=4000, seed=2)

    def H(eta, xi):
        return math.cos(sum(p[0] for p in eta.plus)) * (1.0 + len(xi.minus))

    lhs, rhs = lemma2_check(H, I)
    assert lhs.agrees(rhs, sigmas=5.0)


def test_integrability_check():
    I = LPIntegrator(Region.unit(), orders=(1, 0), samples=20)
    estimate = integrability_check(poisson_correlation(1.0, 1.0), lambda eta, xi: 0.0 if xi else 1.0, I, 1, 0)
    assert estimate.value == pytest.approx(1.0, abs=1e-14)


def test_extra_points():
    """Spatial variables range over the padded region."""
    I = LPIntegrator(Region.unit(), orders=(0, 0), padding=1.0, samples=10)
    estimate = I.integrate(lambda configs, points: 1.0, points=1)
    assert estimate.value == pytest.approx(3.0)


def test_estimates():
    a = Estimate(1.0, 0.1)
    b = Estimate(1.25, 0.1)
    assert not a.agrees(b, sigmas=1.0)
    assert a.agrees(b, sigmas=2.0)
    assert a.agrees(1.05, atol=0.06, sigmas=0.0)
    assert a.scaled(-2.0) == Estimate(-2.0, 0.2)
    total = combine([(1.0, a), (2.0, Estimate.exact(3.0))])
    assert total.value == 7.0
    assert total.stderr == pytest.approx(0.1)
    assert total.method == "monte_carlo"
    assert Estimate.exact(2.0).method == "exact"
    assert np.isclose(float(total), 7.0)
