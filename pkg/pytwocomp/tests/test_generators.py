"""
Tests for the generators, the hierarchical generator and its dual.
"""

import math

import pytest

import numpy as np

from pytwocomp.configuration import Region, two_config
from pytwocomp.functions import constant, counting, indicator, poisson_correlation, random_bounded
from pytwocomp.generators import (
    GrowthFit, analytic_n_bound, apply_L, apply_Lhat, apply_Lhat_star, duality_check, fit_growth_constants,
    growth_check, kernel_families, lhat_oracle, lhat_terms, lstar_norm_bound, n_bound, numeric_n_bound,
    power_exponential_bound, probe_configs
)
from pytwocomp.lpmeasure import LPIntegrator
from pytwocomp.rates import constant_rates, flip_rates, hop_rates, make_rates
from pytwocomp.util import InvalidAlpha, make_generator


@pytest.fixture
def pure_death():
    return constant_rates(m_plus=1.0, m_minus=0.5, z_plus=0.0, z_minus=0.0)


@pytest.fixture
def integrator():
    return LPIntegrator(Region.unit(), orders=(2, 2), samples=20, quadrature=True)


def test_apply_L(pure_death, integrator):
    """Constants are harmonic, particle counts decay at the death rate."""
    gamma = two_config([0.1, 0.2, 0.3], [0.4])
    assert apply_L(pure_death, constant(1.0), gamma, integrator).value == 0.0
    assert apply_L(pure_death, counting("plus"), gamma, integrator).value == pytest.approx(-3.0)
    assert apply_L(pure_death, counting("minus"), gamma, integrator).value == pytest.approx(-0.5)
    births = constant_rates(m_plus=0.0, m_minus=0.0, z_plus=2.0, z_minus=0.0)
    assert apply_L(births, counting("plus"), gamma, integrator).value == pytest.approx(2.0)


def test_apply_Lhat_pure_death(pure_death, integrator):
    """Under pure death the hierarchical generator is diagonal."""
    rng = make_generator(0, "generators")
    G = random_bounded(rng, 2, 2)
    eta = two_config([0.2, 0.7], [0.4])
    estimate = apply_Lhat(pure_death, G, eta, integrator)
    assert estimate.value == pytest.approx(-2.5 * G(eta), rel=1e-12)
    assert estimate.provenance == "closed_form"
    terms = lhat_terms(pure_death, G, eta, integrator)
    assert terms["death+"].value == pytest.approx(-2.0 * G(eta), rel=1e-12)
    assert terms["death-"].value == pytest.approx(-0.5 * G(eta), rel=1e-12)


@pytest.mark.parametrize("name", ["constant", "pp", "ising", "hop", "hopflip", "flip"])
def test_apply_Lhat_matches_oracle(name, integrator):
    """The kernel form agrees with K^-1 L K on the same space nodes."""
    rng = make_generator(1, "generators", name)
    rates = make_rates(name, {"z_plus": 0.7, "z_minus": 0.3} if name == "constant" else None)
    G = random_bounded(rng, 2, 2)
    eta = two_config([0.3], [0.6])
    explicit = apply_Lhat(rates, G, eta, integrator)
    oracle = lhat_oracle(rates, G, eta, integrator)
    assert explicit.value == pytest.approx(oracle.value, rel=1e-8, abs=1e-10)


def test_numeric_kernels(integrator):
    """Closed-form and numeric kernels give the same hierarchical generator."""
    rng = make_generator(2, "generators")
    rates = make_rates("pp")
    G = random_bounded(rng, 2, 1)
    eta = two_config([0.3, 0.5], [0.6])
    closed = apply_Lhat(rates, G, eta, integrator)
    numeric = apply_Lhat(rates, G, eta, integrator, prefer="numeric")
    assert numeric.provenance == "numeric_Kinv"
    assert closed.value == pytest.approx(numeric.value, rel=1e-10, abs=1e-12)
    family = kernel_families(rates)[0]
    assert kernel_families(None, kernels=family) == [family]


def test_apply_Lhat_star_pure_death(pure_death, integrator):
    k = poisson_correlation(2.0, 3.0)
    eta = two_config([0.1, 0.2], [0.5])
    estimate = apply_Lhat_star(pure_death, k, eta, integrator)
    assert estimate.value == pytest.approx(-2.5 * k(eta), rel=1e-12)
    assert apply_Lhat_star(hop_rates(), k, two_config(), integrator).value == 0.0


@pytest.mark.parametrize("rates", [
    constant_rates(m_plus=1.0, m_minus=0.5, z_plus=0.7, z_minus=0.3),
    flip_rates(kappa_plus=1.0, kappa_minus=2.0),
])
def test_duality_exact(rates):
    """With constant rates every integrand is constant per order pair, so both sides agree exactly."""
    I = LPIntegrator(Region.unit(), orders=(2, 2), samples=20)
    G = indicator(Region.unit(), 2, 2)
    lhs, rhs = duality_check(rates, G, poisson_correlation(1.5, 0.5), I)
    assert lhs.value == pytest.approx(rhs.value, rel=1e-10)
    assert lhs.stderr == pytest.approx(0.0, abs=1e-12)


def test_n_bound(integrator):
    """The numeric kernel norm bound reproduces the closed form for constant rates."""
    rates = constant_rates(m_plus=1.0, m_minus=0.5, z_plus=0.7, z_minus=0.3)
    eta = two_config([0.1, 0.2], [0.3])
    numeric = n_bound(rates.kernels(), 2.0, integrator, eta)
    assert numeric.value == pytest.approx(3.35, rel=1e-12)
    N = analytic_n_bound(rates, 2.0)
    assert N(eta) == pytest.approx(3.35)
    assert N.growth[0] == pytest.approx(1.35)
    assert N.growth[1:] == (1, 1.0)
    assert numeric_n_bound(rates.kernels(), 2.0, integrator)(eta) == pytest.approx(3.35, rel=1e-12)
    assert n_bound(rates.kernels(), 2.0, integrator, two_config()).value == 0.0
    assert analytic_n_bound(hop_rates(), 2.0) is None


def test_growth_constants():
    probes = probe_configs(Region.unit(), 6, 2)
    assert len(probes) == 1 + 6 * 2
    assert {len(eta) for eta in probes} == set(range(7))

    def N(eta):
        return 2.0 ** len(eta)

    assert fit_growth_constants(N, probes) == GrowthFit(1.0, 5, 1.0)
    assert growth_check(N, 1.0, 0, 2.0, probes)
    check = growth_check(N, 1.0, 0, 1.5, probes)
    assert not check
    assert check.failures == 12
    assert check.probes == 13
    assert check.worst_ratio == pytest.approx((2.0 / 1.5) ** 6)
    with pytest.raises(ValueError):
        growth_check(N, 1.0, 0, 0.5, probes)


def test_power_exponential_bound():
    for a in (0.1, 0.5, 0.9):
        for b in (0.5, 1.0, 3.0):
            for t in np.linspace(0.0, 200.0, 401):
                lhs, rhs = power_exponential_bound(t, a, b)
                assert lhs <= rhs * (1.0 + 1e-12)
    with pytest.raises(ValueError):
        power_exponential_bound(1.0, 1.0, 1.0)


def test_lstar_norm_bound():
    expected = (2.0 / 0.25) * (1.0 / 0.5) * (1.0 / (-math.e * math.log(0.5)))
    assert lstar_norm_bound(2.0, 1, 2.0, 0.25) == pytest.approx(expected)
    with pytest.raises(InvalidAlpha):
        lstar_norm_bound(1.0, 1, 2.0, 0.5)
    with pytest.raises(InvalidAlpha):
        growth_check(lambda eta: 1.0, 1.0, 1, 2.0, [two_config()], alpha=0.0)
