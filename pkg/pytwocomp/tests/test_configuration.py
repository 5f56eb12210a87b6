"""
Tests for finite configurations, regions and functions on configurations.
"""

import pytest

import numpy as np

from pytwocomp.configuration import (
    EMPTY, ConfigFunction, CorrelationFunction, FiniteConfig, Region, Support, TwoConfig, restrict, subsets,
    two_config, two_subsets
)
from pytwocomp.util import CapExceeded, DimensionMismatch, DisjointnessViolation, DuplicatePoint


def test_canonical_order():
    """Configurations are equal and hash equal independent of the point order."""
    first = two_config([0.3, 0.1], [0.5])
    second = two_config([0.1, 0.3], [0.5])
    assert first == second
    assert hash(first) == hash(second)
    assert first.plus.points == ((0.1,), (0.3,))
    assert first.size == (2, 1)
    assert len(first) == 3
    assert (0.5,) in first


def test_invalid_configurations():
    with pytest.raises(DuplicatePoint):
        two_config([0.1, 0.1], [])
    with pytest.raises(DisjointnessViolation):
        two_config([0.1], [0.1])
    with pytest.raises(DimensionMismatch):
        FiniteConfig([(0.1,), (0.1, 0.2)])
    with pytest.raises(ValueError):
        FiniteConfig([float("nan")])


def test_configuration_operations():
    gamma = two_config([0.1, 0.2], [0.7])
    assert gamma.add_plus(0.4).plus.points == ((0.1,), (0.2,), (0.4,))
    assert gamma.remove_minus((0.7,)) == two_config([0.1, 0.2], [])
    assert gamma.flip_plus((0.1,)) == two_config([0.2], [0.1, 0.7])
    assert gamma.flip_minus((0.7,)) == two_config([0.1, 0.2, 0.7], [])
    assert gamma.difference(two_config([0.2], [])) == two_config([0.1], [0.7])
    assert gamma.union(two_config([], [0.9])) == two_config([0.1, 0.2], [0.7, 0.9])
    assert gamma.restrict(Region(0.15, 1.0)) == two_config([0.2], [0.7])
    with pytest.raises(KeyError):
        gamma.remove_plus((0.5,))
    with pytest.raises(DisjointnessViolation):
        gamma.union(two_config([], [0.1]))


def test_subsets():
    """All 2^n subsets with their complements, in bitmask order."""
    cfg = FiniteConfig([0.1, 0.2, 0.3])
    pairs = list(subsets(cfg))
    assert len(pairs) == 8
    assert pairs[0] == (FiniteConfig(), cfg)
    assert pairs[1][0] == FiniteConfig([0.1])
    for subset, rest in pairs:
        assert subset.union(rest) == cfg
    assert len({subset for subset, _ in pairs}) == 8


def test_two_subsets():
    gamma = two_config([0.1, 0.2], [0.5, 0.6, 0.7])
    pairs = list(two_subsets(gamma))
    assert len(pairs) == 32
    assert all(sub.union(rest) == gamma for sub, rest in pairs)
    assert list(two_subsets(EMPTY)) == [(EMPTY, EMPTY)]


def test_subset_cap():
    cfg = FiniteConfig(np.linspace(0.0, 1.0, 21))
    with pytest.raises(CapExceeded):
        list(subsets(cfg))
    with pytest.raises(CapExceeded):
        list(two_subsets(TwoConfig(cfg, FiniteConfig())))
    assert len(list(subsets(FiniteConfig([0.1, 0.2]), cap=2))) == 4


def test_restrict():
    """Components of a correlation function."""
    k = CorrelationFunction(lambda gamma: 2.0 ** len(gamma.plus) * 3.0 ** len(gamma.minus))
    component = restrict(k, 1, 2)
    assert component([0.5], [0.1, 0.2]) == 18.0
    assert k.component(0, 0)() == 1.0
    with pytest.raises(ValueError):
        component([0.5], [0.1])
    with pytest.raises(DuplicatePoint):
        component([0.1], [0.1, 0.2])


def test_region():
    region = Region([0.0, 0.0], [2.0, 1.0])
    assert region.dim == 2
    assert region.volume == 2.0
    assert region.contains((1.5, 0.5))
    assert not region.contains((2.5, 0.5))
    assert region.padded(1.0).volume == 12.0
    nodes, cell = region.grid(4)
    assert nodes.shape == (16, 2)
    assert cell == pytest.approx(0.125)
    assert np.all(region.contains_array(nodes))
    with pytest.raises(ValueError):
        Region(1.0, 0.0)


def test_periodic_displacement():
    region = Region.unit()
    assert region.periodic_displacement((0.9,), (0.1,))[0] == pytest.approx(-0.2)
    assert region.periodic_displacement((0.3,), (0.1,))[0] == pytest.approx(0.2)
    assert region.wrap((1.25,))[0] == pytest.approx(0.25)


def test_support_short_circuit():
    """Outside the certified support the function is zero without being evaluated."""
    def eval(gamma):
        if len(gamma) > 1:
            raise AssertionError("evaluated outside the support")
        return 1.0

    G = ConfigFunction(eval, Support(1, 0, Region.unit()))
    assert G(two_config([0.5], [])) == 1.0
    assert G(two_config([0.5, 0.6], [])) == 0.0
    assert G(two_config([1.5], [])) == 0.0
    assert G(two_config([], [0.5])) == 0.0


def test_function_arithmetic():
    gamma = two_config([0.1], [0.2])
    f = ConfigFunction(lambda g: 2.0, None, "two", lambda plus, minus: np.full(plus.shape[0], 2.0))
    g = ConfigFunction(lambda g: len(g), Support(2, 2), "size")
    assert (f + g)(gamma) == 4.0
    assert (f * g)(gamma) == 4.0
    assert (f - g)(gamma) == 0.0
    assert (3 * f)(gamma) == 6.0
    assert abs(-f)(gamma) == 2.0
    assert f.weighted(0.5)(gamma) == 0.5
    assert (f * g).support == Support(2, 2)
    assert (f + g).support is None


def test_evaluate_batch():
    """The batch evaluation respects the support and falls back to scalar evaluation."""
    G = ConfigFunction(lambda gamma: float(len(gamma)), Support(1, 1, Region.unit()))
    plus = np.array([[[0.5]], [[1.5]]])
    minus = np.array([[[0.2]], [[0.3]]])
    assert list(G.evaluate_batch(plus, minus)) == [2.0, 0.0]


def test_truncated():
    G = ConfigFunction(lambda gamma: 1.0, Support(3, 3, Region(0.0, 2.0)))
    T = G.truncated(1, 1, Region.unit())
    assert T(two_config([0.5], [0.6])) == 1.0
    assert T(two_config([1.5], [])) == 0.0
    assert T(two_config([0.1, 0.2], [])) == 0.0
