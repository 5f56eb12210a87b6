"""
K-transform, its inverse and the star-convolution on finite two-component configurations.
"""

import math
import logging
import itertools

from pytwocomp.configuration import (
    SUBSET_CAP, FiniteConfig, TwoConfig, subsets, sized_subsets, two_subsets, _check_cap
)

logger = logging.getLogger(__name__)


class _Memo(object):
    """Cache of function values keyed by canonical configuration."""

    def __init__(self, function):
        self.function = function
        self.values = {}

    def __call__(self, gamma):
        try:
            return self.values[gamma]
        except KeyError:
            value = self.function(gamma)
            self.values[gamma] = value
            return value


def _maybe_memo(function, memoize):
    return _Memo(function) if memoize else function


def _supported_subsets(G, gamma):
    """Sub-configurations of gamma that can lie in the certified support of G."""
    support = G.support
    if support.region is not None:
        gamma = gamma.restrict(support.region)
    minus_subsets = list(sized_subsets(gamma.minus, support.n_minus))
    plus_subsets = list(sized_subsets(gamma.plus, support.n_plus))
    for minus_sub, _ in minus_subsets:
        for plus_sub, _ in plus_subsets:
            yield TwoConfig(plus_sub, minus_sub)


def k_transform(G, gamma, cap=SUBSET_CAP, memoize=False):
    """
    The K-transform ``(KG)(gamma) = sum over eta+ in gamma+, eta- in gamma- of G(eta+, eta-)``.

    With a support certificate on G only the sub-configurations inside the support are
    enumerated and the cap does not apply.

    Parameters
    ----------
    G : ConfigFunction or callable
    gamma : TwoConfig
    cap : int, Optional, default = SUBSET_CAP
    memoize : bool, Optional, default = False
        Cache values of G by configuration.

    Returns
    -------
    value : float

    Raises
    ------
    CapExceeded
        If G has no support certificate and gamma has more than ``cap`` points.

    Examples
    --------
    >>> from pytwocomp.configuration import two_config
    >>> from pytwocomp.functions import unit
    >>> k_transform(unit(), two_config([0.1, 0.2], [0.5]))
    1.0
    """
    G_eval = _maybe_memo(G, memoize)
    if getattr(G, "support", None) is not None:
        terms = [G_eval(sub) for sub in _supported_subsets(G, gamma)]
    else:
        terms = [G_eval(sub) for sub, _ in two_subsets(gamma, cap)]
    return math.fsum(terms)


def _k_transform_one(g, cfg, cap):
    return math.fsum(g(sub) for sub, _ in subsets(cfg, cap))


def k_transform_split(G, gamma, cap=SUBSET_CAP):
    """
    The K-transform as the composition of the one-component transforms, minus over plus.

    Returns the same value as :func:`k_transform` up to rounding.
    """
    _check_cap(len(gamma), cap)

    def plus_transform(eta_minus):
        return _k_transform_one(lambda eta_plus: G(TwoConfig(eta_plus, eta_minus)), gamma.plus, cap)

    return _k_transform_one(plus_transform, gamma.minus, cap)


def k_inverse(F, eta, cap=SUBSET_CAP, memoize=False):
    """
    The inverse K-transform, a signed subset sum.

    ``(K^-1 F)(eta) = sum over xi in eta of (-1)^(|eta+ - xi+| + |eta- - xi-|) F(xi)``

    Parameters
    ----------
    F : callable
        Function of a :class:`TwoConfig`.
    eta : TwoConfig
    cap : int, Optional, default = SUBSET_CAP
    memoize : bool, Optional, default = False

    Returns
    -------
    value : float

    Raises
    ------
    CapExceeded
    """
    F_eval = _maybe_memo(F, memoize)
    terms = []
    for sub, rest in two_subsets(eta, cap):
        value = F_eval(sub)
        terms.append(-value if len(rest) % 2 else value)
    return math.fsum(terms)


def star_convolution(G1, G2, eta, cap=SUBSET_CAP):
    """
    The star-convolution in double-subset form.

    ``(G1 * G2)(eta) = sum over xi in eta of G1(xi) sum over zeta in xi of G2((eta - xi) + zeta)``

    Parameters
    ----------
    G1, G2 : ConfigFunction or callable
    eta : TwoConfig
    cap : int, Optional, default = SUBSET_CAP

    Returns
    -------
    value : float
    """
    terms = []
    for xi, rest in two_subsets(eta, cap):
        first = G1(xi)
        if first == 0.0:
            continue
        inner = math.fsum(G2(rest.union(zeta)) for zeta, _ in two_subsets(xi, cap))
        terms.append(first * inner)
    return math.fsum(terms)


def _three_part_splits(cfg):
    points = cfg.points
    for labels in itertools.product(range(3), repeat=len(points)):
        parts = ([], [], [])
        for label, point in zip(labels, points):
            parts[label].append(point)
        yield tuple(FiniteConfig._from_canonical(part) for part in parts)


def star_convolution_partitions(G1, G2, eta, cap=SUBSET_CAP):
    """
    The star-convolution as a sum over ordered partitions of eta into three parts.

    ``(G1 * G2)(eta) = sum over (xi1, xi2, xi3) of G1(xi1 + xi2) G2(xi2 + xi3)``, partitioned
    componentwise. Enumerates ``3^|eta|`` terms.
    """
    _check_cap(len(eta), cap)
    plus_splits = list(_three_part_splits(eta.plus))
    terms = []
    for m1, m2, m3 in _three_part_splits(eta.minus):
        for p1, p2, p3 in plus_splits:
            terms.append(G1(TwoConfig(p1.union(p2), m1.union(m2))) * G2(TwoConfig(p2.union(p3), m2.union(m3))))
    return math.fsum(terms)


def sum_kernel_inverse(h, eta, cap=SUBSET_CAP):
    """
    Inverse K-transform of ``H(gamma) = sum over x in gamma+ of h(x, gamma+ - x, gamma-)``.

    Evaluated as ``sum over x in eta+ of (K^-1 h(x, .))(eta+ - x, eta-)``, with the inverse
    taken in the configuration argument only.

    Parameters
    ----------
    h : callable
        ``h(x, gamma)`` for a point x and a :class:`TwoConfig` gamma not containing x.
    eta : TwoConfig
    cap : int, Optional, default = SUBSET_CAP

    Returns
    -------
    value : float
    """
    _check_cap(len(eta), cap)
    terms = []
    for x in eta.plus:
        terms.append(k_inverse(lambda xi, x=x: h(x, xi), eta.remove_plus(x), cap))
    return math.fsum(terms)


def polynomial_bound(bound, support, gamma):
    """
    Upper bound for ``|KG(gamma)|`` when ``|G| <= bound`` with the given support.

    ``bound * (1 + |gamma+ in region|)^N+ * (1 + |gamma- in region|)^N-``
    """
    if support.region is not None:
        gamma = gamma.restrict(support.region)
    n, m = gamma.size
    return bound * (1 + n) ** support.n_plus * (1 + m) ** support.n_minus
