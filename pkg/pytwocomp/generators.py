"""
Generators of the two-component dynamics and their hierarchical (K-transformed) forms.

``apply_L`` evaluates the Markov generator on an observable at a finite configuration.
``apply_Lhat`` evaluates ``K^-1 L K`` on a quasi-observable through the kernels, and
``apply_Lhat_star`` its dual acting on correlation functions. Spatial variables (birth
positions, hop targets) range over the integrator's padded region; integrals nested in
configuration sums use the integrator's fixed space nodes.
"""

import math
import logging
from collections import defaultdict
from typing import NamedTuple, Optional

import numpy as np

from pytwocomp.configuration import SUBSET_CAP, FiniteConfig, TwoConfig, two_subsets
from pytwocomp.ktransform import k_transform
from pytwocomp.lpmeasure import Estimate, combine
from pytwocomp.rates import KernelFamily, as_rate_list
from pytwocomp.util import ConfigurationError, InvalidAlpha, make_generator

logger = logging.getLogger(__name__)


def kernel_families(rates, kernels=None, prefer="closed_form", cap=SUBSET_CAP):
    """
    Kernel families for a rate set (or a list of rate sets).

    Parameters
    ----------
    rates : RateSet or list of RateSet or None
    kernels : KernelFamily or list of KernelFamily or None, Optional
        Used as given if present.
    prefer : str, Optional, default = "closed_form"
        ``"numeric"`` forces inverse K-transforms.

    Returns
    -------
    families : list of KernelFamily
    """
    if kernels is not None:
        return [kernels] if isinstance(kernels, KernelFamily) else list(kernels)
    return [r.kernels(prefer, cap) for r in as_rate_list(rates)]


def _provenance(families):
    return "+".join(sorted({f.provenance for f in families}))


def _fits(G, n, m):
    support = getattr(G, "support", None)
    return support is None or (n <= support.n_plus and m <= support.n_minus)


def _node_values(nodes, avoid, fn):
    values = np.zeros(len(nodes))
    for j, node in enumerate(nodes):
        u = tuple(node)
        if u in avoid:
            continue
        values[j] = fn(u)
    return values


# Markov generator ----------------------------------------------------------------------------------------------------


def _l_parts(rates, F, gamma, nodes):
    """Point part and spatial integrand values (at the nodes) of ``(LF)(gamma)``."""
    avoid = set(gamma.points())
    f0 = F(gamma)
    point = []
    spatial = np.zeros(len(nodes))
    for r in as_rate_list(rates):
        if r.kind == "birth_death":
            for x in gamma.plus:
                rest = gamma.remove_plus(x)
                point.append(r.call("D+", x, None, rest) * (F(rest) - f0))
            for y in gamma.minus:
                rest = gamma.remove_minus(y)
                point.append(r.call("D-", y, None, rest) * (F(rest) - f0))
            if r.rate("B+") is not None:
                spatial += _node_values(nodes, avoid,
                                        lambda u: r.call("B+", u, None, gamma) * (F(gamma.add_plus(u)) - f0))
            if r.rate("B-") is not None:
                spatial += _node_values(nodes, avoid,
                                        lambda u: r.call("B-", u, None, gamma) * (F(gamma.add_minus(u)) - f0))
        elif r.kind == "hop_keep":
            for x in gamma.plus:
                rest = gamma.remove_plus(x)
                spatial += _node_values(nodes, avoid, lambda u: r.call("C1+", x, u, rest) * (F(rest.add_plus(u)) - f0))
            for y in gamma.minus:
                rest = gamma.remove_minus(y)
                spatial += _node_values(nodes, avoid,
                                        lambda u: r.call("C1-", y, u, rest) * (F(rest.add_minus(u)) - f0))
        elif r.kind == "hop_flip":
            for x in gamma.plus:
                rest = gamma.remove_plus(x)
                spatial += _node_values(nodes, avoid,
                                        lambda u: r.call("C2+", x, u, rest) * (F(rest.add_minus(u)) - f0))
            for y in gamma.minus:
                rest = gamma.remove_minus(y)
                spatial += _node_values(nodes, avoid, lambda u: r.call("C2-", u, y, rest) * (F(rest.add_plus(u)) - f0))
        elif r.kind == "flip":
            for x in gamma.plus:
                point.append(r.call("A+", x, None, gamma.remove_plus(x)) * (F(gamma.flip_plus(x)) - f0))
            for y in gamma.minus:
                point.append(r.call("A-", y, None, gamma.remove_minus(y)) * (F(gamma.flip_minus(y)) - f0))
    return math.fsum(point), spatial


def apply_L(rates, F, gamma, I):
    """
    The Markov generator ``(LF)(gamma)`` at a finite configuration.

    Death, flip and hop-out sums are exact; birth and hop-in integrals use the integrator's
    space nodes (Gauss-Legendre in one dimension with ``quadrature=True``).

    Parameters
    ----------
    rates : RateSet or list of RateSet
    F : callable
        Function of a :class:`TwoConfig`.
    gamma : TwoConfig
    I : LPIntegrator

    Returns
    -------
    estimate : Estimate
    """
    nodes = I.space_nodes()[0]
    point, spatial = _l_parts(rates, F, gamma, nodes)
    return combine([(1.0, Estimate.exact(point, I.orders)), (1.0, I.space_estimate(spatial))], I.orders)


# Hierarchical generator ----------------------------------------------------------------------------------------------


def _lhat_family(family, G, eta, nodes, cap, point, spatial):
    avoid = set(eta.points())
    get = family.get
    for xi, rest in two_subsets(eta, cap):
        g = G(xi)
        n, m = xi.size
        if family.kind == "birth_death":
            D_plus, D_minus, B_plus, B_minus = get("D+"), get("D-"), get("B+"), get("B-")
            if g:
                if D_plus is not None:
                    for x in xi.plus:
                        point["death+"].append(-g * D_plus(x, None, xi.remove_plus(x), rest))
                if D_minus is not None:
                    for y in xi.minus:
                        point["death-"].append(-g * D_minus(y, None, xi.remove_minus(y), rest))
            if B_plus is not None and _fits(G, n + 1, m):
                spatial["birth+"] += _node_values(
                    nodes, avoid, lambda u: _times(G(xi.add_plus(u)), lambda: B_plus(u, None, xi, rest)))
            if B_minus is not None and _fits(G, n, m + 1):
                spatial["birth-"] += _node_values(
                    nodes, avoid, lambda u: _times(G(xi.add_minus(u)), lambda: B_minus(u, None, xi, rest)))
        elif family.kind == "hop_keep":
            for role, own, term in (("C1+", "plus", "hop+"), ("C1-", "minus", "hop-")):
                kernel = get(role)
                if kernel is None:
                    continue
                for x in getattr(xi, own):
                    base = xi.remove_plus(x) if own == "plus" else xi.remove_minus(x)
                    add = base.add_plus if own == "plus" else base.add_minus
                    spatial[term] += _node_values(
                        nodes, avoid,
                        lambda u: _times(G(add(u)) - g, lambda: kernel(x, u, base, rest)))
        elif family.kind == "hop_flip":
            C2_plus, C2_minus = get("C2+"), get("C2-")
            if C2_plus is not None:
                for x in xi.plus:
                    base = xi.remove_plus(x)
                    spatial["hopflip+"] += _node_values(
                        nodes, avoid, lambda u: _times(G(base.add_minus(u)) - g, lambda: C2_plus(x, u, base, rest)))
            if C2_minus is not None:
                for y in xi.minus:
                    base = xi.remove_minus(y)
                    spatial["hopflip-"] += _node_values(
                        nodes, avoid, lambda u: _times(G(base.add_plus(u)) - g, lambda: C2_minus(u, y, base, rest)))
        elif family.kind == "flip":
            A_plus, A_minus = get("A+"), get("A-")
            if A_plus is not None:
                for x in xi.plus:
                    point["flip+"].append(_times(G(xi.flip_plus(x)) - g,
                                                 lambda: A_plus(x, None, xi.remove_plus(x), rest)))
            if A_minus is not None:
                for y in xi.minus:
                    point["flip-"].append(_times(G(xi.flip_minus(y)) - g,
                                                 lambda: A_minus(y, None, xi.remove_minus(y), rest)))


def _times(value, factor):
    return value * factor() if value else 0.0


def lhat_terms(rates, G, eta, I, kernels=None, prefer="closed_form", cap=SUBSET_CAP):
    """
    The terms of ``(L^ G)(eta)`` by kind (``death+``, ``birth-``, ``hop+``, ``flip-``, ...).

    Returns
    -------
    terms : dict
        Term name to :class:`Estimate`. Spatial terms share the space nodes, so their errors
        are not independent; use :func:`apply_Lhat` for the total.
    """
    families = kernel_families(rates, kernels, prefer, cap)
    nodes = I.space_nodes()[0]
    point = defaultdict(list)
    spatial = defaultdict(lambda: np.zeros(len(nodes)))
    for family in families:
        _lhat_family(family, G, eta, nodes, cap, point, spatial)
    terms = {name: Estimate.exact(math.fsum(values), I.orders) for name, values in point.items()}
    terms.update({name: I.space_estimate(values) for name, values in spatial.items()})
    return terms


def apply_Lhat(rates, G, eta, I, kernels=None, prefer="closed_form", cap=SUBSET_CAP):
    """
    The hierarchical generator ``(L^ G)(eta) = (K^-1 L K G)(eta)`` in explicit kernel form.

    The outer sums over sub-configurations of eta are exact, spatial integrals use the
    integrator's space nodes.

    Parameters
    ----------
    rates : RateSet or list of RateSet
    G : ConfigFunction
    eta : TwoConfig
    I : LPIntegrator
    kernels : KernelFamily or list or None, Optional
        Kernels to use instead of those derived from the rates.
    prefer : str, Optional, default = "closed_form"
    cap : int, Optional, default = SUBSET_CAP

    Returns
    -------
    estimate : Estimate
        With the kernel provenance recorded.

    Raises
    ------
    CapExceeded
    """
    families = kernel_families(rates, kernels, prefer, cap)
    nodes = I.space_nodes()[0]
    point = defaultdict(list)
    spatial = defaultdict(lambda: np.zeros(len(nodes)))
    for family in families:
        _lhat_family(family, G, eta, nodes, cap, point, spatial)
    point_value = math.fsum(math.fsum(values) for values in point.values())
    spatial_values = sum(spatial.values(), np.zeros(len(nodes)))
    return combine([(1.0, Estimate.exact(point_value, I.orders)), (1.0, I.space_estimate(spatial_values))],
                   I.orders, _provenance(families))


def lhat_oracle(rates, G, eta, I, cap=SUBSET_CAP):
    """
    ``(K^-1 L K G)(eta)`` by brute force: the K-transform of G, the Markov generator at every
    sub-configuration, and the signed subset sum, on the same space nodes as :func:`apply_Lhat`.
    """
    nodes = I.space_nodes()[0]
    cache = {}

    def KG(gamma):
        if gamma not in cache:
            cache[gamma] = k_transform(G, gamma, cap)
        return cache[gamma]

    point = []
    spatial = np.zeros(len(nodes))
    for xi, rest in two_subsets(eta, cap):
        sign = -1.0 if len(rest) % 2 else 1.0
        value, vector = _l_parts(rates, KG, xi, nodes)
        point.append(sign * value)
        spatial += sign * vector
    return combine([(1.0, Estimate.exact(math.fsum(point), I.orders)), (1.0, I.space_estimate(spatial))],
                   I.orders, "oracle")


# Dual hierarchical generator -----------------------------------------------------------------------------------------


def _star_point(family, k, eta, zeta):
    """Terms of the dual generator without a spatial variable, at one sampled zeta."""
    get = family.get
    terms = []
    if family.kind == "birth_death":
        full = None
        for role, own, sign in (("D+", "plus", -1.0), ("D-", "minus", -1.0)):
            kernel = get(role)
            if kernel is None:
                continue
            for x in getattr(eta, own):
                if full is None:
                    full = k(eta.union(zeta))
                shift = eta.remove_plus(x) if own == "plus" else eta.remove_minus(x)
                terms.append(_times(full, lambda: sign * kernel(x, None, shift, zeta)))
        for role, own in (("B+", "plus"), ("B-", "minus")):
            kernel = get(role)
            if kernel is None:
                continue
            for x in getattr(eta, own):
                shift = eta.remove_plus(x) if own == "plus" else eta.remove_minus(x)
                terms.append(_times(k(shift.union(zeta)), lambda: kernel(x, None, shift, zeta)))
    elif family.kind == "flip":
        A_plus, A_minus = get("A+"), get("A-")
        full = k(eta.union(zeta)) if (A_plus is not None or A_minus is not None) and eta else 0.0
        for x in eta.plus:
            shift = eta.remove_plus(x)
            if A_plus is not None:
                terms.append(_times(full, lambda: -A_plus(x, None, shift, zeta)))
            if A_minus is not None:
                terms.append(_times(k(eta.flip_plus(x).union(zeta)), lambda: A_minus(x, None, shift, zeta)))
        for y in eta.minus:
            shift = eta.remove_minus(y)
            if A_minus is not None:
                terms.append(_times(full, lambda: -A_minus(y, None, shift, zeta)))
            if A_plus is not None:
                terms.append(_times(k(eta.flip_minus(y).union(zeta)), lambda: A_plus(y, None, shift, zeta)))
    return math.fsum(terms)


def _star_spatial(family, k, eta, zeta, u):
    """Terms of the dual generator with the spatial variable u, at one sampled zeta."""
    get = family.get
    terms = []
    if family.kind == "hop_keep":
        full = None
        for role, own in (("C1+", "plus"), ("C1-", "minus")):
            kernel = get(role)
            if kernel is None:
                continue
            for x in getattr(eta, own):
                if full is None:
                    full = k(eta.union(zeta))
                if own == "plus":
                    shift = eta.remove_plus(x)
                    moved = shift.add_plus(u)
                else:
                    shift = eta.remove_minus(x)
                    moved = shift.add_minus(u)
                terms.append(_times(k(moved.union(zeta)), lambda: kernel(u, x, shift, zeta)))
                terms.append(_times(full, lambda: -kernel(x, u, shift, zeta)))
    elif family.kind == "hop_flip":
        C2_plus, C2_minus = get("C2+"), get("C2-")
        full = k(eta.union(zeta)) if eta else 0.0
        for x in eta.plus:
            shift = eta.remove_plus(x)
            if C2_plus is not None:
                terms.append(_times(full, lambda: -C2_plus(x, u, shift, zeta)))
            if C2_minus is not None:
                terms.append(_times(k(shift.add_minus(u).union(zeta)), lambda: C2_minus(x, u, shift, zeta)))
        for y in eta.minus:
            shift = eta.remove_minus(y)
            if C2_minus is not None:
                terms.append(_times(full, lambda: -C2_minus(u, y, shift, zeta)))
            if C2_plus is not None:
                terms.append(_times(k(shift.add_plus(u).union(zeta)), lambda: C2_plus(u, y, shift, zeta)))
    return math.fsum(terms)


def _has_spatial(families):
    return any(f.kind in ("hop_keep", "hop_flip") for f in families)


def _has_point(families):
    return any(f.kind in ("birth_death", "flip") for f in families)


def lhat_star_integrand(families, k, eta, zeta, u=None):
    """
    Integrand of ``(L^* k)(eta)`` at a sampled configuration zeta (and spatial point u for the
    hopping families). Integrating over zeta with the Lebesgue-Poisson measure (and over u)
    gives :func:`apply_Lhat_star`.
    """
    if u is None:
        return math.fsum(_star_point(f, k, eta, zeta) for f in families)
    return math.fsum(_star_spatial(f, k, eta, zeta, u) for f in families)


def apply_Lhat_star(rates, k, eta, I, kernels=None, prefer="closed_form", cap=SUBSET_CAP):
    """
    The dual hierarchical generator ``(L^* k)(eta)`` in explicit kernel form.

    Sums over the points of eta are exact; the integral over the configuration argument of the
    kernels uses the Lebesgue-Poisson measure (intensity one) on the padded region truncated at
    the integrator's orders, hop targets range over the padded region.

    Parameters
    ----------
    rates : RateSet or list of RateSet
    k : CorrelationFunction
    eta : TwoConfig
    I : LPIntegrator

    Returns
    -------
    estimate : Estimate
    """
    families = kernel_families(rates, kernels, prefer, cap)
    J = I.replace(region=I.point_region, padding=0.0, z=1.0)
    estimates = []
    if _has_point(families):
        estimates.append(J.integrate(lambda configs, points: lhat_star_integrand(families, k, eta, configs[0]),
                                     key="lstar_point"))
    if _has_spatial(families) and eta:
        estimates.append(J.integrate(
            lambda configs, points: lhat_star_integrand(families, k, eta, configs[0], points[0]),
            points=1, key="lstar_spatial"))
    if not estimates:
        return Estimate.exact(0.0, I.orders, _provenance(families))
    return combine([(1.0, e) for e in estimates], I.orders, _provenance(families))


def duality_check(rates, G, k, I, kernels=None, prefer="closed_form", cap=SUBSET_CAP):
    """
    Both sides of ``<<L^ G, k>> = <<G, L^* k>>``.

    k is truncated to the integrator's orders and region, so both sides are finite sums over
    the same configurations.

    Parameters
    ----------
    rates : RateSet or list of RateSet
    G : ConfigFunction
        Should carry a support certificate within the truncation.
    k : CorrelationFunction
    I : LPIntegrator

    Returns
    -------
    lhs, rhs : Estimate
    """
    families = kernel_families(rates, kernels, prefer, cap)
    J = I.replace(z=1.0)
    k_truncated = k.truncated(I.orders[0], I.orders[1], I.region)
    provenance = _provenance(families)

    def lhs_point(configs, points):
        eta = configs[0]
        weight = k_truncated(eta)
        if not weight:
            return 0.0
        values = defaultdict(list)
        _lhat_family_point_only(families, G, eta, cap, values)
        return weight * math.fsum(math.fsum(v) for v in values.values())

    def lhs_spatial(configs, points):
        eta = configs[0]
        weight = k_truncated(eta)
        if not weight:
            return 0.0
        u = points[0]
        if u in eta:
            raise ConfigurationError("Spatial variable coincides with a configuration point.")
        node = np.array([u])
        spatial = defaultdict(lambda: np.zeros(1))
        point = defaultdict(list)
        for family in families:
            _lhat_family(family, G, eta, node, cap, point, spatial)
        return weight * float(sum(v[0] for v in spatial.values()))

    def rhs_point(configs, points):
        eta, zeta = configs
        g = G(eta)
        return _times(g, lambda: lhat_star_integrand(families, k_truncated, eta, zeta))

    def rhs_spatial(configs, points):
        eta, zeta = configs
        g = G(eta)
        return _times(g, lambda: lhat_star_integrand(families, k_truncated, eta, zeta, points[0]))

    lhs, rhs = [], []
    if _has_point(families):
        lhs.append(J.integrate(lhs_point, key="duality_lhs_point"))
        rhs.append(J.integrate(rhs_point, blocks=2, key="duality_rhs_point"))
    if _has_spatial(families) or any(f.get("B+") or f.get("B-") for f in families):
        lhs.append(J.integrate(lhs_spatial, points=1, key="duality_lhs_spatial"))
    if _has_spatial(families):
        rhs.append(J.integrate(rhs_spatial, blocks=2, points=1, key="duality_rhs_spatial"))
    lhs_estimate = combine([(1.0, e) for e in lhs], I.orders, provenance)
    rhs_estimate = combine([(1.0, e) for e in rhs], I.orders, provenance)
    logger.debug(f"duality {provenance}: {lhs_estimate.value!r} vs {rhs_estimate.value!r}")
    return lhs_estimate, rhs_estimate


def _lhat_family_point_only(families, G, eta, cap, values):
    empty = np.zeros((0, eta.dim or 1))
    spatial = defaultdict(lambda: np.zeros(0))
    for family in families:
        if family.kind in ("birth_death", "flip"):
            _lhat_family(family, G, eta, empty, cap, values, spatial)


# Bounds --------------------------------------------------------------------------------------------------------------


class NBound(object):
    """
    A bound function ``N(eta)`` for the kernel norms, optionally with growth constants
    ``(A, M, nu)`` such that ``N(eta) <= A (1 + |eta|)^M nu^|eta|``.
    """

    def __init__(self, eval, growth=None, label=""):
        self.eval = eval
        self.growth = growth
        self.label = label

    def __call__(self, eta):
        return float(self.eval(eta))

    def __repr__(self):
        return f"NBound({self.label}, growth={self.growth})"


def _kernel_norm_integrand(family, eta, zeta, u, C):
    """Sum of the absolute kernel sections entering the bound, at zeta (and u)."""
    get = family.get
    terms = []
    if u is None:
        if family.kind == "birth_death":
            for role, own, factor in (("D+", "plus", 1.0), ("D-", "minus", 1.0),
                                      ("B+", "plus", 1.0 / C), ("B-", "minus", 1.0 / C)):
                kernel = get(role)
                if kernel is None:
                    continue
                for x in getattr(eta, own):
                    shift = eta.remove_plus(x) if own == "plus" else eta.remove_minus(x)
                    terms.append(factor * abs(kernel(x, None, shift, zeta)))
        elif family.kind == "flip":
            for x in eta.plus:
                shift = eta.remove_plus(x)
                terms += [abs(get(role)(x, None, shift, zeta)) for role in ("A+", "A-") if get(role) is not None]
            for y in eta.minus:
                shift = eta.remove_minus(y)
                terms += [abs(get(role)(y, None, shift, zeta)) for role in ("A+", "A-") if get(role) is not None]
    else:
        if family.kind == "hop_keep":
            for role, own in (("C1+", "plus"), ("C1-", "minus")):
                kernel = get(role)
                if kernel is None:
                    continue
                for x in getattr(eta, own):
                    shift = eta.remove_plus(x) if own == "plus" else eta.remove_minus(x)
                    terms.append(abs(kernel(x, u, shift, zeta)) + abs(kernel(u, x, shift, zeta)))
        elif family.kind == "hop_flip":
            C2_plus, C2_minus = get("C2+"), get("C2-")
            for x in eta.plus:
                shift = eta.remove_plus(x)
                terms += [abs(C2_plus(x, u, shift, zeta))] if C2_plus is not None else []
                terms += [abs(C2_minus(x, u, shift, zeta))] if C2_minus is not None else []
            for y in eta.minus:
                shift = eta.remove_minus(y)
                terms += [abs(C2_minus(u, y, shift, zeta))] if C2_minus is not None else []
                terms += [abs(C2_plus(u, y, shift, zeta))] if C2_plus is not None else []
    return math.fsum(terms) * C ** len(zeta)


def n_bound(kernels, C, I, eta):
    """
    The bound ``N(eta)``: sums over the points of eta of the L_C norms of the kernel sections
    (birth kernels weighted by ``1/C``; for hopping the norms of the kernels integrated over
    the target), computed by Lebesgue-Poisson integration over the padded region.

    Parameters
    ----------
    kernels : KernelFamily or list of KernelFamily
    C : float
    I : LPIntegrator
    eta : TwoConfig

    Returns
    -------
    estimate : Estimate
    """
    families = [kernels] if isinstance(kernels, KernelFamily) else list(kernels)
    J = I.replace(region=I.point_region, padding=0.0, z=1.0)
    estimates = []
    if _has_point(families):
        estimates.append(J.integrate(
            lambda configs, points: math.fsum(_kernel_norm_integrand(f, eta, configs[0], None, C) for f in families),
            key="n_bound_point"))
    if _has_spatial(families):
        estimates.append(J.integrate(
            lambda configs, points: math.fsum(_kernel_norm_integrand(f, eta, configs[0], points[0], C)
                                              for f in families),
            points=1, key="n_bound_spatial"))
    if not estimates or not eta:
        return Estimate.exact(0.0, I.orders, _provenance(families))
    return combine([(1.0, e) for e in estimates], I.orders, _provenance(families))


def numeric_n_bound(kernels, C, I):
    """:func:`n_bound` as an :class:`NBound`."""
    return NBound(lambda eta: n_bound(kernels, C, I, eta).value, label="numeric")


def analytic_n_bound(rates, C):
    """
    The closed-form bound of the rate suites that provide one (constant, predator-prey, Ising),
    summed over a list of rate sets.

    Returns
    -------
    bound : NBound or None
        None if a rate set has no analytic bound.
    """
    rate_list = as_rate_list(rates)
    if any(r.n_function is None for r in rate_list):
        return None
    growth = None
    if len(rate_list) == 1 and rate_list[0].label == "constant":
        p = rate_list[0].params
        growth = (max(p["m_plus"] + p["z_plus"] / C, p["m_minus"] + p["z_minus"] / C, 1e-300), 1, 1.0)
    return NBound(lambda eta: math.fsum(r.n_function(eta, C) for r in rate_list), growth,
                  "+".join(r.label for r in rate_list))


def power_exponential_bound(t, a, b):
    """
    Both sides of ``(1 + t)^b a^t <= (1/a) (b / (-e ln a))^b`` for ``t >= 0``, ``0 < a < 1``, ``b > 0``.

    Returns
    -------
    lhs, rhs : float
    """
    if not 0 < a < 1:
        raise ValueError(f"The base must lie in (0, 1), got {a}")
    return (1.0 + t) ** b * a ** t, (1.0 / a) * (b / (-math.e * math.log(a))) ** b


def lstar_norm_bound(A, M, nu, alpha, k_norm=1.0):
    """
    Bound of the K_C norm of the dual generator applied to k in the space with constant
    ``alpha C``: ``(A |k| / alpha) (1 / (alpha nu)) (M / (-e ln(alpha nu)))^M``.

    Raises
    ------
    InvalidAlpha
        If alpha is not in ``(0, 1/nu)``.
    """
    if not 0 < alpha < 1.0 / nu:
        raise InvalidAlpha(f"alpha must lie in (0, 1/nu) = (0, {1.0 / nu!r}), got {alpha}")
    return (A * k_norm / alpha) * (1.0 / (alpha * nu)) * (M / (-math.e * math.log(alpha * nu))) ** M


class GrowthCheck(NamedTuple):
    """Outcome of :func:`growth_check`."""
    passed: bool
    worst_ratio: float
    failures: int
    probes: int
    lstar_bound: Optional[float] = None

    def __bool__(self):
        return bool(self.passed)


def growth_check(N, A, M, nu, probes, alpha=None, k_norm=1.0):
    """
    Check ``N(eta) <= A (1 + |eta+| + |eta-|)^M nu^(|eta+| + |eta-|)`` at all probes.

    Parameters
    ----------
    N : NBound or callable
    A, M, nu : float
    probes : iterable of TwoConfig
    alpha : float or None, Optional
        If given, also evaluate :func:`lstar_norm_bound`.
    k_norm : float, Optional, default = 1.0

    Returns
    -------
    check : GrowthCheck
        Truthy iff the inequality holds at every probe.

    Raises
    ------
    InvalidAlpha
    """
    if nu < 1:
        raise ValueError(f"nu must be at least 1, got {nu}")
    bound = lstar_norm_bound(A, M, nu, alpha, k_norm) if alpha is not None else None
    worst = 0.0
    failures = 0
    count = 0
    for eta in probes:
        size = len(eta)
        allowed = A * (1 + size) ** M * nu ** size
        value = N(eta)
        ratio = value / allowed if allowed > 0 else (math.inf if value > 0 else 0.0)
        worst = max(worst, ratio)
        failures += value > allowed
        count += 1
    return GrowthCheck(failures == 0, worst, failures, count, bound)


class GrowthFit(NamedTuple):
    A: float
    M: int
    nu: float


def fit_growth_constants(N, probes, max_power=6, nus=(1.0, 1.5, 2.0, 3.0, 5.0, 10.0)):
    """
    Growth constants fitted to a probe set: the smallest nu, then the smallest power M, for
    which the largest ratio ``N(eta) / ((1 + |eta|)^M nu^|eta|)`` does not grow from the
    second-largest probe size to the largest; A is the largest ratio over all probes.

    This is a fit to the probes, not a proof of the bound.

    Returns
    -------
    fit : GrowthFit or None
        None if no pair (M, nu) on the grid levels off.
    """
    values = [(len(eta), N(eta)) for eta in probes]
    if not values:
        return None
    sizes = sorted({size for size, _ in values})
    for nu in sorted(nus):
        for M in range(1, max_power + 1):
            by_size = defaultdict(float)
            for size, value in values:
                by_size[size] = max(by_size[size], value / ((1 + size) ** M * nu ** size))
            A = max(by_size.values())
            if len(sizes) < 2 or by_size[sizes[-1]] <= by_size[sizes[-2]] * (1 + 1e-12):
                return GrowthFit(A, M, nu)
    return None


def probe_configs(region, max_points, count, seed=0):
    """
    Random probe configurations: ``count`` configurations for every total size up to
    ``max_points``, split uniformly at random between the components.
    """
    rng = make_generator(seed, "growth_probes")
    probes = []
    for size in range(max_points + 1):
        for _ in range(count if size else 1):
            n = int(rng.integers(0, size + 1))
            points = region.sample(rng, size)
            probes.append(TwoConfig(FiniteConfig(points[:n]), FiniteConfig(points[n:])))
    return probes
