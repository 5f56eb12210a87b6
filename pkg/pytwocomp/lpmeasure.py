"""
Lebesgue-Poisson integration over finite two-component configurations.

The measure ``lambda_z`` gives weight ``z^n / n!`` times Lebesgue measure to n-point
configurations, and the two-component measure is the product over plus and minus points.
Integrals are truncated at per-component orders ``(N+, N-)`` over a box region; each order
pair is integrated by uniform Monte Carlo sampling (or tensor Gauss-Legendre quadrature in
one dimension for at most two variables) and weighted analytically.
"""

import math
import logging
import itertools
from typing import NamedTuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import factorial

from pytwocomp.configuration import EMPTY, FiniteConfig, Region, TwoConfig, two_subsets
from pytwocomp.util import ConfigurationError, make_generator

logger = logging.getLogger(__name__)

GAUSS_LEGENDRE_NODES = (64, 62)
"""
Rule sizes for the first and second quadrature variable. The first variable uses 64 nodes; the
second uses 62, so the tensor grid has no diagonal nodes ``x == y`` (equal points are not a
configuration). Both rules are exact for polynomials up to degree 123.
"""

MAX_REDRAWS = 100


class Estimate(NamedTuple):
    """Value of an integral with its standard error and the truncation orders used."""
    value: float
    stderr: float
    orders: tuple = (0, 0)
    method: str = "monte_carlo"
    provenance: str = ""

    def __float__(self):
        return float(self.value)

    @classmethod
    def exact(cls, value, orders=(0, 0), provenance=""):
        return cls(float(value), 0.0, tuple(orders), "exact", provenance)

    def agrees(self, other, sigmas=3.0, atol=0.0, rtol=0.0):
        """True if the two estimates agree within ``sigmas`` combined standard errors plus tolerances."""
        other_value = float(other)
        other_stderr = getattr(other, "stderr", 0.0)
        slack = sigmas * math.hypot(self.stderr, other_stderr) + atol + rtol * max(abs(self.value), abs(other_value))
        return abs(self.value - other_value) <= slack

    def scaled(self, factor):
        return self._replace(value=factor * self.value, stderr=abs(factor) * self.stderr)


def combine(terms, orders=None, provenance=""):
    """
    Linear combination of independent estimates.

    Parameters
    ----------
    terms : iterable of (float, Estimate)

    Returns
    -------
    estimate : Estimate
    """
    terms = list(terms)
    value = math.fsum(c * e.value for c, e in terms)
    stderr = math.sqrt(math.fsum((c * e.stderr) ** 2 for c, e in terms))
    methods = {e.method for _, e in terms}
    if "monte_carlo" in methods:
        method = "monte_carlo"
    elif "quadrature" in methods:
        method = "quadrature"
    else:
        method = "exact"
    if orders is None:
        orders = terms[0][1].orders if terms else (0, 0)
    return Estimate(value, stderr, tuple(orders), method, provenance)


def _gauss_legendre(count, lower, upper):
    nodes, weights = np.polynomial.legendre.leggauss(count)
    return lower + (nodes + 1.0) * (upper - lower) / 2.0, weights / 2.0


def _collision_rows(arrays):
    """Rows of the sampled point arrays that contain two equal points."""
    arrays = [a for a in arrays if a.shape[1]]
    if not arrays:
        return np.zeros(0, dtype=bool)
    joined = np.concatenate(arrays, axis=1)
    count = joined.shape[1]
    if count < 2:
        return np.zeros(joined.shape[0], dtype=bool)
    equal = np.all(joined[:, :, None, :] == joined[:, None, :, :], axis=-1)
    equal[:, np.arange(count), np.arange(count)] = False
    return equal.any(axis=(1, 2))


class LPIntegrator(object):
    """
    Lebesgue-Poisson quadrature and Monte Carlo engine.

    Parameters
    ----------
    region : Region
        The box the configurations are integrated over.
    z : float, Optional, default = 1.0
        Intensity of the Lebesgue-Poisson measure.
    orders : (int, int), Optional, default = (2, 2)
        Truncation orders (N+, N-).
    samples : int, Optional, default = 10000
        Monte Carlo samples per order pair.
    seed : int, Optional, default = 0
        Seed of the counter-based random streams.
    chunk_size : int or None, Optional
        Samples per random stream. Results depend on the chunk size but not on ``threads``.
    quadrature : bool, Optional, default = False
        Use tensor Gauss-Legendre quadrature for up to two variables in one dimension.
    padding : float, Optional, default = 0.0
        Spatial (birth and hop) variables range over the region enlarged by this radius.
    space_samples : int, Optional, default = 256
        Number of Monte Carlo nodes for spatial integrals nested inside configuration sums.
    threads : int, Optional, default = 1
        Worker threads for sampling chunks.
    """

    def __init__(self, region, z=1.0, orders=(2, 2), samples=10000, seed=0, chunk_size=None,
                 quadrature=False, padding=0.0, space_samples=256, threads=1):
        if not isinstance(region, Region):
            region = Region(*region)
        orders = tuple(int(n) for n in orders)
        if len(orders) != 2 or min(orders) < 0:
            raise ValueError(f"Truncation orders must be two nonnegative integers, got {orders}")
        if int(samples) < 1 or int(space_samples) < 1:
            raise ValueError("The number of samples must be positive.")
        if not z > 0:
            raise ValueError(f"The intensity must be positive, got {z}")
        if padding < 0:
            raise ValueError(f"The padding must be nonnegative, got {padding}")
        self.region = region
        self.z = float(z)
        self.orders = orders
        self.samples = int(samples)
        self.seed = int(seed)
        self.chunk_size = int(chunk_size) if chunk_size else None
        self.quadrature = bool(quadrature)
        self.padding = float(padding)
        self.space_samples = int(space_samples)
        self.threads = max(1, int(threads))
        self._space_nodes = None

    def __repr__(self):
        return (f"LPIntegrator(region={self.region!r}, z={self.z!r}, orders={self.orders}, "
                f"samples={self.samples}, seed={self.seed})")

    def settings(self):
        """The parameters as a plain dictionary."""
        return {
            "region": [list(self.region.lower), list(self.region.upper)],
            "z": self.z,
            "orders": list(self.orders),
            "samples": self.samples,
            "seed": self.seed,
            "chunk_size": self.chunk_size,
            "quadrature": self.quadrature,
            "padding": self.padding,
            "space_samples": self.space_samples,
            "threads": self.threads,
        }

    def replace(self, **changes):
        """A copy with some parameters changed."""
        settings = self.settings()
        settings["region"] = self.region
        settings.update(changes)
        return LPIntegrator(**settings)

    @property
    def dim(self):
        return self.region.dim

    @property
    def point_region(self):
        """Domain of spatial (birth and hop) variables."""
        return self.region.padded(self.padding)

    def _use_quadrature(self, variables):
        return self.quadrature and self.dim == 1 and variables <= len(GAUSS_LEGENDRE_NODES)

    def _order_combinations(self, blocks, joint):
        n_max, m_max = self.orders
        per_block = [(n, m) for m in range(m_max + 1) for n in range(n_max + 1)]
        for combo in itertools.product(per_block, repeat=blocks):
            if joint and (sum(n for n, _ in combo) > n_max or sum(m for _, m in combo) > m_max):
                continue
            yield combo

    @staticmethod
    def _unpack(arrays, row, blocks):
        configs = []
        for b in range(blocks):
            configs.append(TwoConfig(FiniteConfig(arrays[2 * b][row]), FiniteConfig(arrays[2 * b + 1][row])))
        points = [tuple(p) for p in arrays[-1][row]]
        return configs, points

    def _chunk_values(self, integrand, batch, groups, blocks, stream_key):
        size = stream_key[-1]
        rng = make_generator(self.seed, *stream_key[:-1])
        arrays = [region.sample(rng, (size, count)) for region, count in groups]
        if batch is not None:
            for _ in range(MAX_REDRAWS):
                bad = _collision_rows(arrays)
                if not bad.any():
                    break
                for array, (region, count) in zip(arrays, groups):
                    array[bad] = region.sample(rng, (int(bad.sum()), count))
            return np.asarray(batch(arrays), dtype=float)
        values = np.empty(size)
        for row in range(size):
            for attempt in range(MAX_REDRAWS):
                try:
                    values[row] = integrand(*self._unpack(arrays, row, blocks))
                    break
                except ConfigurationError:
                    if attempt == MAX_REDRAWS - 1:
                        raise
                    for array, (region, count) in zip(arrays, groups):
                        array[row] = region.sample(rng, count)
        return values

    def _monte_carlo_mean(self, integrand, batch, groups, blocks, key):
        chunk_size = self.chunk_size or self.samples
        chunks = []
        start = 0
        index = 0
        while start < self.samples:
            size = min(chunk_size, self.samples - start)
            chunks.append(key + (index, size))
            start += size
            index += 1
        if self.threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                results = list(executor.map(
                    lambda k: self._chunk_values(integrand, batch, groups, blocks, k), chunks))
        else:
            results = [self._chunk_values(integrand, batch, groups, blocks, k) for k in chunks]
        values = np.concatenate(results)
        mean = float(np.mean(values))
        stderr = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
        return mean, stderr

    def _quadrature_mean(self, integrand, batch, groups, blocks):
        rules = []
        for region, count in groups:
            for _ in range(count):
                rules.append(_gauss_legendre(GAUSS_LEGENDRE_NODES[len(rules)], region.lower[0], region.upper[0]))
        grids = np.meshgrid(*[nodes for nodes, _ in rules], indexing="ij")
        weight_grids = np.meshgrid(*[weights for _, weights in rules], indexing="ij")
        coordinates = [g.ravel() for g in grids]
        weights = np.prod([w.ravel() for w in weight_grids], axis=0)
        rows = len(weights)
        arrays = []
        variable = 0
        for region, count in groups:
            arrays.append(np.stack(coordinates[variable:variable + count], axis=1)[:, :, None]
                          if count else np.zeros((rows, 0, 1)))
            variable += count
        if batch is not None:
            values = np.asarray(batch(arrays), dtype=float)
        else:
            values = np.zeros(rows)
            for row in range(rows):
                try:
                    values[row] = integrand(*self._unpack(arrays, row, blocks))
                except ConfigurationError:
                    # coincident nodes carry no mass
                    values[row] = 0.0
        return float(np.dot(weights, values))

    def integrate(self, integrand, blocks=1, points=0, joint=False, z=None, key="integrate", batch=None):
        """
        Integrate over ``blocks`` copies of the truncated two-component measure and ``points``
        extra Lebesgue variables.

        Parameters
        ----------
        integrand : callable
            ``integrand(configs, points) -> float`` with a list of ``blocks`` TwoConfigs and a
            list of ``points`` point tuples. Raising :class:`ConfigurationError` marks a
            probability-zero coincidence; the sample is redrawn.
        blocks : int, Optional, default = 1
        points : int, Optional, default = 0
            Spatial variables, ranging over :attr:`point_region`.
        joint : bool, Optional, default = False
            Truncate the summed orders of all blocks (instead of each block) at (N+, N-).
        z : float or None, Optional
            Intensity; defaults to the integrator's.
        key : str, Optional
            Name of the random streams.
        batch : callable or None, Optional
            Vectorized integrand ``batch(arrays) -> ndarray`` on the sampled point arrays
            ``[plus_1, minus_1, ..., points]``, each of shape (S, count, d).

        Returns
        -------
        estimate : Estimate
        """
        z = self.z if z is None else float(z)
        volume = self.region.volume
        point_volume = self.point_region.volume
        terms = []
        method = "exact"
        for combo in self._order_combinations(blocks, joint):
            variables = sum(n + m for n, m in combo) + points
            weight = point_volume ** points
            for n, m in combo:
                weight *= (z * volume) ** (n + m) / (factorial(n, exact=True) * factorial(m, exact=True))
            groups = []
            for n, m in combo:
                groups += [(self.region, n), (self.region, m)]
            groups.append((self.point_region, points))
            if variables == 0:
                if batch is not None:
                    value = float(batch([np.zeros((1, 0, self.dim)) for _ in groups])[0])
                else:
                    value = integrand([EMPTY] * blocks, [])
                terms.append((weight * value, 0.0))
            elif self._use_quadrature(variables):
                terms.append((weight * self._quadrature_mean(integrand, batch, groups, blocks), 0.0))
                method = "quadrature" if method == "exact" else method
            else:
                stream = (key,) + tuple(itertools.chain.from_iterable(combo)) + (points,)
                mean, stderr = self._monte_carlo_mean(integrand, batch, groups, blocks, stream)
                terms.append((weight * mean, weight * stderr))
                method = "monte_carlo"
            logger.debug(f"{key}: orders {combo} + {points} points -> {terms[-1][0]!r} +- {terms[-1][1]!r}")
        value = math.fsum(t[0] for t in terms)
        stderr = math.sqrt(math.fsum(t[1] ** 2 for t in terms))
        return Estimate(value, stderr, self.orders, method)

    def space_nodes(self):
        """
        Fixed nodes for spatial integrals over :attr:`point_region`.

        Returns
        -------
        nodes : ndarray of shape (J, d)
        weights : ndarray of shape (J,)
            Normalized to sum to one.
        exact : bool
            True for Gauss-Legendre nodes, False for Monte Carlo nodes.
        """
        if self._space_nodes is None:
            region = self.point_region
            if self.quadrature and self.dim == 1:
                nodes, weights = _gauss_legendre(GAUSS_LEGENDRE_NODES[0], region.lower[0], region.upper[0])
                self._space_nodes = (nodes[:, None], weights, True)
            else:
                rng = make_generator(self.seed, "space")
                nodes = region.sample(rng, self.space_samples)
                self._space_nodes = (nodes, np.full(self.space_samples, 1.0 / self.space_samples), False)
        return self._space_nodes

    def space_estimate(self, values, orders=None):
        """Spatial integral from integrand values at the :meth:`space_nodes`."""
        _, weights, exact = self.space_nodes()
        values = np.asarray(values, dtype=float)
        volume = self.point_region.volume
        value = volume * float(np.dot(weights, values))
        orders = self.orders if orders is None else orders
        if exact:
            return Estimate(value, 0.0, orders, "quadrature")
        stderr = volume * float(np.std(values, ddof=1)) / math.sqrt(len(values)) if len(values) > 1 else 0.0
        return Estimate(value, stderr, orders, "monte_carlo")

    def space_integral(self, f, avoid=()):
        """
        Integral of ``f(u)`` over :attr:`point_region` at the fixed nodes. Nodes coinciding with
        a point in ``avoid`` carry no mass.
        """
        nodes, _, _ = self.space_nodes()
        avoid = set(avoid)
        values = np.zeros(len(nodes))
        for j, node in enumerate(nodes):
            u = tuple(node)
            if u in avoid:
                continue
            values[j] = f(u)
        return self.space_estimate(values)


def lp_integrate(H, I):
    """
    Lebesgue-Poisson integral of a function, truncated at the integrator's orders.

    Parameters
    ----------
    H : ConfigFunction or callable
    I : LPIntegrator

    Returns
    -------
    estimate : Estimate
        The ``(0, 0)`` term is exact, the others are Monte Carlo (or quadrature) estimates.

    Examples
    --------
    >>> from pytwocomp.configuration import Region
    >>> from pytwocomp.functions import unit
    >>> lp_integrate(unit(), LPIntegrator(Region.unit())).value
    1.0
    """
    batch = None
    if getattr(H, "batch", None) is not None:
        batch = lambda arrays: H.evaluate_batch(arrays[0], arrays[1])  # noqa: E731
    return I.integrate(lambda configs, points: H(configs[0]), key="lp", batch=batch)


def pairing(G, k, I):
    """The pairing ``<<G, k>>``, the Lebesgue-Poisson integral of ``G k`` at intensity one."""
    return lp_integrate(G * k, I.replace(z=1.0))


def norm_LC(G, C, I):
    """The norm of G in the weighted space L_C, integral of ``|G| C^(|eta+|+|eta-|)``."""
    return lp_integrate(abs(G).weighted(C), I)


class ProbeNorm(NamedTuple):
    """Empirical lower bound of a sup-norm from a finite probe set."""
    value: float
    probes: int
    orders: tuple
    label: str = "probe lower bound"

    def __float__(self):
        return float(self.value)


def norm_KC(k, C, I, probe_budget=1000, seed=None):
    """
    Probe estimate of the norm of k in K_C, ``sup |k(eta)| C^-(|eta+|+|eta-|)``.

    Configurations are sampled uniformly in the region at every order pair up to the
    truncation orders. The result is a lower bound of the true norm.

    Parameters
    ----------
    k : CorrelationFunction
    C : float
    I : LPIntegrator
    probe_budget : int, Optional, default = 1000
        Total number of probes, spread over the order pairs.
    seed : int or None, Optional
        Defaults to the integrator's seed.

    Returns
    -------
    norm : ProbeNorm
    """
    seed = I.seed if seed is None else seed
    pairs = [(n, m) for m in range(I.orders[1] + 1) for n in range(I.orders[0] + 1)]
    per_pair = max(1, int(probe_budget) // len(pairs))
    best = 0.0
    probes = 0
    for n, m in pairs:
        count = 1 if n + m == 0 else per_pair
        rng = make_generator(seed, "probe", n, m)
        plus = I.region.sample(rng, (count, n))
        minus = I.region.sample(rng, (count, m))
        if getattr(k, "batch", None) is not None:
            values = k.evaluate_batch(plus, minus)
        else:
            values = np.array([k(TwoConfig(FiniteConfig(plus[i]), FiniteConfig(minus[i]))) for i in range(count)])
        best = max(best, float(np.max(np.abs(values))) / C ** (n + m))
        probes += count
    return ProbeNorm(best, probes, I.orders)


def lemma2_check(H, I):
    """
    Both sides of the subset-integration identity
    ``int sum over xi in eta of H(eta, xi) d lambda(eta) = int int H(eta + xi, xi) d lambda(eta) d lambda(xi)``.

    Parameters
    ----------
    H : callable
        ``H(eta, xi)`` for two TwoConfigs.
    I : LPIntegrator
        The right side truncates the summed orders of eta and xi, so both sides cover the
        same configurations.

    Returns
    -------
    lhs, rhs : Estimate
    """
    def lhs_integrand(configs, points):
        eta = configs[0]
        return math.fsum(H(eta, xi) for xi, _ in two_subsets(eta))

    def rhs_integrand(configs, points):
        eta, xi = configs
        return H(eta.union(xi), xi)

    lhs = I.integrate(lhs_integrand, key="lemma2_lhs")
    rhs = I.integrate(rhs_integrand, blocks=2, joint=True, key="lemma2_rhs")
    return lhs, rhs


def integrability_check(k, kernel_norm, I, n, m):
    """
    Monte Carlo audit of the integrability constants required for the dual operator:
    ``int_{Lambda^n x Lambda^m} int d lambda(xi) |k(eta + xi)| N(eta, xi)``, for a configuration
    of exactly ``(n, m)`` points in the region, where ``kernel_norm(eta, xi)`` bounds the
    kernels at ``eta`` with argument ``xi``.

    Returns
    -------
    estimate : Estimate
    """
    region = I.region

    def integrand(configs, points):
        eta, xi = configs
        if eta.size != (n, m):
            return 0.0
        return abs(k(eta.union(xi))) * kernel_norm(eta, xi)

    estimate = I.replace(orders=(max(I.orders[0], n), max(I.orders[1], m)), z=1.0).integrate(
        integrand, blocks=2, key=f"integrability_{n}_{m}")
    # undo the Lebesgue-Poisson weight on eta
    correction = factorial(n, exact=True) * factorial(m, exact=True)
    logger.debug(f"integrability ({n},{m}) over {region!r}: {estimate.value!r}")
    return estimate.scaled(correction)
