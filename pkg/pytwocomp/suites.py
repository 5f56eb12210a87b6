"""
Verification suites: the identities and bounds of the package checked at random arguments.

Each suite returns a list of :class:`CheckResult` records. Statistical checks compare Monte
Carlo estimates within three combined standard errors; checks marked ``required=False`` are
reported individually but only their aggregate decides the outcome.
"""

import json
import math
import logging
from typing import NamedTuple

import numpy as np

from pytwocomp.configuration import ConfigFunction, FiniteConfig, Region, TwoConfig
from pytwocomp.functions import poisson_correlation, random_bounded, random_correlation, random_profile, product, unit
from pytwocomp.generators import (
    analytic_n_bound, apply_Lhat, duality_check, fit_growth_constants, growth_check, lhat_oracle, n_bound,
    power_exponential_bound, probe_configs
)
from pytwocomp.gillespie import SimConfig, simulate
from pytwocomp.hierarchy import evolve_truncated
from pytwocomp.ktransform import (
    k_inverse, k_transform, k_transform_split, star_convolution, star_convolution_partitions
)
from pytwocomp.lpmeasure import Estimate, LPIntegrator, lemma2_check, norm_LC
from pytwocomp.rates import as_rate_list, make_rates, numeric_family
from pytwocomp.util import SettingsError, make_generator

logger = logging.getLogger(__name__)

STANDARD_PARAMS = {
    "constant": {"m_plus": 1.0, "m_minus": 0.5, "z_plus": 0.5, "z_minus": 0.3},
    "pp": {},
    "ising": {},
    "hop": {},
    "hopflip": {},
    "flip": {"a": {"height": 0.5}},
    "hopping": {},
}


class CheckResult(NamedTuple):
    """One check: both sides, the allowed deviation, the standard error and the outcome."""
    name: str
    lhs: float
    rhs: float
    tolerance: float
    sigma: float
    passed: bool
    required: bool = True

    def to_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "tolerance": self.tolerance,
                "sigma": self.sigma, "pass": bool(self.passed), "required": self.required}


class Report(object):
    """Results of one or more suites."""

    def __init__(self, suite, results=()):
        self.suite = suite
        self.results = list(results)

    @property
    def passed(self):
        return all(r.passed for r in self.results if r.required)

    def failures(self):
        return [r for r in self.results if r.required and not r.passed]

    def to_dict(self):
        return {"suite": self.suite, "pass": self.passed, "checks": [r.to_dict() for r in self.results]}

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    def summary(self):
        """Human-readable summary, one line per required check and a verdict."""
        lines = []
        for r in self.results:
            if r.required:
                status = "PASS" if r.passed else "FAIL"
                lines.append(f"{status}  {r.name}: {r.lhs!r} vs {r.rhs!r} (tolerance {r.tolerance!r})")
        required = [r for r in self.results if r.required]
        lines.append(f"{self.suite}: {sum(r.passed for r in required)}/{len(required)} checks passed")
        return "\n".join(lines)


def close_check(name, lhs, rhs, rtol=1e-12, scale=1.0, required=True):
    """Deterministic check ``|lhs - rhs| <= rtol * scale * max(1, |lhs|, |rhs|)``."""
    lhs, rhs = float(lhs), float(rhs)
    tolerance = rtol * scale * max(1.0, abs(lhs), abs(rhs))
    return CheckResult(name, lhs, rhs, tolerance, 0.0, abs(lhs - rhs) <= tolerance, required)


def statistical_check(name, lhs, rhs, sigmas=3.0, rtol=0.0, atol=0.0, required=True):
    """Check that two estimates agree within ``sigmas`` combined standard errors plus tolerances."""
    sigma = math.hypot(getattr(lhs, "stderr", 0.0), getattr(rhs, "stderr", 0.0))
    tolerance = sigmas * sigma + atol + rtol * max(abs(float(lhs)), abs(float(rhs)))
    return CheckResult(name, float(lhs), float(rhs), tolerance, sigma, abs(float(lhs) - float(rhs)) <= tolerance,
                       required)


def random_config(rng, region, n, m):
    """Uniform configuration with n plus and m minus points."""
    points = region.sample(rng, n + m)
    return TwoConfig(FiniteConfig(points[:n]), FiniteConfig(points[n:]))


def random_split(rng, region, max_points):
    size = int(rng.integers(0, max_points + 1))
    n = int(rng.integers(0, size + 1))
    return random_config(rng, region, n, size - n)


def _cached(function):
    cache = {}

    def f(gamma):
        if gamma not in cache:
            cache[gamma] = function(gamma)
        return cache[gamma]
    return f


def standard_rates(names=None, dim=1):
    """The rate suites used by the checks, keyed by name."""
    names = names or list(STANDARD_PARAMS)
    return {name: make_rates(name, STANDARD_PARAMS.get(name, {}), dim) for name in names}


def _rates_by_name(rates, dim):
    if rates is None:
        return standard_rates(dim=dim)
    if isinstance(rates, dict):
        return rates
    if isinstance(rates, str):
        if rates == "all":
            return standard_rates(dim=dim)
        return standard_rates(rates.split(","), dim)
    return {"custom": rates}


# Suites --------------------------------------------------------------------------------------------------------------


def check_algebra(n_max=8, trials=100, seed=0, dim=1, **ignored):
    """
    K-transform round trip, the split form of K, the star-homomorphism in both directions, and
    the double-subset against the partition form of the star-convolution.
    """
    rng = make_generator(seed, "algebra")
    region = Region.unit(dim)
    results = []
    for trial in range(trials):
        G = random_bounded(rng, 2, 2, region, dim)
        G1 = random_bounded(rng, 2, 2, region, dim)
        G2 = random_bounded(rng, 2, 2, region, dim)
        f1, f2 = random_profile(rng, dim), random_profile(rng, dim)
        F1 = product(f1, f2, coefficient=lambda n, m: 1.0 / (1 + n + m))
        F2 = product(f2, f1, coefficient=lambda n, m: (-0.5) ** (n + m))
        gamma = random_split(rng, region, min(n_max, 8))
        small = random_split(rng, region, min(n_max, 6))
        scale = 2.0 ** len(gamma)
        results.append(close_check(f"K^-1 K G = G #{trial}", k_inverse(_cached(lambda xi: k_transform(G, xi)), gamma),
                                   G(gamma), scale=scale))
        results.append(close_check(f"K = K+ K- #{trial}", k_transform_split(G, gamma), k_transform(G, gamma),
                                   scale=scale))
        star = ConfigFunction(lambda xi: star_convolution(G1, G2, xi))
        small_scale = 4.0 ** len(small)
        results.append(close_check(f"K(G1 * G2) = KG1 KG2 #{trial}", k_transform(star, small),
                                   k_transform(G1, small) * k_transform(G2, small), scale=small_scale))
        inverse1 = _cached(lambda xi: k_inverse(F1, xi))
        inverse2 = _cached(lambda xi: k_inverse(F2, xi))
        results.append(close_check(f"K^-1 F1 * K^-1 F2 = K^-1(F1 F2) #{trial}",
                                   star_convolution(inverse1, inverse2, small),
                                   k_inverse(lambda xi: F1(xi) * F2(xi), small), scale=small_scale))
        results.append(close_check(f"star convolution partition form #{trial}", star_convolution(G1, G2, small),
                                   star_convolution_partitions(G1, G2, small), scale=small_scale))
    return results


def pass_fraction_check(name, results, fraction=0.95):
    """Aggregate of optional checks; passes if at least ``fraction`` of them passed."""
    passed = sum(r.passed for r in results)
    return CheckResult(name, passed, len(results), 0.0, 0.0, passed >= fraction * len(results))


def check_lemma2(I, trials=20, seed=0, orders=(3, 3), samples=100000, **ignored):
    """The subset-integration identity for random factorized integrands; at least 95% of the trials must agree."""
    J = I.replace(orders=orders, samples=samples)
    rng = make_generator(seed, "lemma2")
    results = []
    for trial in range(trials):
        A = random_bounded(rng, J.orders[0], J.orders[1], J.region, J.dim)
        B = random_bounded(rng, J.orders[0], J.orders[1], J.region, J.dim)

        def H(eta, xi, A=A, B=B):
            return A(xi) * B(eta.difference(xi))

        lhs, rhs = lemma2_check(H, J.replace(seed=J.seed + trial))
        results.append(statistical_check(f"lemma2 #{trial}", lhs, rhs, required=False))
    results.append(pass_fraction_check("lemma2 pass fraction", results))
    return results


def check_kernels(rates=None, tuples=200, seed=0, dim=1, cap=12, **ignored):
    """Closed-form kernels against the numeric inverse K-transform at random arguments."""
    rng = make_generator(seed, "kernels")
    region = Region([0.0] * dim, [2.0] * dim)
    results = []
    for name, rate_sets in _rates_by_name(rates, dim).items():
        for r in as_rate_list(rate_sets):
            numeric = numeric_family(r, cap)
            closed = r.kernels("closed_form", cap)
            for role in r.roles:
                if role not in r.closed_forms:
                    continue
                worst = (0.0, 0.0, 0.0)
                for _ in range(tuples):
                    points = region.sample(rng, 2)
                    x, y = tuple(points[0]), tuple(points[1])
                    sizes = rng.integers(0, 3, size=4)
                    both = random_config(rng, region, int(sizes[0] + sizes[2]), int(sizes[1] + sizes[3]))
                    shift = TwoConfig(FiniteConfig(both.plus.points[:sizes[0]]),
                                      FiniteConfig(both.minus.points[:sizes[1]]))
                    arg = both.difference(shift)
                    c = closed[role](x, y, shift, arg)
                    n = numeric[role](x, y, shift, arg)
                    error = abs(c - n) / max(abs(n), 1e-300) if n else abs(c)
                    if error >= worst[0]:
                        worst = (error, c, n)
                results.append(CheckResult(f"kernel {name}:{r.label}:{role}", worst[1], worst[2], 1e-10, 0.0,
                                           worst[0] <= 1e-10 or abs(worst[1] - worst[2]) <= 1e-14))
    return results


def check_duality(I, rates=None, seed=0, orders=(2, 2), samples=200000, **ignored):
    """Duality of the hierarchical generator and its dual for random G and k, per rate suite."""
    J = I.replace(orders=orders, samples=samples)
    rng = make_generator(seed, "duality")
    results = []
    for name, rate_sets in _rates_by_name(rates, J.dim).items():
        G = random_bounded(rng, J.orders[0], J.orders[1], J.region, J.dim)
        k = random_correlation(rng, J.dim)
        lhs, rhs = duality_check(rate_sets, G, k, J)
        results.append(statistical_check(f"duality {name} ({lhs.provenance})", lhs, rhs, atol=1e-12))
    lhs, rhs = duality_check(make_rates("constant", {"m_plus": 1.0, "m_minus": 1.0}, J.dim), unit(),
                             random_correlation(rng, J.dim), J)
    results.append(statistical_check("duality pure death, G = 1", lhs, rhs, atol=1e-12))
    return results


def check_oracle(I, rates=None, trials=30, seed=0, **ignored):
    """The explicit hierarchical generator against K^-1 L K at random G and eta with at most four points."""
    rng = make_generator(seed, "oracle")
    results = []
    for name, rate_sets in _rates_by_name(rates, I.dim).items():
        for trial in range(trials):
            G = random_bounded(rng, 2, 2, I.region, I.dim)
            eta = random_split(rng, I.region, 4)
            explicit = apply_Lhat(rate_sets, G, eta, I)
            oracle = lhat_oracle(rate_sets, G, eta, I)
            results.append(close_check(f"oracle {name} #{trial} at {eta.size}", explicit.value, oracle.value,
                                       rtol=1e-8))
    return results


def check_bounds(I, rates=None, C=1.0, alpha=None, nu=None, seed=0, trials=20, samples=None, **ignored):
    """
    The power-exponential inequality, analytic N-functions against the computed kernel norms,
    fitted growth constants with the resulting dual-generator bound, and the norm bound
    ``|L^ G|_C <= |N G|_C`` for random G.

    The kernel norms use quadrature in one dimension; the norm bound uses ``samples`` per order
    pair (default: those of I).
    """
    results = []
    worst = 0.0
    for b in range(1, 7):
        for a in np.linspace(0.1, 0.9, 9):
            t = np.linspace(0.0, 100.0, 1001)
            lhs, rhs = power_exponential_bound(t, float(a), float(b))
            worst = max(worst, float(np.max(lhs / rhs)))
    results.append(CheckResult("(1+t)^b a^t bound", worst, 1.0, 1e-12, 0.0, worst <= 1.0 + 1e-12))
    rng = make_generator(seed, "bounds")
    probes = probe_configs(I.region, 6, 4, seed)
    J = I.replace(quadrature=I.dim == 1)
    norms = I.replace(samples=I.samples if samples is None else samples)
    for name, rate_sets in _rates_by_name(rates, I.dim).items():
        N = analytic_n_bound(rate_sets, C)
        if N is None:
            continue
        kernels = [r.kernels() for r in as_rate_list(rate_sets)]
        for eta in [eta for eta in probes if len(eta) <= 3][::3]:
            numeric = n_bound(kernels, C, J, eta)
            tolerance = 3.0 * numeric.stderr
            results.append(CheckResult(f"N {name} at {eta.size}", numeric.value, N(eta), tolerance, numeric.stderr,
                                       numeric.value <= N(eta) * (1 + 1e-12) + tolerance))
        fit = fit_growth_constants(N, probes, nus=(nu,) if nu else (1.0, 1.5, 2.0, 3.0, 5.0, 10.0))
        if fit is None:
            results.append(CheckResult(f"growth {name}", math.inf, 1.0, 0.0, 0.0, False))
            continue
        check = growth_check(N, fit.A, fit.M, fit.nu, probes, alpha if alpha else 0.5 / fit.nu)
        logger.info(f"growth constants {name}: A={fit.A!r} M={fit.M} nu={fit.nu!r}, "
                    f"dual bound {check.lstar_bound!r}")
        results.append(CheckResult(f"growth {name} (A={fit.A:.4g}, M={fit.M}, nu={fit.nu:g})", check.worst_ratio,
                                   1.0, 0.0, 0.0, bool(check)))
        for trial in range(trials):
            G = random_bounded(rng, I.orders[0], I.orders[1], I.region, I.dim)
            LG = ConfigFunction(lambda eta, G=G: apply_Lhat(rate_sets, G, eta, norms).value)
            NG = ConfigFunction(lambda eta, G=G: N(eta) * G(eta))
            lhs = norm_LC(LG, C, norms.replace(seed=norms.seed + trial))
            rhs = norm_LC(NG, C, norms.replace(seed=norms.seed + trial))
            sigma = math.hypot(lhs.stderr, rhs.stderr)
            results.append(CheckResult(f"norm bound {name} #{trial}", lhs.value, rhs.value, 3 * sigma, sigma,
                                       lhs.value <= rhs.value + 3 * sigma))
    return results


def check_moments(I, rates=None, seed=0, densities=(2.0, 1.0), t_end=0.25, replicas=4000, dt=1e-3, grid_points=8,
                  **ignored):
    """
    Simulated densities of plus and minus particles against the spatial means of ``k^(1,0)`` and
    ``k^(0,1)`` from the truncated hierarchy at orders (2, 2), both started from Poisson data with
    the given densities. Compared at half and full ``t_end``; defaults to the constant and
    predator-prey suites. Both sides use the same rate sets, with free displacements inside the box.

    The hierarchy is exact for constant rates. With interactions the truncation error grows like
    ``t^2``, so ``t_end`` should stay well below one.
    """
    J = I.replace(orders=(2, 2))
    region = J.region
    times = [0.5 * t_end, t_end]
    results = []
    for name, rate_sets in _rates_by_name(rates or "constant,pp", J.dim).items():
        series = evolve_truncated(rate_sets, poisson_correlation(*densities), "correlation", t_end, dt, J,
                                  grid_points, times)
        hierarchy = [counts / region.volume for counts in series.expected_counts()]
        cfg = SimConfig(region, rate_sets, tuple(densities), t_end, replicas=replicas, seed=seed, times=times,
                        estimators=("n_plus", "n_minus"))
        moments = simulate(cfg)
        for component, estimator, expected in zip(("plus", "minus"), ("n_plus", "n_minus"), hierarchy):
            means = moments.mean(estimator) / region.volume
            stderrs = moments.stderr(estimator) / region.volume
            for i, t in enumerate(moments.times):
                results.append(statistical_check(f"moments {name} {component} density at t={t:g}",
                                                 Estimate(float(means[i]), float(stderrs[i])), float(expected[i])))
    return results


SUITES = {
    "algebra": check_algebra,
    "lemma2": check_lemma2,
    "kernels": check_kernels,
    "duality": check_duality,
    "bounds": check_bounds,
    "oracle": check_oracle,
    "moments": check_moments,
}


def run_suite(name, I=None, **params):
    """
    Run a named suite (or ``"all"``).

    Parameters
    ----------
    name : str
    I : LPIntegrator or None, Optional
    **params
        Passed on to the suites (rates, seed, n_max, C, alpha, nu, ...).

    Returns
    -------
    report : Report
    """
    if name != "all" and name not in SUITES:
        raise SettingsError(f"Unknown suite '{name}', choose from {sorted(SUITES) + ['all']}")
    I = I or LPIntegrator(Region.unit(params.get("dim", 1)))
    params.setdefault("dim", I.dim)
    names = list(SUITES) if name == "all" else [name]
    results = []
    for suite in names:
        logger.info(f"Running suite {suite}")
        results += SUITES[suite](I=I, **params)
    return Report(name, results)
