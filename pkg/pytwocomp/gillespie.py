"""
Stochastic simulation of the finite-volume two-type dynamics.

Each replica runs the jump chain of the generator on a box with periodic boundaries.
Death, flip and hop-out events of individual particles are drawn with their exact rates;
birth positions and hop targets are drawn uniformly in the box and accepted with probability
``rate / bound`` (thinning) against the bounds declared by the rate set.
"""

import csv
import math
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from pytwocomp.configuration import FiniteConfig, TwoConfig
from pytwocomp.generators import apply_L
from pytwocomp.lpmeasure import Estimate, LPIntegrator
from pytwocomp.rates import as_rate_list
from pytwocomp.util import (
    ConfigurationError, PopulationCapExceeded, SimulationError, ThinningBoundViolated, make_generator
)

logger = logging.getLogger(__name__)

POPULATION_CAP = 10000

ESTIMATORS = ("n_plus", "n_minus", "n_total", "pairs_plus", "pairs_minus", "pairs_mixed")

CONSERVATIVE_KINDS = ("hop_keep", "hop_flip", "flip")


class SimConfig(object):
    """
    Settings of a simulation.

    Parameters
    ----------
    region : Region
        The periodic box. Distance-dependent rates should be built with ``torus=region``.
    rates : RateSet or list of RateSet
    initial : TwoConfig or (float, float)
        A fixed initial configuration, or the densities of Poisson initial data.
    t_end : float
    replicas : int, Optional, default = 1000
    seed : int, Optional, default = 0
    times : sequence of float or None, Optional
        Recording times; defaults to eleven equally spaced times in ``[0, t_end]``.
    estimators : sequence of str, Optional
        Names from :data:`ESTIMATORS`.
    pair_radius : float, Optional, default = 0.1
        Radius of the pair-count estimators.
    population_cap : int, Optional, default = POPULATION_CAP
        Largest allowed population per component.
    threads : int, Optional, default = 1
        Worker threads for replicas. Results do not depend on it.
    check_invariants : bool, Optional, default = True
        Assert count conservation for conservative dynamics after every event.
    """

    def __init__(self, region, rates, initial, t_end, replicas=1000, seed=0, times=None,
                 estimators=("n_plus", "n_minus", "n_total"), pair_radius=0.1, population_cap=POPULATION_CAP,
                 threads=1, check_invariants=True):
        if not t_end > 0:
            raise ValueError(f"The final time must be positive, got {t_end}")
        if int(replicas) < 1:
            raise ValueError("At least one replica is needed.")
        unknown = set(estimators) - set(ESTIMATORS)
        if unknown:
            raise ValueError(f"Unknown estimators {sorted(unknown)}, choose from {ESTIMATORS}")
        self.region = region
        self.rates = as_rate_list(rates)
        self.initial = initial
        self.t_end = float(t_end)
        self.replicas = int(replicas)
        self.seed = int(seed)
        self.times = np.linspace(0.0, self.t_end, 11) if times is None else np.sort(np.asarray(times, dtype=float))
        self.estimators = tuple(estimators)
        self.pair_radius = float(pair_radius)
        self.population_cap = int(population_cap)
        self.threads = max(1, int(threads))
        self.check_invariants = bool(check_invariants)

    def settings(self):
        initial = self.initial
        if isinstance(initial, TwoConfig):
            initial = {"plus": [list(p) for p in initial.plus], "minus": [list(p) for p in initial.minus]}
        else:
            initial = {"density": list(initial)}
        return {
            "region": [list(self.region.lower), list(self.region.upper)],
            "rates": [r.label for r in self.rates],
            "initial": initial,
            "t_end": self.t_end,
            "replicas": self.replicas,
            "seed": self.seed,
            "times": [float(t) for t in self.times],
            "estimators": list(self.estimators),
            "pair_radius": self.pair_radius,
        }

    def replace(self, **changes):
        values = dict(region=self.region, rates=self.rates, initial=self.initial, t_end=self.t_end,
                      replicas=self.replicas, seed=self.seed, times=self.times, estimators=self.estimators,
                      pair_radius=self.pair_radius, population_cap=self.population_cap, threads=self.threads,
                      check_invariants=self.check_invariants)
        values.update(changes)
        return SimConfig(**values)


class MomentSeries(object):
    """Replica means and standard errors of the estimators at the recording times."""

    def __init__(self, times, samples):
        self.times = np.asarray(times, dtype=float)
        self.samples = {name: np.asarray(values, dtype=float) for name, values in samples.items()}

    @property
    def estimators(self):
        return tuple(self.samples)

    def mean(self, name):
        return self.samples[name].mean(axis=0)

    def stderr(self, name):
        values = self.samples[name]
        if values.shape[0] < 2:
            return np.zeros(values.shape[1])
        return values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])

    def to_csv(self, path):
        """Write the columns time, estimator, mean, stderr."""
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["time", "estimator", "mean", "stderr"])
            for name in self.samples:
                for t, mean, stderr in zip(self.times, self.mean(name), self.stderr(name)):
                    writer.writerow([repr(float(t)), name, repr(float(mean)), repr(float(stderr))])


def poisson_configuration(rng, region, density_plus, density_minus):
    """Poisson initial data with the given densities, redrawn on coincident points."""
    for _ in range(100):
        n = int(rng.poisson(density_plus * region.volume))
        m = int(rng.poisson(density_minus * region.volume))
        try:
            return TwoConfig(FiniteConfig(region.sample(rng, n)), FiniteConfig(region.sample(rng, m)))
        except ConfigurationError:
            continue
    raise SimulationError("Could not draw a Poisson configuration without coincident points.")


def _pair_count(first, second, region, radius, same):
    if not len(first) or not len(second):
        return 0.0
    a = first.as_array()
    b = second.as_array()
    delta = a[:, None, :] - b[None, :, :]
    widths = np.asarray(region.widths)
    delta -= widths * np.round(delta / widths)
    close = np.sqrt(np.sum(delta ** 2, axis=-1)) <= radius
    if same:
        return float((close.sum() - len(first)) / 2)
    return float(close.sum())


def evaluate_estimator(name, gamma, region, radius):
    if name == "n_plus":
        return float(len(gamma.plus))
    if name == "n_minus":
        return float(len(gamma.minus))
    if name == "n_total":
        return float(len(gamma))
    if name == "pairs_plus":
        return _pair_count(gamma.plus, gamma.plus, region, radius, True)
    if name == "pairs_minus":
        return _pair_count(gamma.minus, gamma.minus, region, radius, True)
    return _pair_count(gamma.plus, gamma.minus, region, radius, False)


class _Channel(object):
    __slots__ = ("rate", "role", "family", "particle")

    def __init__(self, rate, role, family, particle=None):
        self.rate = rate
        self.role = role
        self.family = family
        self.particle = particle


def _channels(rates, gamma, volume):
    """Event channels at gamma: exact rates for single particles, thinning bounds for spatial events."""
    channels = []
    for r in rates:
        if r.kind == "birth_death":
            if r.rate("D+") is not None:
                channels += [_Channel(r.call("D+", x, None, gamma.remove_plus(x)), "D+", r, x) for x in gamma.plus]
            if r.rate("D-") is not None:
                channels += [_Channel(r.call("D-", y, None, gamma.remove_minus(y)), "D-", r, y) for y in gamma.minus]
            for role in ("B+", "B-"):
                if r.rate(role) is not None:
                    channels.append(_Channel(r.bound(role, gamma) * volume, role, r))
        elif r.kind == "flip":
            if r.rate("A+") is not None:
                channels += [_Channel(r.call("A+", x, None, gamma.remove_plus(x)), "A+", r, x) for x in gamma.plus]
            if r.rate("A-") is not None:
                channels += [_Channel(r.call("A-", y, None, gamma.remove_minus(y)), "A-", r, y) for y in gamma.minus]
        else:
            first, second = ("C1+", "C1-") if r.kind == "hop_keep" else ("C2+", "C2-")
            for role, particles in ((first, gamma.plus), (second, gamma.minus)):
                if r.rate(role) is None or not len(particles):
                    continue
                bound = r.bound(role, gamma) * volume
                channels += [_Channel(bound, role, r, x) for x in particles]
    return channels


def _thinned(channel, gamma, u):
    """Rate of the spatial event at u and the configuration it leads to."""
    r, role, x = channel.family, channel.role, channel.particle
    if role == "B+":
        return r.call(role, u, None, gamma), gamma.add_plus(u)
    if role == "B-":
        return r.call(role, u, None, gamma), gamma.add_minus(u)
    if role == "C1+":
        rest = gamma.remove_plus(x)
        return r.call(role, x, u, rest), rest.add_plus(u)
    if role == "C1-":
        rest = gamma.remove_minus(x)
        return r.call(role, x, u, rest), rest.add_minus(u)
    if role == "C2+":
        rest = gamma.remove_plus(x)
        return r.call(role, x, u, rest), rest.add_minus(u)
    rest = gamma.remove_minus(x)
    return r.call(role, u, x, rest), rest.add_plus(u)


def _apply_exact(channel, gamma):
    role, x = channel.role, channel.particle
    if role == "D+":
        return gamma.remove_plus(x)
    if role == "D-":
        return gamma.remove_minus(x)
    if role == "A+":
        return gamma.flip_plus(x)
    return gamma.flip_minus(x)


def _check_event(cfg, before, after, conservative, flip_only):
    n, m = after.size
    if n > cfg.population_cap or m > cfg.population_cap:
        raise PopulationCapExceeded(f"Population ({n}, {m}) exceeds the cap {cfg.population_cap}")
    if cfg.check_invariants:
        if conservative and len(after) != len(before):
            raise SimulationError(f"Conservative dynamics changed the particle number {len(before)} -> {len(after)}")
        if flip_only and sorted(after.points()) != sorted(before.points()):
            raise SimulationError("Flip dynamics moved a particle.")


def run_replica(cfg, replica, record_times=None):
    """
    One trajectory of the jump chain.

    Returns
    -------
    states : list of TwoConfig
        The configurations at the recording times.
    """
    record_times = cfg.times if record_times is None else record_times
    rng = make_generator(cfg.seed, "replica", replica)
    if isinstance(cfg.initial, TwoConfig):
        gamma = cfg.initial
    else:
        gamma = poisson_configuration(rng, cfg.region, *cfg.initial)
    volume = cfg.region.volume
    conservative = all(r.kind in CONSERVATIVE_KINDS for r in cfg.rates)
    flip_only = all(r.kind == "flip" for r in cfg.rates)
    states = []
    t = 0.0
    next_record = 0
    while next_record < len(record_times):
        channels = _channels(cfg.rates, gamma, volume)
        rates = np.array([c.rate for c in channels])
        total = float(rates.sum()) if len(rates) else 0.0
        t_next = t + rng.exponential(1.0 / total) if total > 0 else math.inf
        while next_record < len(record_times) and record_times[next_record] < t_next:
            states.append(gamma)
            next_record += 1
        if next_record >= len(record_times):
            break
        t = t_next
        choice = int(np.searchsorted(np.cumsum(rates), rng.uniform(0.0, total), side="right"))
        channel = channels[min(choice, len(channels) - 1)]
        if channel.role[0] in "DA":
            new = _apply_exact(channel, gamma)
        else:
            u = tuple(float(c) for c in cfg.region.sample(rng, 1)[0])
            if u in gamma:
                continue
            rate, candidate = _thinned(channel, gamma, u)
            bound = channel.rate / volume
            if rate > bound * (1.0 + 1e-12):
                raise ThinningBoundViolated(f"Rate {rate!r} of {channel.role} at {u} exceeds its bound {bound!r}")
            if rng.uniform() * bound >= rate:
                continue
            new = candidate
        _check_event(cfg, gamma, new, conservative, flip_only)
        gamma = new
    return states


def _run_all(cfg, record_times=None):
    replicas = range(cfg.replicas)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as executor:
            return list(executor.map(lambda r: run_replica(cfg, r, record_times), replicas))
    return [run_replica(cfg, r, record_times) for r in replicas]


def simulate(cfg):
    """
    Run all replicas and collect the estimators.

    Parameters
    ----------
    cfg : SimConfig

    Returns
    -------
    series : MomentSeries

    Raises
    ------
    PopulationCapExceeded
    ThinningBoundViolated
    """
    logger.info(f"Simulating {cfg.replicas} replicas up to t={cfg.t_end!r} with seed {cfg.seed}")
    trajectories = _run_all(cfg)
    samples = {}
    for name in cfg.estimators:
        samples[name] = [[evaluate_estimator(name, gamma, cfg.region, cfg.pair_radius) for gamma in states]
                         for states in trajectories]
    return MomentSeries(cfg.times, samples)


def generator_check(cfg, F, gamma0, h, I=None):
    """
    Compare the empirical rate of change ``(E F(gamma_h) - F(gamma_0)) / h`` from replicas started
    at gamma0 with the generator ``(LF)(gamma_0)``.

    Parameters
    ----------
    cfg : SimConfig
    F : callable
    gamma0 : TwoConfig
    h : float
    I : LPIntegrator or None, Optional
        For the spatial integrals of the generator. Defaults to quadrature over the box.

    Returns
    -------
    empirical, exact : Estimate
        The empirical value carries an O(h) bias in addition to its standard error.
    """
    if not h > 0:
        raise ValueError(f"The time increment must be positive, got {h}")
    cfg = cfg.replace(initial=gamma0, t_end=h, times=[h])
    I = I or LPIntegrator(cfg.region, orders=(0, 0), quadrature=True, space_samples=4096, seed=cfg.seed)
    f0 = F(gamma0)
    changes = np.array([(F(states[-1]) - f0) / h for states in _run_all(cfg)])
    stderr = float(changes.std(ddof=1) / math.sqrt(len(changes))) if len(changes) > 1 else 0.0
    empirical = Estimate(float(changes.mean()), stderr, (0, 0), "simulation")
    return empirical, apply_L(cfg.rates, F, gamma0, I)
