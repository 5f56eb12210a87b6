"""
Built-in functions on two-component configurations.

Quasi-observables (bounded functions with bounded support), observables and correlation
functions that can be named in settings files, e.g.

.. code-block:: yaml

    function:
        name: gaussian_bump
        params: {center: 0.5, width: 0.2, order: [1, 1]}
"""

import math

import numpy as np

from pytwocomp.configuration import ConfigFunction, CorrelationFunction, Region, Support
from pytwocomp.util import SettingsError


def unit():
    """The unit element: 1 at the empty configuration, 0 elsewhere."""
    def eval(gamma):
        return 0.0 if gamma else 1.0

    def batch(plus, minus):
        value = 0.0 if plus.shape[1] or minus.shape[1] else 1.0
        return np.full(plus.shape[0], value)

    return ConfigFunction(eval, Support(0, 0), "unit", batch)


def constant(value=1.0, correlation=False):
    """The constant function (an observable, no bounded support)."""
    value = float(value)
    cls = CorrelationFunction if correlation else ConfigFunction
    return cls(lambda gamma: value, None, f"const({value!r})",
               lambda plus, minus: np.full(plus.shape[0], value))


def zero(correlation=False):
    """The zero function."""
    cls = CorrelationFunction if correlation else ConfigFunction
    return cls(lambda gamma: 0.0, Support(0, 0), "zero", lambda plus, minus: np.zeros(plus.shape[0]))


def product(f_plus, f_minus=None, coefficient=1.0, order=None, support=None, label="product"):
    """
    Factorized function ``c * prod f_plus(x) over x in eta+ * prod f_minus(y) over y in eta-``.

    Parameters
    ----------
    f_plus, f_minus : callable
        Vectorized point functions mapping arrays of shape (..., d) to (...).
        ``f_minus`` defaults to ``f_plus``.
    coefficient : float or callable, Optional, default = 1.0
        A constant, or a function of the orders ``(n, m)``.
    order : (int, int) or None, Optional
        If given, the function vanishes unless ``(|eta+|, |eta-|) == order``.
    support : Support or None, Optional
    label : str, Optional

    Returns
    -------
    G : ConfigFunction
    """
    f_minus = f_plus if f_minus is None else f_minus
    coefficient_of = coefficient if callable(coefficient) else (lambda n, m, c=float(coefficient): c)

    def eval(gamma):
        n, m = gamma.size
        if order is not None and (n, m) != tuple(order):
            return 0.0
        c = coefficient_of(n, m)
        if c == 0.0:
            return 0.0
        if n:
            c *= float(np.prod(f_plus(gamma.plus.as_array())))
        if m:
            c *= float(np.prod(f_minus(gamma.minus.as_array())))
        return c

    def batch(plus, minus):
        n, m = plus.shape[1], minus.shape[1]
        samples = plus.shape[0]
        if order is not None and (n, m) != tuple(order):
            return np.zeros(samples)
        values = np.full(samples, float(coefficient_of(n, m)))
        if n:
            values *= np.prod(f_plus(plus), axis=1)
        if m:
            values *= np.prod(f_minus(minus), axis=1)
        return values

    if support is None and order is not None:
        support = Support(int(order[0]), int(order[1]))
    return ConfigFunction(eval, support, label, batch)


def box_indicator(region):
    """Vectorized indicator of a box."""
    def f(points):
        return region.contains_array(points).astype(float)
    return f


def indicator(region, n_plus, n_minus, order=None):
    """
    Product of box indicators, supported on configurations with at most
    ``(n_plus, n_minus)`` points in the region (or exactly ``order`` points).
    """
    support = Support(int(n_plus), int(n_minus), region)
    return product(box_indicator(region), order=order, support=support, label=f"indicator{region!r}")


def gaussian(center, width, amplitude=1.0):
    """Vectorized isotropic Gaussian bump."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    width = float(width)
    amplitude = float(amplitude)

    def f(points):
        squared = np.sum((np.asarray(points) - center) ** 2, axis=-1)
        return amplitude * np.exp(-squared / (2.0 * width ** 2))
    return f


def gaussian_bump(center, width, amplitude=1.0, order=(1, 0), region=None):
    """Product of Gaussian bumps at a fixed order, optionally cut to a region."""
    bump = gaussian(center, width, amplitude)
    if region is not None:
        cut = box_indicator(region)

        def f(points):
            return bump(points) * cut(points)
    else:
        f = bump
    support = Support(int(order[0]), int(order[1]), region)
    return product(f, order=order, support=support, label="gaussian_bump")


def tabulated(table, region=None):
    """
    Function given by one value per order pair, times the indicator of the region.

    Parameters
    ----------
    table : dict
        Maps ``(n, m)`` (or the string ``"n,m"``) to a value.
    region : Region or None, Optional
    """
    values = {}
    for key, value in table.items():
        if isinstance(key, str):
            key = tuple(int(part) for part in key.split(","))
        values[tuple(key)] = float(value)
    n_plus = max(n for n, _ in values) if values else 0
    n_minus = max(m for _, m in values) if values else 0
    f = box_indicator(region) if region is not None else (lambda points: np.ones(np.shape(points)[:-1]))
    return product(f, coefficient=lambda n, m: values.get((n, m), 0.0),
                   support=Support(n_plus, n_minus, region), label="tabulated")


def counting(component="plus"):
    """The observable ``|gamma+|`` or ``|gamma-|`` (``component='total'`` for both)."""
    if component not in ("plus", "minus", "total", "difference"):
        raise SettingsError(f"Unknown counting component {component}")

    def count(n, m):
        return float({"plus": n, "minus": m, "total": n + m, "difference": n - m}[component])

    def eval(gamma):
        return count(*gamma.size)

    def batch(plus, minus):
        return np.full(plus.shape[0], count(plus.shape[1], minus.shape[1]))

    return ConfigFunction(eval, None, f"count_{component}", batch)


def poisson_correlation(rho_plus, rho_minus):
    """
    Correlation function of the product of Poisson measures with densities ``rho_plus``, ``rho_minus``:
    ``k(eta) = rho_plus^|eta+| * rho_minus^|eta-|``.
    """
    rho_plus = float(rho_plus)
    rho_minus = float(rho_minus)

    def eval(gamma):
        n, m = gamma.size
        return rho_plus ** n * rho_minus ** m

    def batch(plus, minus):
        return np.full(plus.shape[0], rho_plus ** plus.shape[1] * rho_minus ** minus.shape[1])

    return CorrelationFunction(eval, None, f"poisson({rho_plus!r},{rho_minus!r})", batch)


def geometric_correlation(C):
    """``k(eta) = C^(|eta+|+|eta-|)``, the extremal element of the unit ball of K_C."""
    return poisson_correlation(C, C)


def random_profile(rng, dim=1, modes=2):
    """Random smooth bounded point function, a short cosine series."""
    frequencies = rng.uniform(0.5, 4.0, size=(modes, dim))
    phases = rng.uniform(0.0, 2 * math.pi, size=modes)
    weights = rng.uniform(-1.0, 1.0, size=modes) / modes

    def f(points):
        points = np.asarray(points, dtype=float)
        angles = points @ frequencies.T + phases
        return 1.0 + np.cos(angles) @ weights
    return f


def random_bounded(rng, n_plus=2, n_minus=2, region=None, dim=1, correlation=False):
    """
    Random factorized bounded function with support ``(n_plus, n_minus, region)``.

    One random coefficient per order pair times a product of random point profiles.
    """
    region = region or Region.unit(dim)
    coefficients = rng.uniform(-1.0, 1.0, size=(n_plus + 1, n_minus + 1))
    f_plus = random_profile(rng, dim)
    f_minus = random_profile(rng, dim)
    cut = box_indicator(region)
    G = product(lambda points: f_plus(points) * cut(points), lambda points: f_minus(points) * cut(points),
                coefficient=lambda n, m: coefficients[n, m] if n <= n_plus and m <= n_minus else 0.0,
                support=Support(n_plus, n_minus, region), label="random_bounded")
    if correlation:
        return CorrelationFunction(G.eval, None, "random_correlation", G.batch)
    return G


def random_correlation(rng, dim=1, bound=1.0):
    """Random bounded correlation function with a random positive coefficient per order pair."""
    f_plus = random_profile(rng, dim)
    f_minus = random_profile(rng, dim)
    scale = rng.uniform(0.5, 1.5, size=(16, 16)) * bound

    def coefficient(n, m):
        return float(scale[min(n, 15), min(m, 15)])

    G = product(f_plus, f_minus, coefficient=coefficient, label="random_correlation")
    return CorrelationFunction(G.eval, None, G.label, G.batch)


FUNCTIONS = {
    "unit": unit,
    "constant": constant,
    "zero": zero,
    "indicator": indicator,
    "gaussian_bump": gaussian_bump,
    "tabulated": tabulated,
    "counting": counting,
}

CORRELATIONS = {
    "constant": lambda value=1.0: constant(value, correlation=True),
    "zero": lambda: zero(correlation=True),
    "poisson": poisson_correlation,
    "geometric": geometric_correlation,
}


def _region_param(params):
    params = dict(params)
    if "region" in params and params["region"] is not None and not isinstance(params["region"], Region):
        lower, upper = params["region"]
        params["region"] = Region(lower, upper)
    return params


def build_function(spec, correlation=False):
    """
    Build a named built-in from a settings block ``{"name": ..., "params": {...}}``.

    Raises
    ------
    SettingsError
        If the name is unknown or the parameters do not fit.
    """
    registry = CORRELATIONS if correlation else FUNCTIONS
    if isinstance(spec, str):
        spec = {"name": spec}
    name = spec.get("name")
    if name not in registry:
        raise SettingsError(f"Unknown {'correlation' if correlation else 'function'} '{name}', "
                            f"choose from {sorted(registry)}")
    try:
        return registry[name](**_region_param(spec.get("params") or {}))
    except TypeError as e:
        raise SettingsError(f"Invalid parameters for '{name}': {e}")
