"""
Finite two-component configurations and functions on them.

Points are tuples of floats. A :class:`FiniteConfig` stores its points in canonical
(lexicographic) order, a :class:`TwoConfig` is a pair of disjoint finite configurations
(plus- and minus-particles). Equality of points is exact coordinate equality.
"""

import math
import itertools
from typing import NamedTuple, Optional

import numpy as np

from pytwocomp.util import CapExceeded, DuplicatePoint, DisjointnessViolation, DimensionMismatch

SUBSET_CAP = 20
"""Hard cap on the number of points for exhaustive subset enumeration."""


def make_point(coords):
    """
    Build a point from a number (d=1) or a sequence of coordinates.

    Parameters
    ----------
    coords : float or sequence of float

    Returns
    -------
    point : tuple of float
    """
    point = tuple(float(c) for c in np.atleast_1d(np.asarray(coords, dtype=float)).ravel())
    if len(point) == 0:
        raise DimensionMismatch("A point needs at least one coordinate.")
    if not all(math.isfinite(c) for c in point):
        raise ValueError(f"Point coordinates must be finite, got {point}")
    return point


def _check_dimensions(points):
    dims = {len(p) for p in points}
    if len(dims) > 1:
        raise DimensionMismatch(f"Points of different dimensions {sorted(dims)} cannot be combined.")


class FiniteConfig(object):
    """
    A finite set of distinct points in R^d, stored canonically sorted.

    Parameters
    ----------
    points : iterable of points (numbers or coordinate sequences)

    Raises
    ------
    DuplicatePoint
        If a point appears twice.
    """
    __slots__ = ("_points",)

    def __init__(self, points=()):
        canonical = sorted(make_point(p) for p in points)
        for first, second in zip(canonical, canonical[1:]):
            if first == second:
                raise DuplicatePoint(f"Point {first} appears twice in one component.")
        _check_dimensions(canonical)
        self._points = tuple(canonical)

    @classmethod
    def _from_canonical(cls, points):
        instance = cls.__new__(cls)
        instance._points = tuple(points)
        return instance

    @property
    def points(self):
        """The canonically ordered tuple of points."""
        return self._points

    @property
    def dim(self):
        """Dimension of the points, None for the empty configuration."""
        return len(self._points[0]) if self._points else None

    def __len__(self):
        return len(self._points)

    def __iter__(self):
        return iter(self._points)

    def __contains__(self, point):
        return tuple(point) in self._points

    def __eq__(self, other):
        return isinstance(other, FiniteConfig) and self._points == other._points

    def __hash__(self):
        return hash(self._points)

    def __repr__(self):
        if self.dim == 1:
            return "{" + ", ".join(repr(p[0]) for p in self._points) + "}"
        return "{" + ", ".join(repr(p) for p in self._points) + "}"

    def union(self, other):
        """Union with a disjoint configuration."""
        if not other:
            return self
        if not self:
            return other
        return FiniteConfig(self._points + other.points)

    def difference(self, other):
        """Points of self that are not in other."""
        if not other:
            return self
        removed = set(other.points)
        return FiniteConfig._from_canonical(p for p in self._points if p not in removed)

    def add(self, point):
        """Configuration with one more point."""
        return FiniteConfig(self._points + (make_point(point),))

    def remove(self, point):
        """Configuration without the given point, which must be present."""
        point = tuple(point)
        if point not in self._points:
            raise KeyError(point)
        return FiniteConfig._from_canonical(p for p in self._points if p != point)

    def restrict(self, region):
        """Points inside the region."""
        return FiniteConfig._from_canonical(p for p in self._points if region.contains(p))

    def as_array(self, dim=None):
        """Points as an array of shape (n, d)."""
        dim = dim or self.dim or 1
        if not self._points:
            return np.zeros((0, dim))
        return np.array(self._points, dtype=float)


EMPTY_CONFIG = FiniteConfig()


class TwoConfig(object):
    """
    A finite two-component configuration (plus, minus) with disjoint components.

    Parameters
    ----------
    plus : FiniteConfig
    minus : FiniteConfig

    Raises
    ------
    DisjointnessViolation
        If a point belongs to both components.
    """
    __slots__ = ("_plus", "_minus")

    def __init__(self, plus=EMPTY_CONFIG, minus=EMPTY_CONFIG):
        if not isinstance(plus, FiniteConfig):
            plus = FiniteConfig(plus)
        if not isinstance(minus, FiniteConfig):
            minus = FiniteConfig(minus)
        if plus and minus:
            _check_dimensions((plus.points[0], minus.points[0]))
            common = set(plus.points).intersection(minus.points)
            if common:
                raise DisjointnessViolation(f"Points {sorted(common)} are in both components.")
        self._plus = plus
        self._minus = minus

    @property
    def plus(self):
        return self._plus

    @property
    def minus(self):
        return self._minus

    @property
    def size(self):
        """The pair (|plus|, |minus|)."""
        return len(self._plus), len(self._minus)

    @property
    def dim(self):
        return self._plus.dim or self._minus.dim

    def __len__(self):
        return len(self._plus) + len(self._minus)

    def __bool__(self):
        return bool(self._plus) or bool(self._minus)

    def __eq__(self, other):
        return isinstance(other, TwoConfig) and self._plus == other._plus and self._minus == other._minus

    def __hash__(self):
        return hash((self._plus, self._minus))

    def __repr__(self):
        return f"TwoConfig(plus={self._plus!r}, minus={self._minus!r})"

    def __contains__(self, point):
        return point in self._plus or point in self._minus

    def union(self, other):
        """Componentwise union with a configuration disjoint from this one."""
        if not other:
            return self
        if not self:
            return other
        return TwoConfig(self._plus.union(other.plus), self._minus.union(other.minus))

    def difference(self, other):
        """Componentwise difference."""
        return TwoConfig(self._plus.difference(other.plus), self._minus.difference(other.minus))

    def add_plus(self, point):
        return TwoConfig(self._plus.add(point), self._minus)

    def add_minus(self, point):
        return TwoConfig(self._plus, self._minus.add(point))

    def remove_plus(self, point):
        return TwoConfig(self._plus.remove(point), self._minus)

    def remove_minus(self, point):
        return TwoConfig(self._plus, self._minus.remove(point))

    def flip_plus(self, point):
        """Move a plus-point to the minus component (mark flip keeping the site)."""
        return TwoConfig(self._plus.remove(point), self._minus.add(point))

    def flip_minus(self, point):
        """Move a minus-point to the plus component."""
        return TwoConfig(self._plus.add(point), self._minus.remove(point))

    def restrict(self, region):
        """The configuration of points inside a region."""
        return TwoConfig(self._plus.restrict(region), self._minus.restrict(region))

    def points(self):
        """All points, plus-points first."""
        return self._plus.points + self._minus.points


EMPTY = TwoConfig()


def two_config(plus_points=(), minus_points=()):
    """
    Build a canonical two-component configuration.

    Parameters
    ----------
    plus_points : sequence of points
    minus_points : sequence of points

    Returns
    -------
    gamma : TwoConfig

    Raises
    ------
    DuplicatePoint
        If a point is repeated within one component.
    DisjointnessViolation
        If a point appears in both components.

    Examples
    --------
    >>> two_config([0.3, 0.1], [])
    TwoConfig(plus={0.1, 0.3}, minus={})
    """
    return TwoConfig(FiniteConfig(plus_points), FiniteConfig(minus_points))


def _check_cap(count, cap):
    if count > cap:
        raise CapExceeded(f"Exhaustive enumeration over {count} points exceeds the cap of {cap}.")


def subsets(cfg, cap=SUBSET_CAP):
    """
    All subsets of a finite configuration with their complements.

    Subsets are produced in bitmask order over the canonical point order: bit ``i`` of the
    mask selects the i-th point.

    Parameters
    ----------
    cfg : FiniteConfig
    cap : int, Optional, default = SUBSET_CAP

    Yields
    ------
    subset, complement : FiniteConfig

    Raises
    ------
    CapExceeded
        If the configuration has more than ``cap`` points.
    """
    points = cfg.points
    _check_cap(len(points), cap)
    for mask in range(1 << len(points)):
        chosen = []
        rest = []
        for i, point in enumerate(points):
            (chosen if mask >> i & 1 else rest).append(point)
        yield FiniteConfig._from_canonical(chosen), FiniteConfig._from_canonical(rest)


def sized_subsets(cfg, max_size):
    """Subsets with at most ``max_size`` points, each with its complement (by increasing size)."""
    points = cfg.points
    for size in range(min(max_size, len(points)) + 1):
        for chosen in itertools.combinations(range(len(points)), size):
            chosen_set = set(chosen)
            yield (
                FiniteConfig._from_canonical(points[i] for i in chosen),
                FiniteConfig._from_canonical(p for i, p in enumerate(points) if i not in chosen_set)
            )


def two_subsets(gamma, cap=SUBSET_CAP):
    """
    All sub-configurations of a two-component configuration with their complements.

    The plus-subset runs in the inner loop. The cap applies to the total number of points.

    Yields
    ------
    sub, complement : TwoConfig
    """
    _check_cap(len(gamma), cap)
    minus_subsets = list(subsets(gamma.minus, cap))
    plus_subsets = list(subsets(gamma.plus, cap))
    for minus_sub, minus_rest in minus_subsets:
        for plus_sub, plus_rest in plus_subsets:
            yield TwoConfig(plus_sub, minus_sub), TwoConfig(plus_rest, minus_rest)


class Region(object):
    """
    Axis-aligned box in R^d.

    Parameters
    ----------
    lower : float or sequence of float
    upper : float or sequence of float
    """

    def __init__(self, lower, upper):
        self.lower = make_point(lower)
        self.upper = make_point(upper)
        if len(self.lower) != len(self.upper):
            raise DimensionMismatch("Region bounds have different dimensions.")
        if not all(lo < hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f"Region needs lower < upper componentwise, got {self.lower}, {self.upper}")

    @classmethod
    def unit(cls, dim=1):
        """The unit cube [0,1]^d."""
        return cls([0.0] * dim, [1.0] * dim)

    @property
    def dim(self):
        return len(self.lower)

    @property
    def widths(self):
        return np.array(self.upper) - np.array(self.lower)

    @property
    def volume(self):
        return float(np.prod(self.widths))

    def __eq__(self, other):
        return isinstance(other, Region) and self.lower == other.lower and self.upper == other.upper

    def __hash__(self):
        return hash((self.lower, self.upper))

    def __repr__(self):
        return f"Region({list(self.lower)}, {list(self.upper)})"

    def contains(self, point):
        return all(lo <= c <= hi for lo, c, hi in zip(self.lower, point, self.upper))

    def contains_array(self, points):
        """Mask over leading axes: True where all points (last axis = coordinates) lie in the box."""
        points = np.asarray(points)
        inside = np.all((points >= np.array(self.lower)) & (points <= np.array(self.upper)), axis=-1)
        return inside

    def padded(self, radius):
        """The box enlarged by ``radius`` on every side."""
        if radius == 0:
            return self
        return Region([lo - radius for lo in self.lower], [hi + radius for hi in self.upper])

    def hull(self, other):
        """Smallest box containing both boxes."""
        return Region([min(a, b) for a, b in zip(self.lower, other.lower)],
                      [max(a, b) for a, b in zip(self.upper, other.upper)])

    def sample(self, rng, size):
        """Uniform points of shape ``size + (d,)``."""
        if isinstance(size, int):
            size = (size,)
        return rng.uniform(np.array(self.lower), np.array(self.upper), size=tuple(size) + (self.dim,))

    def periodic_displacement(self, u, v):
        """Displacement u - v on the torus obtained by identifying opposite faces."""
        widths = self.widths
        delta = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
        return delta - widths * np.round(delta / widths)

    def wrap(self, point):
        """Map a point into the box periodically."""
        lower = np.array(self.lower)
        return make_point(lower + np.mod(np.asarray(point, dtype=float) - lower, self.widths))

    def grid(self, points_per_axis):
        """
        Cell midpoints of a uniform grid.

        Returns
        -------
        nodes : ndarray of shape (points_per_axis**d, d)
        cell_volume : float
        """
        axes = [lo + (np.arange(points_per_axis) + 0.5) * (hi - lo) / points_per_axis
                for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        return nodes, self.volume / points_per_axis ** self.dim


class Support(NamedTuple):
    """
    Bounded-support certificate: the function vanishes outside
    ``|plus| <= n_plus, |minus| <= n_minus`` and all points in ``region``.
    A region of None certifies the order bound only.
    """
    n_plus: int
    n_minus: int
    region: Optional[Region] = None

    def contains(self, gamma):
        n, m = gamma.size
        if n > self.n_plus or m > self.n_minus:
            return False
        if self.region is None:
            return True
        return all(self.region.contains(p) for p in gamma.points())

    def mask(self, plus, minus):
        """Vectorized membership for sample arrays of shape (S, n, d) and (S, m, d)."""
        samples = plus.shape[0]
        if plus.shape[1] > self.n_plus or minus.shape[1] > self.n_minus:
            return np.zeros(samples, dtype=bool)
        inside = np.ones(samples, dtype=bool)
        if self.region is not None:
            if plus.shape[1]:
                inside &= np.all(self.region.contains_array(plus), axis=1)
            if minus.shape[1]:
                inside &= np.all(self.region.contains_array(minus), axis=1)
        return inside


def _sum_support(first, second):
    if first is None or second is None:
        return None
    if first.region is None or second.region is None:
        region = None
    else:
        region = first.region.hull(second.region)
    return Support(max(first.n_plus, second.n_plus), max(first.n_minus, second.n_minus), region)


def _product_support(first, second):
    if first is None:
        return second
    if second is None:
        return first
    return Support(min(first.n_plus, second.n_plus), min(first.n_minus, second.n_minus),
                   first.region if first.region is not None else second.region)


class ConfigFunction(object):
    """
    A real function on finite two-component configurations.

    Parameters
    ----------
    eval : callable
        Maps a :class:`TwoConfig` to a float.
    support : Support or None, Optional
        Bounded-support certificate. Outside the support the function returns exactly 0
        without calling ``eval``.
    label : str, Optional
    batch : callable or None, Optional
        Vectorized evaluator ``batch(plus, minus) -> ndarray (S,)`` for point arrays of shape
        (S, n, d) and (S, m, d) with distinct points. Used by the Monte Carlo integrator.
    """

    def __init__(self, eval, support=None, label="", batch=None):
        self.eval = eval
        self.support = support
        self.label = label
        self.batch = batch

    def __call__(self, gamma):
        if self.support is not None and not self.support.contains(gamma):
            return 0.0
        return float(self.eval(gamma))

    def __repr__(self):
        return f"{type(self).__name__}({self.label or self.eval!r})"

    def evaluate_batch(self, plus, minus):
        """
        Evaluate on arrays of sampled configurations.

        Parameters
        ----------
        plus : ndarray of shape (S, n, d)
        minus : ndarray of shape (S, m, d)

        Returns
        -------
        values : ndarray of shape (S,)
        """
        samples = plus.shape[0]
        mask = np.ones(samples, dtype=bool) if self.support is None else self.support.mask(plus, minus)
        values = np.zeros(samples)
        if not mask.any():
            return values
        if self.batch is not None:
            values[mask] = np.asarray(self.batch(plus[mask], minus[mask]), dtype=float)
        else:
            for i in np.flatnonzero(mask):
                values[i] = self.eval(TwoConfig(FiniteConfig(plus[i]), FiniteConfig(minus[i])))
        return values

    def with_support(self, support):
        """Same function with a (stronger) support certificate."""
        return type(self)(self.eval, support, self.label, self.batch)

    def truncated(self, n_plus, n_minus, region=None):
        """The function multiplied by the indicator of the given support."""
        support = _product_support(self.support, Support(n_plus, n_minus, region))
        if self.support is not None and self.support.region is not None and region is not None:
            support = Support(support.n_plus, support.n_minus, region)
            inner = self.support

            def eval(gamma, f=self.eval):
                return f(gamma) if inner.contains(gamma) else 0.0

            batch = None
            if self.batch is not None:
                def batch(plus, minus, g=self.batch):
                    return np.where(inner.mask(plus, minus), g(plus, minus), 0.0)
            return type(self)(eval, support, f"{self.label}|trunc", batch)
        return type(self)(self.eval, support, f"{self.label}|trunc", self.batch)

    def __add__(self, other):
        if not isinstance(other, ConfigFunction):
            return NotImplemented

        def eval(gamma, f=self, g=other):
            return f(gamma) + g(gamma)

        batch = None
        if self.batch is not None and other.batch is not None:
            def batch(plus, minus, f=self, g=other):
                return f.evaluate_batch(plus, minus) + g.evaluate_batch(plus, minus)
        return type(self)(eval, _sum_support(self.support, other.support),
                          f"({self.label}+{other.label})", batch)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, ConfigFunction):
            def eval(gamma, f=self, g=other):
                return f(gamma) * g(gamma)

            batch = None
            if self.batch is not None and other.batch is not None:
                def batch(plus, minus, f=self, g=other):
                    return f.evaluate_batch(plus, minus) * g.evaluate_batch(plus, minus)
            return type(self)(eval, _product_support(self.support, other.support),
                              f"({self.label}*{other.label})", batch)
        scale = float(other)

        def eval(gamma, f=self.eval):
            return scale * f(gamma)

        batch = None
        if self.batch is not None:
            def batch(plus, minus, g=self.batch):
                return scale * np.asarray(g(plus, minus))
        return type(self)(eval, self.support, f"{scale!r}*{self.label}", batch)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return (-1.0) * self

    def __abs__(self):
        def eval(gamma, f=self.eval):
            return abs(f(gamma))

        batch = None
        if self.batch is not None:
            def batch(plus, minus, g=self.batch):
                return np.abs(g(plus, minus))
        return type(self)(eval, self.support, f"|{self.label}|", batch)

    def weighted(self, C):
        """The function multiplied by C^(|plus|+|minus|)."""
        C = float(C)

        def eval(gamma, f=self.eval):
            return f(gamma) * C ** len(gamma)

        batch = None
        if self.batch is not None:
            def batch(plus, minus, g=self.batch):
                return np.asarray(g(plus, minus)) * C ** (plus.shape[1] + minus.shape[1])
        return type(self)(eval, self.support, f"{self.label}*C^n", batch)


class CorrelationFunction(ConfigFunction):
    """
    A correlation function k on finite two-component configurations.

    The component ``k^(n,m)`` is the restriction to configurations with n plus- and
    m minus-points, a function symmetric in each group of points separately.
    """

    def component(self, n, m):
        """The restriction ``k^(n,m)``, see :func:`restrict`."""
        return restrict(self, n, m)


def restrict(k, n, m):
    """
    Restrict a function on configurations to n plus- and m minus-points.

    Parameters
    ----------
    k : ConfigFunction
    n, m : int

    Returns
    -------
    component : callable
        ``component(plus_points, minus_points)`` evaluates k at the configuration built from
        the given point sequences, which must have lengths n and m.

    Raises
    ------
    DuplicatePoint
        When called with coincident points.
    """
    def component(plus_points=(), minus_points=()):
        plus_points = list(plus_points)
        minus_points = list(minus_points)
        if len(plus_points) != n or len(minus_points) != m:
            raise ValueError(f"Component ({n},{m}) needs {n} plus and {m} minus points.")
        plus = FiniteConfig(plus_points)
        minus = FiniteConfig(minus_points)
        if set(plus.points).intersection(minus.points):
            raise DuplicatePoint("Coincident points in a correlation function component.")
        return k(TwoConfig(plus, minus))

    component.__name__ = f"{getattr(k, 'label', 'k') or 'k'}^({n},{m})"
    return component
