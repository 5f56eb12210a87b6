"""
Truncated hierarchical evolution on a grid.

The components ``G^(n,m)`` (or ``k^(n,m)``) for ``n <= N+``, ``m <= N-`` are discretized at the
configurations of distinct grid nodes of the integrator's region (midpoints of a uniform grid,
one configuration per unordered choice of plus and minus nodes). The hierarchical generator
becomes a sparse matrix acting on the stacked components; couplings to configurations above
the truncation orders are dropped. The correlation side uses the adjoint of that matrix with
respect to the discretized pairing, so the discrete duality
``<<G_t, k_0>> = <<G_0, k_t>>`` holds to rounding.
"""

import csv
import logging
import itertools

import numpy as np
from scipy import sparse

from pytwocomp.configuration import SUBSET_CAP, FiniteConfig, TwoConfig, two_subsets
from pytwocomp.generators import kernel_families
from pytwocomp.util import StepSizeRejected

logger = logging.getLogger(__name__)

SIDES = ("quasi_observable", "correlation")

MAX_GROWTH = 10.0
"""Largest accepted growth of the state norm in one time step."""


class GridStates(object):
    """
    The discretized configurations up to given orders.

    Parameters
    ----------
    region : Region
    orders : (int, int)
    points_per_axis : int
    """

    def __init__(self, region, orders, points_per_axis):
        nodes, cell = region.grid(points_per_axis)
        self.region = region
        self.orders = tuple(orders)
        self.nodes = [tuple(float(c) for c in node) for node in nodes]
        self.cell = float(cell)
        self.configs = []
        self.sizes = []
        count = len(self.nodes)
        for m in range(self.orders[1] + 1):
            for n in range(self.orders[0] + 1):
                if n + m > count:
                    continue
                for plus in itertools.combinations(range(count), n):
                    free = [i for i in range(count) if i not in plus]
                    for minus in itertools.combinations(free, m):
                        self.configs.append(TwoConfig(FiniteConfig([self.nodes[i] for i in plus]),
                                                      FiniteConfig([self.nodes[i] for i in minus])))
                        self.sizes.append((n, m))
        self.index = {config: s for s, config in enumerate(self.configs)}
        self.weights = np.array([self.cell ** (n + m) for n, m in self.sizes])

    def __len__(self):
        return len(self.configs)

    def evaluate(self, function):
        return np.array([function(config) for config in self.configs], dtype=float)

    def pairing(self, g, k):
        """Discretized Lebesgue-Poisson pairing of two stacked state vectors."""
        return float(np.dot(self.weights, np.asarray(g) * np.asarray(k)))


def _add(entries, row, target, index, value):
    if not value:
        return
    column = index.get(target)
    if column is not None:
        entries.append((row, column, value))


def hierarchy_matrix(families, states, cap=SUBSET_CAP):
    """
    Sparse matrix of the truncated hierarchical generator on the grid states:
    ``(L^ G)(eta_s) ~ sum over s' of M[s, s'] G(eta_s')``, spatial integrals as sums over the
    free grid nodes.

    Parameters
    ----------
    families : list of KernelFamily
    states : GridStates
    cap : int, Optional, default = SUBSET_CAP

    Returns
    -------
    matrix : scipy.sparse.csr_matrix
    """
    entries = []
    index = states.index
    cell = states.cell
    for row, eta in enumerate(states.configs):
        free = [u for u in states.nodes if u not in eta]
        for xi, rest in two_subsets(eta, cap):
            for family in families:
                get = family.get
                if family.kind == "birth_death":
                    for role, own, add in (("D+", "plus", None), ("D-", "minus", None),
                                           ("B+", None, "add_plus"), ("B-", None, "add_minus")):
                        kernel = get(role)
                        if kernel is None:
                            continue
                        if own is not None:
                            for x in getattr(xi, own):
                                shift = xi.remove_plus(x) if own == "plus" else xi.remove_minus(x)
                                _add(entries, row, xi, index, -kernel(x, None, shift, rest))
                        else:
                            for u in free:
                                _add(entries, row, getattr(xi, add)(u), index, cell * kernel(u, None, xi, rest))
                elif family.kind == "hop_keep":
                    for role, own in (("C1+", "plus"), ("C1-", "minus")):
                        kernel = get(role)
                        if kernel is None:
                            continue
                        for x in getattr(xi, own):
                            shift = xi.remove_plus(x) if own == "plus" else xi.remove_minus(x)
                            for u in free:
                                value = cell * kernel(x, u, shift, rest)
                                moved = shift.add_plus(u) if own == "plus" else shift.add_minus(u)
                                _add(entries, row, moved, index, value)
                                _add(entries, row, xi, index, -value)
                elif family.kind == "hop_flip":
                    C2_plus, C2_minus = get("C2+"), get("C2-")
                    if C2_plus is not None:
                        for x in xi.plus:
                            shift = xi.remove_plus(x)
                            for u in free:
                                value = cell * C2_plus(x, u, shift, rest)
                                _add(entries, row, shift.add_minus(u), index, value)
                                _add(entries, row, xi, index, -value)
                    if C2_minus is not None:
                        for y in xi.minus:
                            shift = xi.remove_minus(y)
                            for u in free:
                                value = cell * C2_minus(u, y, shift, rest)
                                _add(entries, row, shift.add_plus(u), index, value)
                                _add(entries, row, xi, index, -value)
                elif family.kind == "flip":
                    A_plus, A_minus = get("A+"), get("A-")
                    if A_plus is not None:
                        for x in xi.plus:
                            value = A_plus(x, None, xi.remove_plus(x), rest)
                            _add(entries, row, xi.flip_plus(x), index, value)
                            _add(entries, row, xi, index, -value)
                    if A_minus is not None:
                        for y in xi.minus:
                            value = A_minus(y, None, xi.remove_minus(y), rest)
                            _add(entries, row, xi.flip_minus(y), index, value)
                            _add(entries, row, xi, index, -value)
    size = len(states)
    if not entries:
        return sparse.csr_matrix((size, size))
    rows, columns, values = zip(*entries)
    return sparse.coo_matrix((values, (rows, columns)), shape=(size, size)).tocsr()


def rk4_step(operator, state, dt):
    """One classical Runge-Kutta step of ``d state / dt = operator @ state``."""
    k1 = operator @ state
    k2 = operator @ (state + 0.5 * dt * k1)
    k3 = operator @ (state + 0.5 * dt * k2)
    k4 = operator @ (state + dt * k3)
    return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class HierarchySeries(object):
    """
    Stacked components of the truncated evolution at the recorded times.

    Attributes
    ----------
    times : ndarray of shape (T,)
    values : ndarray of shape (T, S)
    states : GridStates
    side : str
    """

    def __init__(self, times, values, states, side):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.states = states
        self.side = side

    def __len__(self):
        return len(self.times)

    def component(self, n, m, index=-1):
        """Configurations and values of the component ``(n, m)`` at a recorded time."""
        rows = [s for s, size in enumerate(self.states.sizes) if size == (n, m)]
        return [self.states.configs[s] for s in rows], self.values[index, rows]

    def spatial_mean(self, n, m):
        """Average of the component ``(n, m)`` over its grid configurations, per recorded time."""
        rows = [s for s, size in enumerate(self.states.sizes) if size == (n, m)]
        if not rows:
            raise ValueError(f"Component ({n},{m}) lies above the truncation orders {self.states.orders}")
        return self.values[:, rows].mean(axis=1)

    def expected_counts(self):
        """
        For the correlation side, the expected numbers of plus and minus particles in the region,
        the integrals of ``k^(1,0)`` and ``k^(0,1)``, per recorded time.
        """
        counts = []
        for size in ((1, 0), (0, 1)):
            rows = [s for s, other in enumerate(self.states.sizes) if other == size]
            counts.append(self.values[:, rows].sum(axis=1) * self.states.cell)
        return counts[0], counts[1]

    def pairing(self, other):
        """Discretized pairing with a function, or with a state vector on the same grid, per recorded time."""
        if callable(other):
            other = self.states.evaluate(other)
        return np.array([self.states.pairing(row, other) for row in self.values])

    def to_csv(self, path):
        """Write the spatial means of all components: columns time, n_plus, n_minus, mean."""
        pairs = sorted(set(self.states.sizes), key=lambda size: (size[0] + size[1], size))
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["time", "n_plus", "n_minus", "mean"])
            for n, m in pairs:
                for t, value in zip(self.times, self.spatial_mean(n, m)):
                    writer.writerow([repr(float(t)), n, m, repr(float(value))])


def _record_steps(t_end, dt, times):
    steps = int(round(t_end / dt))
    if times is None:
        times = np.linspace(0.0, t_end, 11)
    record = sorted({min(steps, max(0, int(round(t / dt)))) for t in times})
    return steps, record


def evolve_truncated(rates, initial, side, t_end, dt, I, grid_points=32, times=None, kernels=None,
                     prefer="closed_form", cap=SUBSET_CAP):
    """
    Evolve a quasi-observable (``dG/dt = L^ G``) or a correlation function (``dk/dt = L^* k``)
    on the truncated hierarchy with classical Runge-Kutta steps.

    Parameters
    ----------
    rates : RateSet or list of RateSet
    initial : ConfigFunction or CorrelationFunction
        Evaluated at the grid configurations.
    side : str
        ``"quasi_observable"`` or ``"correlation"``.
    t_end : float
    dt : float
    I : LPIntegrator
        Provides the region and the truncation orders.
    grid_points : int, Optional, default = 32
        Grid nodes per axis.
    times : sequence of float or None, Optional
        Times to record, rounded to whole steps. Defaults to eleven equally spaced times.
    kernels : KernelFamily or list or None, Optional
    prefer : str, Optional, default = "closed_form"

    Returns
    -------
    series : HierarchySeries

    Raises
    ------
    StepSizeRejected
        If the state norm grows by more than a factor of ten in one step.
    """
    if side not in SIDES:
        raise ValueError(f"Unknown side '{side}', choose from {SIDES}")
    if not dt > 0 or not t_end > 0:
        raise ValueError("Time step and final time must be positive.")
    families = kernel_families(rates, kernels, prefer, cap)
    states = GridStates(I.region, I.orders, grid_points)
    matrix = hierarchy_matrix(families, states, cap)
    if side == "correlation":
        operator = sparse.diags(1.0 / states.weights) @ matrix.T @ sparse.diags(states.weights)
    else:
        operator = matrix
    operator = sparse.csr_matrix(operator)
    logger.info(f"Truncated hierarchy ({side}): {len(states)} grid states, {operator.nnz} couplings, "
                f"orders {I.orders}")
    state = states.evaluate(initial)
    steps, record = _record_steps(t_end, dt, times)
    recorded_times = []
    values = []
    if 0 in record:
        recorded_times.append(0.0)
        values.append(state.copy())
    for step in range(1, steps + 1):
        new = rk4_step(operator, state, dt)
        before = np.max(np.abs(state)) if len(state) else 0.0
        after = np.max(np.abs(new)) if len(new) else 0.0
        if not np.all(np.isfinite(new)) or (before > 0 and after > MAX_GROWTH * before):
            raise StepSizeRejected(f"State norm grew from {before!r} to {after!r} in step {step} at dt={dt!r}")
        state = new
        if step in record:
            recorded_times.append(step * dt)
            values.append(state.copy())
    return HierarchySeries(recorded_times, values, states, side)
