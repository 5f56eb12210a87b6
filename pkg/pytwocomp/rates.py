"""
Rate families of the two-component dynamics and the kernels derived from them.

A :class:`RateSet` holds the rate callables of one generator family:

=============== ===================================== =====================================
kind            rates                                 kernels
=============== ===================================== =====================================
``birth_death`` ``d_plus, d_minus, b_plus, b_minus``  ``D+ D- B+ B-``
``hop_keep``    ``c1_plus, c1_minus``                 ``C1+ C1-``
``hop_flip``    ``c2_plus, c2_minus``                 ``C2+ C2-``
``flip``        ``a_plus, a_minus``                   ``A+ A-``
=============== ===================================== =====================================

One-point rates are called as ``rate(x, gamma)``, two-point rates as ``rate(x, y, gamma)``
where ``gamma`` is the configuration without the moving particle. For ``c2`` the points are
always (plus location, minus location). A kernel is called as ``kernel(x, y, shift, arg)`` and
equals the inverse K-transform in ``arg`` of ``rate(x[, y], arg + shift)``; ``y`` is ignored
by one-point kernels.
"""

import math
import logging

import numpy as np
import yaml
from scipy.special import gamma as gamma_function
from scipy.integrate import trapezoid

from pytwocomp.configuration import SUBSET_CAP
from pytwocomp.ktransform import k_inverse
from pytwocomp.util import InvalidRateParams, SettingsError, import_from_file

logger = logging.getLogger(__name__)

KINDS = {
    "birth_death": ("D+", "D-", "B+", "B-"),
    "hop_keep": ("C1+", "C1-"),
    "hop_flip": ("C2+", "C2-"),
    "flip": ("A+", "A-"),
}

RATE_NAMES = {
    "D+": "d_plus", "D-": "d_minus", "B+": "b_plus", "B-": "b_minus",
    "C1+": "c1_plus", "C1-": "c1_minus", "C2+": "c2_plus", "C2-": "c2_minus",
    "A+": "a_plus", "A-": "a_minus",
}

TWO_POINT_ROLES = ("C1+", "C1-", "C2+", "C2-")


def ball_volume(radius, dim):
    """Volume of the Euclidean ball."""
    return math.pi ** (dim / 2.0) * radius ** dim / gamma_function(dim / 2.0 + 1.0)


def free_displacement(x, y):
    return np.subtract(x, y)


class Profile(object):
    """
    A radial pair profile ``f(x - y)`` with its integral, supremum and interaction range.

    Parameters
    ----------
    fn : callable
        Maps a displacement (array of shape (d,)) to a float.
    integral : float
        Integral over R^d.
    sup : float
    radius : float, Optional, default = inf
        f vanishes beyond this distance.
    inf : float, Optional, default = 0.0
        Lower bound of f.
    label : str, Optional
    """

    def __init__(self, fn, integral, sup, radius=math.inf, inf=0.0, label="", beta=None):
        self.fn = fn
        self.integral = float(integral)
        self.sup = float(sup)
        self.radius = float(radius)
        self.inf = float(inf)
        self.label = label
        self.beta = beta

    def __call__(self, delta):
        return self.fn(delta)

    def __repr__(self):
        return f"Profile({self.label})"

    @classmethod
    def zero(cls):
        return cls(lambda delta: 0.0, 0.0, 0.0, 0.0, label="zero", beta=0.0)

    @classmethod
    def indicator(cls, height, radius, dim=1):
        """``height`` on the closed ball of the given radius, 0 outside."""
        height = float(height)
        radius = float(radius)
        volume = ball_volume(radius, dim)

        def fn(delta):
            return height if float(np.linalg.norm(delta)) <= radius else 0.0

        beta = abs(math.exp(-height) - 1.0) * volume
        return cls(fn, height * volume if math.isfinite(height) else math.inf, max(height, 0.0), radius,
                   min(height, 0.0), label=f"{height!r}*1[|r|<={radius!r}]", beta=beta)

    @classmethod
    def gaussian(cls, height, width, dim=1):
        """``height * exp(-|r|^2 / (2 width^2))``."""
        height = float(height)
        width = float(width)

        def fn(delta):
            return height * math.exp(-float(np.dot(delta, delta)) / (2.0 * width ** 2))

        return cls(fn, height * (2.0 * math.pi * width ** 2) ** (dim / 2.0), max(height, 0.0),
                   math.inf, min(height, 0.0), label=f"gauss({height!r},{width!r})")

    @classmethod
    def tabulated(cls, radii, values, dim=1):
        """Piecewise linear radial profile from a table, 0 beyond the last radius."""
        radii = np.asarray(radii, dtype=float)
        values = np.asarray(values, dtype=float)
        if radii.ndim != 1 or radii.shape != values.shape or len(radii) < 2 or np.any(np.diff(radii) <= 0):
            raise InvalidRateParams("A tabulated profile needs increasing radii and matching values.")
        surface = dim * ball_volume(1.0, dim)
        integral = trapezoid(values * surface * radii ** (dim - 1), radii)

        def fn(delta):
            return float(np.interp(np.linalg.norm(delta), radii, values, right=0.0))

        return cls(fn, integral, max(values.max(), 0.0), radii[-1], min(values.min(), 0.0), label="tabulated")


def make_profile(spec, dim=1):
    """
    Profile from a settings entry.

    ``{"kind": "indicator", "height": h, "radius": r}``, ``{"kind": "gaussian", "height": h,
    "width": w}``, ``{"kind": "tabulated", "radii": [...], "values": [...]}``, or a number for
    an indicator of radius 1.
    """
    if isinstance(spec, Profile):
        return spec
    if spec is None:
        raise InvalidRateParams("A pair profile is missing.")
    if isinstance(spec, (int, float)):
        return Profile.indicator(spec, 1.0, dim)
    spec = dict(spec)
    kind = spec.pop("kind", "indicator")
    try:
        if kind == "indicator":
            return Profile.indicator(spec.pop("height", 1.0), spec.pop("radius", 1.0), dim)
        if kind == "gaussian":
            return Profile.gaussian(spec.pop("height", 1.0), spec.pop("width", 1.0), dim)
        if kind == "tabulated":
            return Profile.tabulated(spec["radii"], spec["values"], dim)
    except KeyError as e:
        raise InvalidRateParams(f"Profile '{kind}' misses parameter {e}")
    raise InvalidRateParams(f"Unknown profile kind '{kind}'")


class KernelFn(object):
    """
    A kernel ``D, B, C1, C2`` or ``A`` (with a sign), evaluatable as ``kernel(x, y, shift, arg)``.

    Parameters
    ----------
    role : str
        One of ``D+ D- B+ B- C1+ C1- C2+ C2- A+ A-``.
    eval : callable
    provenance : str
        ``"numeric_Kinv"`` or ``"closed_form"``.
    label : str, Optional
    """

    def __init__(self, role, eval, provenance, label=""):
        self.role = role
        self.eval = eval
        self.provenance = provenance
        self.label = label or role

    def __call__(self, x, y, shift, arg):
        return self.eval(x, y, shift, arg)

    def __repr__(self):
        return f"KernelFn({self.role}, {self.provenance})"


class KernelFamily(object):
    """The kernels of one generator family, keyed by role. Missing roles are zero."""

    def __init__(self, kind, kernels, provenance):
        self.kind = kind
        self.kernels = dict(kernels)
        self.provenance = provenance

    def get(self, role):
        return self.kernels.get(role)

    def __getitem__(self, role):
        return self.kernels[role]

    def __contains__(self, role):
        return role in self.kernels

    def __repr__(self):
        return f"KernelFamily({self.kind}, {sorted(self.kernels)}, {self.provenance})"


class RateSet(object):
    """
    The rates of one generator family.

    Parameters
    ----------
    kind : str
        ``birth_death``, ``hop_keep``, ``hop_flip`` or ``flip``.
    label : str, Optional
    closed_forms : dict or None, Optional
        Closed-form kernel callables keyed by role.
    bounds : dict or None, Optional
        Thinning bounds keyed by role: ``bound(gamma)`` is an upper bound of the rate over all
        spatial arguments, for any particle of the full configuration ``gamma``.
    radius : float, Optional, default = 0.0
        Interaction range; spatial integrals need this much padding around the region.
    n_function : callable or None, Optional
        Analytic bound ``n_function(eta, C)`` of the kernel norms.
    **rates : callable
        Rate callables by name (``d_plus``, ``b_minus``, ``c1_plus``, ...). Absent rates are zero.

    Raises
    ------
    InvalidRateParams
        For unknown kinds or rates that do not belong to the kind.
    """

    def __init__(self, kind, label="", closed_forms=None, bounds=None, radius=0.0, n_function=None, **rates):
        if kind not in KINDS:
            raise InvalidRateParams(f"Unknown generator kind '{kind}', choose from {sorted(KINDS)}")
        allowed = {RATE_NAMES[role] for role in KINDS[kind]}
        unknown = set(rates) - allowed
        if unknown:
            raise InvalidRateParams(f"Rates {sorted(unknown)} do not belong to kind '{kind}'")
        self.kind = kind
        self.label = label or kind
        self.rates = {name: rate for name, rate in rates.items() if rate is not None}
        self.closed_forms = dict(closed_forms or {})
        self.bounds = dict(bounds or {})
        self.radius = float(radius)
        self.n_function = n_function
        self.params = {}

    def __repr__(self):
        return f"RateSet({self.kind}, {self.label})"

    @property
    def roles(self):
        """Roles with a nonzero rate."""
        return tuple(role for role in KINDS[self.kind] if RATE_NAMES[role] in self.rates)

    def rate(self, role):
        """The rate callable for a kernel role, or None."""
        return self.rates.get(RATE_NAMES[role])

    def call(self, role, x, y, gamma):
        """Evaluate the rate of a role with the argument convention of its arity."""
        rate = self.rate(role)
        if rate is None:
            return 0.0
        if role in TWO_POINT_ROLES:
            return rate(x, y, gamma)
        return rate(x, gamma)

    def bound(self, role, gamma):
        """Thinning bound for a role at the configuration gamma."""
        if self.rate(role) is None:
            return 0.0
        try:
            bound = self.bounds[role]
        except KeyError:
            raise InvalidRateParams(f"Rate set '{self.label}' declares no thinning bound for {role}")
        return float(bound(gamma)) if callable(bound) else float(bound)

    def kernels(self, prefer="closed_form", cap=SUBSET_CAP):
        """
        The kernel family, closed-form where available (``prefer='closed_form'``), otherwise
        numeric inverse K-transforms.
        """
        numeric = numeric_family(self, cap)
        if prefer != "closed_form" or not self.closed_forms:
            return numeric
        kernels = dict(numeric.kernels)
        for role, closed in self.closed_forms.items():
            if role in kernels:
                kernels[role] = KernelFn(role, closed, "closed_form", f"{self.label}:{role}")
        provenance = "closed_form" if all(k.provenance == "closed_form" for k in kernels.values()) else "mixed"
        return KernelFamily(self.kind, kernels, provenance)


def derive_kernel_numeric(rate, role, x, y, xi, eta, cap=SUBSET_CAP):
    """
    Kernel value by exhaustive signed subset sum.

    ``(K^-1 rate(x[, y], . + xi))(eta)``

    Parameters
    ----------
    rate : callable
        One-point ``rate(x, gamma)`` or, for the roles ``C1+- C2+-``, two-point ``rate(x, y, gamma)``.
    role : str
    x : point
    y : point or None
    xi : TwoConfig
        The fixed part (shift).
    eta : TwoConfig
        The argument of the inverse transform.
    cap : int, Optional, default = SUBSET_CAP

    Returns
    -------
    value : float

    Raises
    ------
    CapExceeded
    """
    if role in TWO_POINT_ROLES:
        return k_inverse(lambda zeta: rate(x, y, zeta.union(xi)), eta, cap)
    return k_inverse(lambda zeta: rate(x, zeta.union(xi)), eta, cap)


def numeric_family(rates, cap=SUBSET_CAP):
    """Kernel family of a rate set from :func:`derive_kernel_numeric`."""
    kernels = {}
    for role in rates.roles:
        rate = rates.rate(role)

        def eval(x, y, shift, arg, rate=rate, role=role):
            return derive_kernel_numeric(rate, role, x, y, shift, arg, cap)

        kernels[role] = KernelFn(role, eval, "numeric_Kinv", f"{rates.label}:{role}")
    return KernelFamily(rates.kind, kernels, "numeric_Kinv")


def _check_nonnegative(**params):
    for name, value in params.items():
        if value is None:
            raise InvalidRateParams(f"Parameter '{name}' is required.")
        if not value >= 0:
            raise InvalidRateParams(f"Parameter '{name}' must be nonnegative, got {value}")


def _displacement(torus):
    return torus.periodic_displacement if torus is not None else free_displacement


def constant_rates(m_plus=1.0, m_minus=1.0, z_plus=0.0, z_minus=0.0, dim=1, torus=None):
    """
    Constant death rates ``m+-`` and constant birth intensities ``z+-``.

    Kernels: ``D+- = m+- [arg empty]``, ``B+- = z+- [arg empty]``.
    """
    _check_nonnegative(m_plus=m_plus, m_minus=m_minus, z_plus=z_plus, z_minus=z_minus)
    m_plus, m_minus, z_plus, z_minus = float(m_plus), float(m_minus), float(z_plus), float(z_minus)

    def constant_kernel(value):
        def kernel(x, y, shift, arg):
            return 0.0 if arg else value
        return kernel

    def n_function(eta, C):
        n, m = eta.size
        return m_plus * n + m_minus * m + (z_plus * n + z_minus * m) / C

    rates = RateSet(
        "birth_death", label="constant",
        d_plus=(lambda x, gamma: m_plus) if m_plus else None,
        d_minus=(lambda y, gamma: m_minus) if m_minus else None,
        b_plus=(lambda x, gamma: z_plus) if z_plus else None,
        b_minus=(lambda y, gamma: z_minus) if z_minus else None,
        closed_forms={"D+": constant_kernel(m_plus), "D-": constant_kernel(m_minus),
                      "B+": constant_kernel(z_plus), "B-": constant_kernel(z_minus)},
        bounds={"B+": z_plus, "B-": z_minus},
        n_function=n_function,
    )
    rates.params = dict(m_plus=m_plus, m_minus=m_minus, z_plus=z_plus, z_minus=z_minus)
    return rates


def kernel_pp(m_plus, m_minus, kappa, a1, a2, a3, a4, displacement=free_displacement):
    """
    Closed-form kernels of the predator-prey rates.

    Prey (plus) die at rate ``m+ + sum over predators y of a1(x - y)``, predators die at rate
    ``m-``, prey reproduce at rate ``sum over prey x' of a2(x - x')`` and predators at rate
    ``sum over predators y' of a3(y - y') (kappa + sum over prey x of a4(x - y'))``.

    Returns
    -------
    closed_forms : dict
        Kernel callables keyed by role.

    Raises
    ------
    InvalidRateParams
        If a rate constant is negative or a profile is missing.
    """
    _check_nonnegative(m_plus=m_plus, m_minus=m_minus, kappa=kappa)
    for name, profile in (("a1", a1), ("a2", a2), ("a3", a3), ("a4", a4)):
        if profile is None:
            raise InvalidRateParams(f"Predator-prey rates need the profile '{name}'.")

    def D_plus(x, y, shift, arg):
        if arg.plus:
            return 0.0
        if not arg.minus:
            return m_plus + math.fsum(a1(displacement(x, v)) for v in shift.minus)
        if len(arg.minus) == 1:
            return a1(displacement(x, arg.minus.points[0]))
        return 0.0

    def D_minus(x, y, shift, arg):
        return 0.0 if arg else m_minus

    def B_plus(x, y, shift, arg):
        if arg.minus:
            return 0.0
        if not arg.plus:
            return math.fsum(a2(displacement(x, v)) for v in shift.plus)
        if len(arg.plus) == 1:
            return a2(displacement(x, arg.plus.points[0]))
        return 0.0

    def B_minus(x, y, shift, arg):
        n, m = arg.size
        if n > 1 or m > 1:
            return 0.0
        if m == 0:
            partners = shift.minus.points
        else:
            partners = arg.minus.points
        if n == 0:
            def factor(v):
                return kappa + math.fsum(a4(displacement(u, v)) for u in shift.plus)
        else:
            prey = arg.plus.points[0]

            def factor(v):
                return a4(displacement(prey, v))
        return math.fsum(a3(displacement(x, v)) * factor(v) for v in partners)

    return {"D+": D_plus, "D-": D_minus, "B+": B_plus, "B-": B_minus}


def predator_prey_rates(m_plus=1.0, m_minus=1.0, kappa=1.0, a1=None, a2=None, a3=None, a4=None,
                        dim=1, torus=None):
    """
    Predator-prey birth-and-death rates (prey: plus, predators: minus), without competition.

    Profiles default to indicators of radius 1 with heights 0.5 (``a1``), 0.2 (``a2``),
    0.3 (``a3``) and 0.4 (``a4``).
    """
    a1 = make_profile(a1 if a1 is not None else {"height": 0.5}, dim)
    a2 = make_profile(a2 if a2 is not None else {"height": 0.2}, dim)
    a3 = make_profile(a3 if a3 is not None else {"height": 0.3}, dim)
    a4 = make_profile(a4 if a4 is not None else {"height": 0.4}, dim)
    m_plus, m_minus, kappa = float(m_plus), float(m_minus), float(kappa)
    displacement = _displacement(torus)
    closed = kernel_pp(m_plus, m_minus, kappa, a1, a2, a3, a4, displacement)

    def d_plus(x, gamma):
        return m_plus + math.fsum(a1(displacement(x, v)) for v in gamma.minus)

    def d_minus(y, gamma):
        return m_minus

    def b_plus(x, gamma):
        return math.fsum(a2(displacement(x, v)) for v in gamma.plus)

    def b_minus(y, gamma):
        return math.fsum(a3(displacement(y, v)) * (kappa + math.fsum(a4(displacement(u, v)) for u in gamma.plus))
                         for v in gamma.minus)

    def n_function(eta, C):
        total = 0.0
        for x in eta.plus:
            total += m_plus + math.fsum(a1(free_displacement(x, v)) for v in eta.minus) + C * a1.integral
            total += (math.fsum(a2(free_displacement(x, v)) for v in eta.plus if v != x) + C * a2.integral) / C
        for y in eta.minus:
            total += m_minus
            others = [v for v in eta.minus if v != y]
            zero_order = math.fsum(a3(free_displacement(y, v)) * (kappa + math.fsum(
                a4(free_displacement(u, v)) for u in eta.plus)) for v in others)
            one_prey = C * math.fsum(a3(free_displacement(y, v)) for v in others) * a4.integral
            one_predator = C * (kappa * a3.integral + len(eta.plus) * a3.sup * a4.integral)
            pair = C ** 2 * a3.integral * a4.integral
            total += (zero_order + one_prey + one_predator + pair) / C
        return total

    rates = RateSet(
        "birth_death", label="pp",
        d_plus=d_plus, d_minus=d_minus, b_plus=b_plus, b_minus=b_minus,
        closed_forms=closed,
        bounds={"B+": lambda gamma: a2.sup * len(gamma.plus),
                "B-": lambda gamma: a3.sup * len(gamma.minus) * (kappa + a4.sup * len(gamma.plus))},
        radius=max(a1.radius, a2.radius, a3.radius, a4.radius),
        n_function=n_function,
    )
    rates.params = dict(m_plus=m_plus, m_minus=m_minus, kappa=kappa, a1=a1.label, a2=a2.label, a3=a3.label,
                        a4=a4.label)
    return rates


def kernel_ising(phi, m_plus, m_minus, displacement=free_displacement):
    """
    Closed-form kernels of the continuous Ising birth-and-death rates.

    ``B+(x, shift, arg) = [arg+ empty] exp(-sum over y in shift- of phi(x - y))
    prod over y in arg- of (exp(-phi(x - y)) - 1)``, symmetrically for ``B-``; the death
    kernels are ``m+- [arg empty]``.

    Raises
    ------
    InvalidRateParams
        If a death rate is negative or the potential is missing.
    """
    _check_nonnegative(m_plus=m_plus, m_minus=m_minus)
    if phi is None:
        raise InvalidRateParams("Ising rates need a pair potential 'phi'.")

    def mayer(x, v):
        return math.exp(-phi(displacement(x, v))) - 1.0

    def birth_kernel(own, other):
        def kernel(x, y, shift, arg):
            if getattr(arg, own):
                return 0.0
            value = math.exp(-math.fsum(phi(displacement(x, v)) for v in getattr(shift, other)))
            for v in getattr(arg, other):
                value *= mayer(x, v)
            return value
        return kernel

    def death_kernel(value):
        def kernel(x, y, shift, arg):
            return 0.0 if arg else value
        return kernel

    return {"D+": death_kernel(m_plus), "D-": death_kernel(m_minus),
            "B+": birth_kernel("plus", "minus"), "B-": birth_kernel("minus", "plus")}


def ising_rates(m_plus=1.0, m_minus=1.0, phi=None, dim=1, torus=None):
    """
    Continuous Ising (Glauber-type) rates: constant deaths, births
    ``b+-(x, gamma) = exp(-sum over y in gamma-+ of phi(x - y))``.

    The potential defaults to the indicator of the unit ball with height 1.
    """
    phi = make_profile(phi if phi is not None else {"height": 1.0}, dim)
    m_plus, m_minus = float(m_plus), float(m_minus)
    displacement = _displacement(torus)
    closed = kernel_ising(phi, m_plus, m_minus, displacement)
    upsilon = max(0.0, -phi.inf)
    beta = phi.beta
    if beta is None:
        raise InvalidRateParams("The Ising potential needs a known integral of |exp(-phi) - 1|.")

    def birth(other):
        def rate(x, gamma):
            return math.exp(-math.fsum(phi(displacement(x, v)) for v in getattr(gamma, other)))
        return rate

    def n_function(eta, C):
        n, m = eta.size
        return (m_plus * n + m_minus * m
                + (n * math.exp(upsilon * m) + m * math.exp(upsilon * n)) * math.exp(C * beta) / C)

    rates = RateSet(
        "birth_death", label="ising",
        d_plus=(lambda x, gamma: m_plus) if m_plus else None,
        d_minus=(lambda y, gamma: m_minus) if m_minus else None,
        b_plus=birth("minus"), b_minus=birth("plus"),
        closed_forms=closed,
        bounds={"B+": lambda gamma: math.exp(upsilon * len(gamma.minus)),
                "B-": lambda gamma: math.exp(upsilon * len(gamma.plus))},
        radius=phi.radius,
        n_function=n_function,
    )
    rates.params = dict(m_plus=m_plus, m_minus=m_minus, phi=phi.label, upsilon=upsilon, beta=beta)
    return rates


def hop_rates(a_plus=None, a_minus=None, phi=None, dim=1, torus=None):
    """
    Kawasaki-type hopping keeping the mark: a particle at x jumps to x' at rate
    ``a(x - x') exp(-sum over particles v of the other type of phi(x' - v))``.

    Kernels: ``C1+(x, x', shift, arg) = [arg+ empty] a+(x - x') exp(-sum over shift- of phi(x' - v))
    prod over arg- of (exp(-phi(x' - v)) - 1)``, symmetrically for ``C1-``.
    """
    a_plus = make_profile(a_plus if a_plus is not None else {"height": 1.0}, dim)
    a_minus = make_profile(a_minus if a_minus is not None else {"height": 1.0}, dim)
    phi = make_profile(phi if phi is not None else {"height": 0.5}, dim)
    displacement = _displacement(torus)
    upsilon = max(0.0, -phi.inf)

    def rate(jump, other):
        def c1(x, target, gamma):
            return jump(displacement(x, target)) * math.exp(
                -math.fsum(phi(displacement(target, v)) for v in getattr(gamma, other)))
        return c1

    def kernel(jump, own, other):
        def C1(x, target, shift, arg):
            if getattr(arg, own):
                return 0.0
            value = jump(displacement(x, target)) * math.exp(
                -math.fsum(phi(displacement(target, v)) for v in getattr(shift, other)))
            for v in getattr(arg, other):
                value *= math.exp(-phi(displacement(target, v))) - 1.0
            return value
        return C1

    rates = RateSet(
        "hop_keep", label="hop",
        c1_plus=rate(a_plus, "minus"), c1_minus=rate(a_minus, "plus"),
        closed_forms={"C1+": kernel(a_plus, "plus", "minus"), "C1-": kernel(a_minus, "minus", "plus")},
        bounds={"C1+": lambda gamma: a_plus.sup * math.exp(upsilon * len(gamma.minus)),
                "C1-": lambda gamma: a_minus.sup * math.exp(upsilon * len(gamma.plus))},
        radius=max(a_plus.radius, a_minus.radius) + phi.radius,
    )
    rates.params = dict(a_plus=a_plus.label, a_minus=a_minus.label, phi=phi.label)
    return rates


def hopflip_rates(a=None, b=None, kappa_plus=1.0, kappa_minus=1.0, dim=1, torus=None):
    """
    Hopping with change of mark, linear in the configuration.

    A plus particle at x becomes a minus particle at y at rate
    ``a(x - y) (kappa+ + sum over minus v of b(y - v))``; a minus particle at y becomes a plus
    particle at x at rate ``a(x - y) (kappa- + sum over plus v of b(x - v))``.
    """
    a = make_profile(a if a is not None else {"height": 1.0}, dim)
    b = make_profile(b if b is not None else {"height": 0.5}, dim)
    _check_nonnegative(kappa_plus=kappa_plus, kappa_minus=kappa_minus)
    kappa_plus, kappa_minus = float(kappa_plus), float(kappa_minus)
    displacement = _displacement(torus)

    def c2_plus(x, y, gamma):
        return a(displacement(x, y)) * (kappa_plus + math.fsum(b(displacement(y, v)) for v in gamma.minus))

    def c2_minus(x, y, gamma):
        return a(displacement(x, y)) * (kappa_minus + math.fsum(b(displacement(x, v)) for v in gamma.plus))

    def C2_plus(x, y, shift, arg):
        if arg.plus or len(arg.minus) > 1:
            return 0.0
        if not arg.minus:
            return c2_plus(x, y, shift)
        return a(displacement(x, y)) * b(displacement(y, arg.minus.points[0]))

    def C2_minus(x, y, shift, arg):
        if arg.minus or len(arg.plus) > 1:
            return 0.0
        if not arg.plus:
            return c2_minus(x, y, shift)
        return a(displacement(x, y)) * b(displacement(x, arg.plus.points[0]))

    rates = RateSet(
        "hop_flip", label="hopflip",
        c2_plus=c2_plus, c2_minus=c2_minus,
        closed_forms={"C2+": C2_plus, "C2-": C2_minus},
        bounds={"C2+": lambda gamma: a.sup * (kappa_plus + b.sup * len(gamma.minus)),
                "C2-": lambda gamma: a.sup * (kappa_minus + b.sup * len(gamma.plus))},
        radius=a.radius + b.radius,
    )
    rates.params = dict(a=a.label, b=b.label, kappa_plus=kappa_plus, kappa_minus=kappa_minus)
    return rates


def flip_rates(kappa_plus=1.0, kappa_minus=1.0, a=None, dim=1, torus=None):
    """
    Mark flips in place, linear in the configuration: a plus particle at x turns minus at rate
    ``kappa+ + sum over minus v of a(x - v)``, a minus particle at y turns plus at rate
    ``kappa- + sum over plus v of a(y - v)``.

    With ``a`` omitted the flip rates are the constants ``kappa+-``.
    """
    _check_nonnegative(kappa_plus=kappa_plus, kappa_minus=kappa_minus)
    kappa_plus, kappa_minus = float(kappa_plus), float(kappa_minus)
    a = make_profile(a, dim) if a is not None else Profile.zero()
    displacement = _displacement(torus)

    def rate(kappa, other):
        def flip(x, gamma):
            return kappa + math.fsum(a(displacement(x, v)) for v in getattr(gamma, other))
        return flip

    def kernel(kappa, own, other):
        def A(x, y, shift, arg):
            if getattr(arg, own) or len(getattr(arg, other)) > 1:
                return 0.0
            partners = getattr(arg, other).points
            if not partners:
                return kappa + math.fsum(a(displacement(x, v)) for v in getattr(shift, other))
            return a(displacement(x, partners[0]))
        return A

    rates = RateSet(
        "flip", label="flip",
        a_plus=rate(kappa_plus, "minus"), a_minus=rate(kappa_minus, "plus"),
        closed_forms={"A+": kernel(kappa_plus, "plus", "minus"), "A-": kernel(kappa_minus, "minus", "plus")},
        radius=a.radius,
    )
    rates.params = dict(kappa_plus=kappa_plus, kappa_minus=kappa_minus, a=a.label)
    return rates


def hopping_rates(dim=1, torus=None, hop=None, hopflip=None):
    """Both hopping families together, a list of two rate sets."""
    return [hop_rates(dim=dim, torus=torus, **(hop or {})), hopflip_rates(dim=dim, torus=torus, **(hopflip or {}))]


SUITES = {
    "constant": constant_rates,
    "pp": predator_prey_rates,
    "ising": ising_rates,
    "hop": hop_rates,
    "hopflip": hopflip_rates,
    "flip": flip_rates,
    "hopping": hopping_rates,
}

STANDARD_SUITES = ("constant", "pp", "ising", "hop", "hopflip", "flip", "hopping")


def as_rate_list(rates):
    """A rate set or a sequence of rate sets as a list."""
    if isinstance(rates, RateSet):
        return [rates]
    return list(rates)


def make_rates(name, params=None, dim=1, torus=None):
    """
    A named rate suite.

    Parameters
    ----------
    name : str
        One of :data:`SUITES`.
    params : dict or None, Optional
    dim : int, Optional, default = 1
    torus : Region or None, Optional
        If given, pair profiles use periodic displacements on this box.

    Returns
    -------
    rates : RateSet or list of RateSet

    Raises
    ------
    InvalidRateParams
    """
    if name not in SUITES:
        raise InvalidRateParams(f"Unknown rate suite '{name}', choose from {sorted(SUITES)}")
    try:
        return SUITES[name](dim=dim, torus=torus, **(params or {}))
    except TypeError as e:
        raise InvalidRateParams(f"Invalid parameters for rate suite '{name}': {e}")


def load_rates(spec, dim=1, torus=None):
    """
    Rates from a settings entry: a suite name, a block ``{"name": ..., "params": {...}}``, or
    the path of a yml/json file holding such a block under ``rates`` or of a python file
    defining ``make_rates(dim, torus, **params)``.

    Raises
    ------
    SettingsError
        If the file cannot be used.
    """
    if isinstance(spec, (RateSet, list)):
        return spec
    params = {}
    if isinstance(spec, dict):
        params = spec.get("params") or {}
        spec = spec.get("name") or spec.get("file")
    if spec is None:
        raise SettingsError("No rates given.")
    spec = str(spec)
    if spec in SUITES:
        return make_rates(spec, params, dim, torus)
    if spec.endswith(".py"):
        module = import_from_file(spec)
        if not hasattr(module, "make_rates"):
            raise SettingsError(f"Rate file {spec} defines no function make_rates.")
        logger.debug(f"Rates from python file {spec}")
        return module.make_rates(dim=dim, torus=torus, **params)
    if spec.endswith((".yml", ".yaml", ".json")):
        try:
            with open(spec, "r") as f:
                content = yaml.load(f, Loader=yaml.SafeLoader) or {}
        except OSError as e:
            raise SettingsError(f"Cannot read rate file {spec}: {e}")
        block = content.get("rates", content)
        merged = dict(block.get("params") or {})
        merged.update(params)
        logger.debug(f"Rates from settings file {spec}")
        return make_rates(block.get("name"), merged, dim, torus)
    raise SettingsError(f"Unknown rate suite or file '{spec}'")
