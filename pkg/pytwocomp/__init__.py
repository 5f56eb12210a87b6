"""
pytwocomp
Harmonic analysis of two-component continuum particle systems.
"""

__version__ = "0.1.0"

# Add imports here
from pytwocomp.util import TwoCompException
from pytwocomp.configuration import FiniteConfig, TwoConfig, Region, ConfigFunction, CorrelationFunction, two_config
from pytwocomp.ktransform import k_transform, k_inverse, star_convolution
from pytwocomp.lpmeasure import LPIntegrator, Estimate, lp_integrate, pairing
from pytwocomp.rates import RateSet, make_rates
from pytwocomp.generators import apply_L, apply_Lhat, apply_Lhat_star, duality_check
from pytwocomp.hierarchy import evolve_truncated
from pytwocomp.gillespie import SimConfig, simulate
from pytwocomp.rundir import RunDir
