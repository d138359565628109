"""Spectral asymptotics of hypoelliptic operators on Heisenberg manifolds.

Modules
-------
group   nilpotent tangent groups, dilations, privileged coordinates
hypo    Rockland-type and form-degree hypoellipticity conditions
mehler  heat kernel of the Folland-Stein sublaplacian and nu(mu)
weyl    Weyl coefficients, CR volumes, Karamata inversion
oracle  Mellin matrix powers, synthetic spectra, nilmanifold eigensolver
cli     command-line front end
"""
__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .errors import *  # noqa: E402,F401,F403
from .group import GroupSpec, Point, dilate, group_mul, pseudo_norm  # noqa: E402
from .hypo import LeviData, SublaplacianModel, rockland_sublaplacian, weaker_condition  # noqa: E402
from .mehler import HeatQuery, KernelValue, heat_kernel, nu, total_mass  # noqa: E402
from .oracle import Spectrum, counting_function, heat_trace, mellin_power  # noqa: E402
from .weyl import AsymptoticModel, alpha, beta, gamma, predict  # noqa: E402
