"""Trapped modes of an elastic plate with a weak radial stiffness perturbation.

Modules, bottom up:

* ``profiles``, ``numerics``: radial profiles, their moments, quadrature and
  extended-precision summation
* ``band``: dispersion branches of the cross-section operator and the
  band minimum (kappa, Lambda, q)
* ``fd_oracle``: independent finite-element discretisation of the same operator
* ``model_operator``: the compact operator K and its eigenvalues mu_n
* ``asymptotics``: eigenvalue predictions and accumulation envelopes
* ``cli``: command-line front end
"""

from .band import SpectralMinimum, find_minimum, lowest_branch
from .model_operator import ModelConstants, ModeSpectrum, model_constants, mu_quadrature, mu_series
from .profiles import RadialProfile, annulus, bump, disk, parse_profile

__version__ = "0.1.0"

__all__ = [
    "RadialProfile",
    "disk",
    "annulus",
    "bump",
    "parse_profile",
    "SpectralMinimum",
    "find_minimum",
    "lowest_branch",
    "ModelConstants",
    "ModeSpectrum",
    "model_constants",
    "mu_series",
    "mu_quadrature",
]
