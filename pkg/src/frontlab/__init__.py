"""frontlab: a numerical laboratory for nonlocal reaction-diffusion fronts.

Simulates u_t + (<K>u - K*u) = f(u), computes its travelling waves and
dispersion quantities, and verifies front-propagation laws at desk scale:
linear spreading, the Bramson logarithmic delay for KPP reactions,
exponential relaxation for ZFK reactions with c_* > c_K, and the Kendall
epidemic threshold and spreading results.
"""

from . import (cauchy, dispersion, epidemics, frontfit, heatkernel, kernels,
               reactions, waves)
from .errors import FrontlabError

__all__ = ["cauchy", "dispersion", "epidemics", "frontfit", "heatkernel",
           "kernels", "reactions", "waves", "FrontlabError"]

__version__ = "0.1.0"
