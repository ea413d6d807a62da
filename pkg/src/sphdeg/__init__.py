"""Analytic computation of topological degrees for maps between even spheres.

Subpackage map:

* ``geometry`` — stereographic charts, volume factors, uniform sampling
* ``projections`` — rank-one projection towers and their Chern data
* ``combinatorics`` — admissible index sequences of the commutator expansion
* ``exterior`` — dense exterior algebra, sphere kernels, degree integrand
* ``quadrature`` — deterministic importance-sampled Monte Carlo
* ``schatten`` — mixed norms, Schatten norms, kernel trace identities
* ``signature`` — spectral signature operator module and index pairings
* ``degree`` — top-level degree estimators, oracles, and fixtures
* ``constants`` — kernel normalizations with calibration provenance
"""

from .constants import KernelConstants
from .quadrature import Estimate, MCConfig

__all__ = ["KernelConstants", "Estimate", "MCConfig"]
__version__ = "0.1.0"
