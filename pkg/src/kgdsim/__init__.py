"""Plane-strain (KGD) hydraulic fracture simulator.

Couples a lubrication fluid solver with a swappable solid-deformation
backend (boundary-integral elasticity or an in-house plane-strain FEM) in a
fixed-point loop per time step, with Stefan-condition front tracing and
volume-controlled time stepping.  A closed-form self-similar benchmark is
built in for quantitative verification.
"""

__version__ = "0.1.0"

from .benchmark import SelfSimilarBenchmark
from .grids import FluidGrid
from .rheology import RheologyModel, hpam_model, newtonian, truncated_power_law

__all__ = [
    "SelfSimilarBenchmark",
    "FluidGrid",
    "RheologyModel",
    "newtonian",
    "truncated_power_law",
    "hpam_model",
    "__version__",
]
