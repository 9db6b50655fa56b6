"""pointjump: numerics for 1D pointlike interactions built as limits of
vanishing-range potentials.

The engine solves the regularized two-body problem, measures the emergent
wave-function jump as the range shrinks, runs the small-coupling recursion
for the expansion orders, and carries the many-body perturbation pipeline
through to the strong-coupling gas where an independent Bethe-ansatz solver
closes the loop.
"""

from ._kernels import BACKEND as kernel_backend
from .profiles import (PointPotential, comb_potential, duality_potential,
                       eval_potential, lorentz_potential, make_profile,
                       naive_potential, potential_fourier)

__version__ = "0.1.0"
__all__ = [
    "kernel_backend",
    "__version__",
    "make_profile",
    "PointPotential",
    "duality_potential",
    "comb_potential",
    "naive_potential",
    "lorentz_potential",
    "eval_potential",
    "potential_fourier",
]
