"""Step-size schedules for gradient descent on convex quadratics.

Chebyshev steps, spectral-radius bounds, learned (unrolled) schedules, classic
accelerated baselines and orderings of the steps that keep transients small.
"""

from . import errors
from .linalg import (
    QuadraticProblem,
    Spectrum,
    generate_gaussian_problem,
    jacobi_eigenvalues,
    marchenko_pastur_edges,
    power_method_max,
    power_method_min,
)
from .permute import (
    AffinePermutation,
    emulate_incremental,
    permutation_search,
    temporal_spectral_radius,
)
from .sched import (
    Origin,
    StepSchedule,
    cheb_upper_closed_form,
    chebyshev_steps,
    constant_schedule,
    rate_chgd_upper,
    rate_constant,
    rate_lower_bound,
    rho_upper_interval,
    spectral_radius,
)
from .solvers import Algorithm, BaselineParams, run_cheb_semi, run_gd, run_momentum

__version__ = "0.1.0"

__all__ = [
    "errors",
    "QuadraticProblem",
    "Spectrum",
    "generate_gaussian_problem",
    "jacobi_eigenvalues",
    "marchenko_pastur_edges",
    "power_method_max",
    "power_method_min",
    "AffinePermutation",
    "emulate_incremental",
    "permutation_search",
    "temporal_spectral_radius",
    "Origin",
    "StepSchedule",
    "cheb_upper_closed_form",
    "chebyshev_steps",
    "constant_schedule",
    "rate_chgd_upper",
    "rate_constant",
    "rate_lower_bound",
    "rho_upper_interval",
    "spectral_radius",
    "Algorithm",
    "BaselineParams",
    "run_cheb_semi",
    "run_gd",
    "run_momentum",
]
