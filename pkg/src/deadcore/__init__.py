"""Dead-core free boundary problems: solver and sharp-growth diagnostics.

Solves -div(a(x)|grad u|^{p-2} grad u) + lambda0(x) u_+^q = 0 with
non-negative Dirichlet data by discrete energy minimization, then
measures the geometry the strong-absorption theory predicts at the free
boundary: the growth exponent p/(p-1-q), non-degeneracy, density,
porosity, perimeter, Liouville thresholds and the borderline strong
maximum principle.
"""

__version__ = "0.1.0"

from .core import (AbsorptionLaw, BallExtrema, Disk, Exponents, GridField,
                   Interval, Problem, Rectangle, Violation, ball_extrema,
                   build_grid, field_from_function, gamma_exponent,
                   holder_class, power_problem, validate_problem)
from .oracle import (RadialProfile, analytic_residual, barrier_constant,
                     borderline_exponential, radial_profile_eval,
                     theta_constant)
from .solver import (ComparisonReport, MeasureReport, Solution,
                     comparison_check, discrete_energy, harnack_quotient,
                     kkt_measure, rescale_solution, solve)
from .geometry import (FitReport, RegionMap, boxcount_fb_measure,
                       deadcore_symdiff, density_fraction, extract_regions,
                       fit_gradient_exponent, fit_growth_exponent,
                       level_set_measure, nondegeneracy_scan,
                       porosity_estimate)
from .cli import (ExperimentSpec, RunReport, borderline_run, emit_report,
                  liouville_sweep, run_experiment)

__all__ = [
    "AbsorptionLaw", "BallExtrema", "ComparisonReport", "Disk",
    "ExperimentSpec", "Exponents", "FitReport", "GridField", "Interval",
    "MeasureReport", "Problem", "RadialProfile", "Rectangle", "RegionMap",
    "RunReport", "Solution", "Violation", "analytic_residual",
    "ball_extrema", "barrier_constant", "borderline_exponential",
    "borderline_run", "boxcount_fb_measure", "build_grid",
    "comparison_check", "deadcore_symdiff", "density_fraction",
    "discrete_energy", "emit_report", "extract_regions",
    "field_from_function", "fit_gradient_exponent", "fit_growth_exponent",
    "gamma_exponent", "harnack_quotient", "holder_class", "kkt_measure",
    "level_set_measure", "liouville_sweep", "nondegeneracy_scan",
    "porosity_estimate", "power_problem", "radial_profile_eval",
    "rescale_solution", "run_experiment", "solve", "theta_constant",
    "validate_problem",
]
