"""Ground states of a constrained singular-denominator energy functional.

Radial toolkit for the nucleon mean-field variational problem: quadrature
grids, energy/gradient evaluation, normalized gradient-flow minimization,
a radial shooting solver, analytic constants, and concentration diagnostics.
"""

from .grids import (GridSizingError, RadialField, RadialGrid, integrate_radial,
                    l2_mass, load_profile, make_grid, normalize, save_profile)
from .energy import (Coupling, EnergyBreakdown, dilate, energy, energy_signed,
                     gradient, kinetic_term, kinetic_term_scaled,
                     quartic_term)
from .minimize import (MinimizeOptions, MinimizeResult, extract_multiplier,
                       init_profile, minimize, minimize_from, minimize_mass)
from .shooting import (BracketError, ShootTrajectory, find_ground_state,
                       integrate_trajectory, rhs, verify_system)
from .analysis import (ThresholdBracket, constants_report, cutoff_ratio_bound,
                       cutoff_singular_ratio, cutoff_xi, cutoff_zeta,
                       levy_K, levy_Q, lower_coupling_bound, sobolev_constant,
                       test_function_cosbump, threshold_bisect, threshold_probe,
                       unbounded_family, upper_test_constants)

__version__ = "0.1.0"
