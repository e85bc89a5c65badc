"""nuot: nu-based Wasserstein metrics, exact discrete transport, unequal-dimensional tools."""
__version__ = "0.1.0"

from .errors import NuotError, SolverError, UnsupportedCostError, ValidationError
from .measures import (Coupling, CostSpec, Curve, DiscreteMeasure, GridMeasure, Potentials,
                       SplitFunction, TriCoupling, grid_to_discrete, load_measure, save_measure)
from .ot_core import solve_ot, ot_1d, w2, is_unique_plan, check_solution
from .nu_metric import w_nu, w_nu_disintegration, tilde_w_nu, mm_epsilon, mm_limit, gamma_functional
from .geodesics import geodesic, geodesic_check, convexity_scan, FunctionalSpec
from .layerwise import layerwise_distance, layerwise_equivalence_check, knothe_rosenblatt_2d
from .unequal_dim import superlevel_mass, mass_split, nestedness_check, dual_metric
from .fixedpoint import FixedPointProblem, apply_F, iterate, contraction_factor
