"""Borel summation and the Stokes phenomenon for d_t^p u = d_z^q u.

The divergent formal solution with meromorphic Cauchy datum is summed
along a direction theta; the sums jump across Stokes lines, and one sum
per gap between singular directions gives a maximal family of actual
solutions on the Riemann surface of t^{p/q}.
"""

from .borel import (BorelSumResult, GridCell, QuadratureSpec, RiemannPoint, Sector, borel_sum,
                    borel_transform, general_sum, heat_sum, pole_directions, sum_on_grid,
                    validity_radius)
from .datum import CauchyDatum, EntirePart, PoleTerm, datum_from_json, datum_to_json
from . import errors
from .errors import *  # noqa: F401,F403
from .family import (FamilyMember, SurfaceSector, initial_limit, maximal_family, member_evaluator,
                     pde_residual, verify_family)
from .formal import (HEAT, Equation, FormalSolution, formal_solution, gevrey_estimate,
                     optimal_truncation, partial_sum)
from .special_fn import KernelParams, gamma, kernel_C, kernel_values, recip_gamma
from .stokes import (JumpResult, StokesLine, anti_stokes_directions, jump_closed_form,
                     jump_quadrature, residue_jump, singular_directions)

__version__ = "0.1.0"

__all__ = [
    "BorelSumResult", "GridCell", "QuadratureSpec", "RiemannPoint", "Sector", "borel_sum",
    "borel_transform", "general_sum", "heat_sum", "pole_directions", "sum_on_grid",
    "validity_radius", "CauchyDatum", "EntirePart", "PoleTerm", "datum_from_json",
    "datum_to_json", "FamilyMember", "SurfaceSector", "initial_limit", "maximal_family",
    "member_evaluator", "pde_residual", "verify_family", "HEAT", "Equation", "FormalSolution",
    "formal_solution", "gevrey_estimate", "optimal_truncation", "partial_sum", "KernelParams",
    "gamma", "kernel_C", "kernel_values", "recip_gamma", "JumpResult", "StokesLine",
    "anti_stokes_directions", "jump_closed_form", "jump_quadrature", "residue_jump",
    "singular_directions", *errors.__all__,
]
