"""Operators, explicit solutions and verification tools for vectorial L-infinity problems.

The package evaluates the vector infinity-Laplacian, the Aronsson system of
a general Hamiltonian, the optimal quasiconformal system and a family of
degenerate linear systems, builds smooth closed-form solutions of each on
the punctured unit ball, and checks them numerically.
"""
from .errors import DomainError, SingularityReached
from .tensor import InfiniteDilation, dilation, dilation_gradient, nullspace_projection
from .operators import (
    HamiltonianModel,
    MapModel,
    aronsson_system,
    coefficient_tensor,
    infinity_laplacian,
    infinity_laplacian_decoupled,
    linear_system_residual,
    q_infinity,
    q_infinity_decoupled,
)
from .ode import ProfileSolution, blowup_time, solve_profile
from .solutions import (
    dilation_level,
    eikonal_map,
    identity_map,
    mu_map,
    power_map,
    radial_map,
    trig_map,
)
from .inclusion import InclusionVerdict, in_K_a, in_L_a, scan_inclusion
from .report import Report
from .verify import (
    SampleSet,
    boundary_check,
    convex_hull_check,
    nonuniqueness_demo,
    residual_report,
    sample_punctured_ball,
)

__version__ = "0.1.0"
