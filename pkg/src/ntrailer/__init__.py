"""Inertial dynamics of an articulated n-trailer vehicle.

A library and CLI for the symmetry-reduced motion of a car towing a chain
of trailers on frictionless wheels: closed-form reduced equations, energy
tori, equilibrium classification with stability, the complete one-trailer
analysis, Lie-bracket nonholonomy degrees, and an independent
first-principles generator of the same equations used for verification.
"""

from .model import (
    FullState,
    ReducedState,
    SE2Element,
    TorusCoords,
    VehicleParams,
    apply_se2,
    coeff_A,
    coeff_Q,
    coeff_R,
    coeff_R_grad,
    energy,
    torus_embed,
    torus_project,
    wrap_angle,
)
from .reduced_dynamics import (
    IntegratorConfig,
    Trajectory,
    integrate_reduced,
    integrate_torus,
    reconstruct,
    reduced_vector_field,
    torus_vector_field,
)
from .equilibria import (
    EquilibriumPoint,
    EquilibriumSignature,
    classify_stability,
    enumerate_equilibria,
    equilibria_a0,
    linearize_on_torus,
)
from .single_trailer import (
    critical_energy,
    f_alpha,
    holonomy,
    invariant_circle_flow,
    period,
    solve_equilibrium_angles,
)
from .nonholonomy import (
    degree_of_nonholonomy,
    eval_bracket,
    find_singular,
)
from .lagrangian_oracle import generated_rhs

__version__ = "0.1.0"
