"""Hele-Shaw electro-osmotic cloaking and shielding toolkit.

Boundary-integral solvers for depth-averaged microchannel flow around
insulating obstacles, closed-form slip strengths for circular and
confocal-elliptic shells, quadratic slip-strength optimization with an
a posteriori error estimate, and a deterministic CLI for data export.
"""

from ._backend import BACKEND
from .analytic import (
    AnnulusSpec,
    ConfocalSpec,
    DegenerateLayoutError,
    annulus_cloak_zeta,
    annulus_densities,
    annulus_fields,
    annulus_shield_zeta,
    ellipse_cloak_zeta,
    ellipse_densities,
    ellipse_fields,
    ellipse_shield_zeta,
)
from .design import (
    DesignError,
    DesignProblem,
    DesignResult,
    PhysicalParams,
    cost_cloak,
    cost_shield,
    dimensionalize_zeta,
    force,
    optimize_zeta,
)
from .geometry import (
    EllipticFrame,
    GeometryError,
    QuadratureMesh,
    build_circle,
    build_confocal_ellipse,
    build_flower,
    build_kite,
    build_peanut,
    build_polar_shape,
    build_regular_polygon,
    build_rounded_polygon,
    from_parametrization,
    from_point_list,
    translated,
)
from .kernels import (
    NearFieldError,
    elliptic_basis,
    jump_normal_derivative,
    np_star,
    potential,
    potential_gradient,
    single_layer,
    single_layer_gradient,
)
from .solver import (
    BackgroundField,
    CloakConfig,
    SolverError,
    evaluate_velocity,
    field_grid,
    solve_electrostatic,
    solve_exterior_dirichlet,
    solve_interior_mixed,
    solve_pressure,
    uniform_flow_background,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "AnnulusSpec",
    "ConfocalSpec",
    "DegenerateLayoutError",
    "annulus_cloak_zeta",
    "annulus_densities",
    "annulus_fields",
    "annulus_shield_zeta",
    "ellipse_cloak_zeta",
    "ellipse_densities",
    "ellipse_fields",
    "ellipse_shield_zeta",
    "DesignError",
    "DesignProblem",
    "DesignResult",
    "PhysicalParams",
    "cost_cloak",
    "cost_shield",
    "dimensionalize_zeta",
    "force",
    "optimize_zeta",
    "EllipticFrame",
    "GeometryError",
    "QuadratureMesh",
    "build_circle",
    "build_confocal_ellipse",
    "build_flower",
    "build_kite",
    "build_peanut",
    "build_polar_shape",
    "build_regular_polygon",
    "build_rounded_polygon",
    "from_parametrization",
    "from_point_list",
    "translated",
    "NearFieldError",
    "elliptic_basis",
    "jump_normal_derivative",
    "np_star",
    "potential",
    "potential_gradient",
    "single_layer",
    "single_layer_gradient",
    "BackgroundField",
    "CloakConfig",
    "SolverError",
    "evaluate_velocity",
    "field_grid",
    "solve_electrostatic",
    "solve_exterior_dirichlet",
    "solve_interior_mixed",
    "solve_pressure",
    "uniform_flow_background",
]
