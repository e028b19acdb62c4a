from app.radial.canonical import (
    AssumptionReport,
    CanonicalRestriction,
    ExtensionResiduals,
    FacetExtension,
    bulk_density_by_differences,
    canonical_restriction,
    check_assumptions,
    extension_for_slope,
    facet_bound_max,
    interval_test,
    no_delta_residual_by_differences,
    radial_ode_residual,
    solve_facet_extension,
    verify_extension_field,
)
from app.radial.differentiation import general_solution_basis, richardson_derivative
from app.radial.profile import (
    RadialProfile,
    example_profile,
    exponent_range_ok,
    facet_profile,
    polynomial_profile,
    profile_from_config,
    sampled_profile,
    sphere_area,
    unit_ball_volume,
)

__all__ = [
    "AssumptionReport",
    "CanonicalRestriction",
    "ExtensionResiduals",
    "FacetExtension",
    "RadialProfile",
    "bulk_density_by_differences",
    "canonical_restriction",
    "check_assumptions",
    "example_profile",
    "exponent_range_ok",
    "extension_for_slope",
    "facet_bound_max",
    "facet_profile",
    "general_solution_basis",
    "interval_test",
    "no_delta_residual_by_differences",
    "polynomial_profile",
    "profile_from_config",
    "radial_ode_residual",
    "richardson_derivative",
    "sampled_profile",
    "solve_facet_extension",
    "sphere_area",
    "unit_ball_volume",
    "verify_extension_field",
]
