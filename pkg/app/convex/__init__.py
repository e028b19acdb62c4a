from app.convex.oracle import OracleResult, apriori_radius, sigma_conj_bruteforce
from app.convex.sigma import (
    EnergyDensityParams,
    SubdiffValue,
    conjugate_exponent,
    distance_to_subdiff,
    fenchel_young_gap,
    prox_sigma,
    shrink_magnitude,
    sigma,
    sigma_conj,
    slope_subdiff_distance,
    slope_subgradient,
    subdiff_sigma,
    subdiff_sigma_conj,
)

__all__ = [
    "EnergyDensityParams",
    "SubdiffValue",
    "OracleResult",
    "apriori_radius",
    "conjugate_exponent",
    "distance_to_subdiff",
    "fenchel_young_gap",
    "prox_sigma",
    "shrink_magnitude",
    "sigma",
    "sigma_conj",
    "sigma_conj_bruteforce",
    "slope_subdiff_distance",
    "slope_subgradient",
    "subdiff_sigma",
    "subdiff_sigma_conj",
]
