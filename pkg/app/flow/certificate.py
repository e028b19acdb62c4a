"""
Discrete subgradient certificates: a flux field g on the edges together with
the element u = -(-Delta) div g it represents in the H^-1 geometry.
"""
import logging
from dataclasses import dataclass
import numpy as np
from pydantic import BaseModel, Field

from app.convex.sigma import EnergyDensityParams, slope_subdiff_distance
from app.core.errors import UsageError
from app.flow.grids import (
    Grid,
    GridFunction,
    GridVectorField,
    RadialGrid,
    check_same_grid,
    discrete_energy,
    inverse_laplacian,
    laplacian,
    neg_sobolev_inner,
    neg_sobolev_norm,
)
from app.flow.solver import FlowState
from app.radial.canonical import CanonicalRestriction, FacetExtension

logger = logging.getLogger(__name__)

DIRECTION_MODES = 6
SMALL_SCALE = 1e-3


@dataclass(frozen=True, eq=False)
class SubgradientCertificate:
    field: GridVectorField
    claimed_u: GridFunction

    def __post_init__(self):
        check_same_grid(self.field, self.claimed_u)

    @classmethod
    def from_field(cls, field: GridVectorField) -> "SubgradientCertificate":
        """Certificate whose u is computed from the field, u = A(-div g)."""
        grid = field.grid
        potential = GridFunction.from_free(grid, -field.divergence())
        return cls(field, GridFunction.from_free(grid, laplacian(potential)))

    @classmethod
    def from_step(cls, previous: FlowState, current: FlowState, tau: float) -> "SubgradientCertificate":
        """Certificate of an accepted minimizing-movement step: u = -(f_new - f_old)/tau."""
        if current.certificate is None:
            raise UsageError("the flow state carries no certificate field")
        return cls(current.certificate, (current.f - previous.f).scaled(-1.0 / tau))


class CertificateReport(BaseModel):
    pointwise_inclusion: float = Field(..., description="max distance from g to the subdifferential at the discrete slope")
    worst_violation: float = Field(..., description="max over directions of <u, h>_{H^-1} + F(f) - F(f + h), clipped at 0")
    worst_slack: float = Field(..., description="the same maximum unclipped; negative when every sampled inequality holds strictly")
    divergence_residual: float = Field(..., description="|A^-1 u + div g|_{H^-1} relative to max(1, |g|_W)")
    directions: int = Field(..., description="number of sampled directions")
    spacing: float = Field(..., description="grid spacing")

    def max_residual(self) -> float:
        return max(self.pointwise_inclusion, self.worst_violation, self.divergence_residual)


def random_directions(grid: Grid, count: int, seed: int = 0) -> list[GridFunction]:
    """
    Smooth admissible directions: random combinations of the first Fourier
    (periodic) or cosine (radial, zero at r) modes, alternately scaled small
    and large.
    """
    rng = np.random.default_rng(seed)
    k = np.arange(1, DIRECTION_MODES + 1)
    if grid.flavor == "periodic":
        phase = 2.0 * np.pi * np.outer(grid.nodes / grid.omega, k)
        basis = np.hstack([np.sin(phase), np.cos(phase)])
    else:
        basis = np.cos(np.outer(grid.nodes / grid.r, (k - 0.5) * np.pi))
    directions = []
    for index in range(count):
        coeffs = rng.normal(size=basis.shape[1])
        values = basis @ coeffs
        values *= (SMALL_SCALE if index % 2 == 0 else 1.0) / max(float(np.max(np.abs(values))), 1e-300)
        directions.append(GridFunction(grid, grid.project(values)))
    return directions


def verify_certificate(
    f: GridFunction,
    cert: SubgradientCertificate,
    params: EnergyDensityParams,
    samples: int = 200,
    seed: int = 0,
    slope_tol: float = 0.0,
) -> CertificateReport:
    """
    Residuals of the claim u in dF(f): pointwise inclusion of g, the
    subgradient inequality over sampled directions, and the compatibility
    div g = -A^-1 u. Never raises on a bad certificate.
    """
    check_same_grid(f, cert.claimed_u)
    grid = f.grid
    slopes = grid.gradient(f.values)
    g = cert.field.values
    inclusion = float(np.max(slope_subdiff_distance(params, slopes, g, slope_tol=slope_tol)))

    energy = discrete_energy(f, params)
    slack = -np.inf
    for h in random_directions(grid, samples, seed):
        violation = neg_sobolev_inner(cert.claimed_u, h) + energy - discrete_energy(f + h, params)
        slack = max(slack, violation)
    slack = float(slack) if samples else 0.0

    mismatch = inverse_laplacian(cert.claimed_u).free + cert.field.divergence()
    field_norm = float(np.sqrt(np.dot(grid.edge_weights, g**2)))
    divergence_residual = neg_sobolev_norm(GridFunction.from_free(grid, mismatch)) / max(1.0, field_norm)

    report = CertificateReport(
        pointwise_inclusion=inclusion,
        worst_violation=max(slack, 0.0),
        worst_slack=slack,
        divergence_residual=divergence_residual,
        directions=samples,
        spacing=grid.spacing,
    )
    logger.debug("certificate residuals: %s", report.model_dump())
    return report


def minimal_section_bound(cert: SubgradientCertificate) -> float:
    """|u|_{H^-1}; bounds |f_tau - f|_{H^-1} / tau for every tau when u is a subgradient at f."""
    return neg_sobolev_norm(cert.claimed_u)


def canonical_field(grid: RadialGrid, restriction: CanonicalRestriction, ext: FacetExtension) -> GridVectorField:
    """(g | u_f) at the edge midpoints: eta inside the facet, H outside."""
    mid = 0.5 * (grid.nodes[:-1] + grid.nodes[1:])
    inside = mid < restriction.r0
    values = np.where(inside, ext.eta(mid), restriction.profile.H(np.maximum(mid, restriction.r0)))
    return GridVectorField(grid, values)


def canonical_density(grid: RadialGrid, restriction: CanonicalRestriction, include_surface: bool = True) -> GridFunction:
    """
    Nodal values of the canonical restriction. The node at r0 averages the
    facet and bulk values over its dual cell and carries the surface term as
    a concentrated load surface_coeff |dOmega_0| / cell volume.
    """
    s = grid.nodes[:-1]
    values = np.where(s < restriction.r0, restriction.facet_value, restriction.bulk_density(np.maximum(s, restriction.r0)))
    i = grid.facet_index
    left = 0.5 * (grid.nodes[i - 1] + grid.nodes[i])
    right = 0.5 * (grid.nodes[i] + grid.nodes[i + 1])
    inner_share = (grid.r0**grid.dim - left**grid.dim) / (right**grid.dim - left**grid.dim)
    values[i] = inner_share * restriction.facet_value + (1.0 - inner_share) * float(restriction.bulk_density(grid.r0))
    if include_surface:
        values[i] += restriction.surface_coeff * restriction.surface_measure / grid.mass[i]
    return GridFunction.from_free(grid, values)


def canonical_certificate(
    grid: RadialGrid,
    restriction: CanonicalRestriction,
    ext: FacetExtension,
    include_surface: bool = True,
) -> SubgradientCertificate:
    return SubgradientCertificate(
        canonical_field(grid, restriction, ext),
        canonical_density(grid, restriction, include_surface=include_surface),
    )


def scaled_on_facet(cert: SubgradientCertificate, factor: float) -> SubgradientCertificate:
    """The same certificate with its field multiplied by factor on the facet edges."""
    grid = cert.field.grid
    if grid.flavor != "radial":
        raise UsageError("facet scaling needs a radial grid")
    mid = 0.5 * (grid.nodes[:-1] + grid.nodes[1:])
    values = np.where(mid < grid.r0, factor * cert.field.values, cert.field.values)
    return SubgradientCertificate(GridVectorField(grid, values), cert.claimed_u)
