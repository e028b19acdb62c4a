"""
Canonical restriction (minimal-norm subgradient) of the Dirichlet energy at a
spherically symmetric surface with a single round facet.

On the facet the subgradient field is g(x) = eta(|x|) x/|x| with
eta(s) = C1 s + C2 s^3, the regular solutions of the radial fourth-order
equation; C1 and C2 are fixed by continuity of the normal trace and of the
divergence across the facet boundary.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, Field

from app.core.errors import AssumptionError
from app.radial.differentiation import Derivable, PolynomialFunction, richardson_derivative
from app.radial.profile import RadialProfile, sphere_area

logger = logging.getLogger(__name__)

CONTINUITY_TOL = 1e-12
INTERVAL_SLACK = 1e-12
FACET_BOUND_SLACK = 1e-12
ODE_SAMPLES = 64


def radial_ode_residual(dim: int, eta: Derivable, s) -> np.ndarray:
    """
    s^4 eta'''' + 2(d-1) s^3 eta''' + (d-1)(d-5) s^2 eta''
        - 3(d-1)(d-3) s eta' + 3(d-1)(d-3) eta

    The radial component of grad Laplacian div of eta(|x|) x/|x|, times |x|^4.
    """
    s = np.asarray(s, dtype=float)
    k = dim - 1.0
    return (
        s**4 * eta(s, 4)
        + 2.0 * k * s**3 * eta(s, 3)
        + k * (dim - 5.0) * s**2 * eta(s, 2)
        - 3.0 * k * (dim - 3.0) * s * eta(s, 1)
        + 3.0 * k * (dim - 3.0) * eta(s, 0)
    )


@dataclass(frozen=True)
class FacetExtension:
    """Coefficients of eta(s) = c1 s + c2 s^3 on [0, r0]; the other two solutions are excluded by smoothness at 0."""

    c1: float
    c2: float
    r0: float

    @property
    def eta(self) -> PolynomialFunction:
        return PolynomialFunction(Polynomial([0.0, self.c1, 0.0, self.c2]))

    def continuity_residuals(self, h1_r0: float) -> tuple[float, float]:
        """Residuals of C1 r0 + C2 r0^3 = -1 and C1 + 3 C2 r0^2 = H'(r0)."""
        r0 = self.r0
        return (
            self.c1 * r0 + self.c2 * r0**3 + 1.0,
            self.c1 + 3.0 * self.c2 * r0**2 - h1_r0,
        )


def extension_for_slope(r0: float, h1_r0: float) -> FacetExtension:
    """Solve the 2x2 continuity system for a facet of radius r0 with H'(r0) = h1_r0."""
    c2 = (h1_r0 + 1.0 / r0) / (2.0 * r0**2)
    c1 = -(h1_r0 + 3.0 / r0) / 2.0
    return FacetExtension(c1=c1, c2=c2, r0=r0)


def solve_facet_extension(profile: RadialProfile) -> FacetExtension:
    h1_r0 = float(profile.H(profile.r0, 1))
    ext = extension_for_slope(profile.r0, h1_r0)
    trace, divergence = ext.continuity_residuals(h1_r0)
    scale = 1.0 + abs(h1_r0) + 1.0 / profile.r0
    if max(abs(trace), abs(divergence)) > CONTINUITY_TOL * scale:
        logger.warning("facet extension continuity residuals %.2e %.2e exceed %.0e", trace, divergence, CONTINUITY_TOL)
    logger.debug("facet extension c1=%.15g c2=%.15g", ext.c1, ext.c2)
    return ext


def facet_bound_max(ext: FacetExtension) -> float:
    """
    max of |eta| on [0, r0] by critical points of the cubic.

    eta' = C1 + 3 C2 s^2 vanishes at s^2 = -C1/(3 C2); with the endpoints
    s = 0 and s = r0 that is every candidate.
    """
    candidates = [0.0, ext.r0]
    if ext.c2 != 0.0:
        critical = -ext.c1 / (3.0 * ext.c2)
        if 0.0 < critical < ext.r0**2:
            candidates.append(float(np.sqrt(critical)))
    return float(np.max(np.abs(ext.eta(np.array(candidates)))))


def interval_test(r0: float, h1_r0: float) -> bool:
    """H'(r0) in [-9/r0, 0], with a little slack at the endpoints."""
    return -9.0 / r0 - INTERVAL_SLACK <= h1_r0 <= INTERVAL_SLACK


class AssumptionReport(BaseModel):
    """Hypotheses of the canonical-restriction formula, measured on one profile."""

    boundary_residual: float = Field(..., description="H'(r) + (d-1) H(r)/r")
    interval_ok: bool = Field(..., description="H'(r0) in [-9/r0, 0]")
    no_delta_residual: float = Field(..., description="H''(r0) - 3H'(r0)/r0 - 3/r0^2, the surface-term coefficient")
    facet_bound_max: float = Field(..., description="max of |eta| on the facet")
    h1_r0: float = Field(..., description="H'(r0)")
    h1_r: float = Field(..., description="H'(r)")

    @property
    def boundary_ok(self) -> bool:
        return abs(self.boundary_residual) <= 1e-8 * (1.0 + abs(self.h1_r))

    @property
    def facet_bound_ok(self) -> bool:
        return self.facet_bound_max <= 1.0 + FACET_BOUND_SLACK

    @property
    def passed(self) -> bool:
        return self.boundary_ok and self.interval_ok and self.facet_bound_ok


def no_delta_residual(r0: float, h1_r0: float, h2_r0: float) -> float:
    return h2_r0 - 3.0 / r0 * h1_r0 - 3.0 / r0**2


def check_assumptions(profile: RadialProfile) -> AssumptionReport:
    r0, r, dim = profile.r0, profile.r, profile.dim
    h1_r0 = float(profile.H(r0, 1))
    h2_r0 = float(profile.H(r0, 2))
    h1_r = float(profile.H(r, 1))
    ext = extension_for_slope(r0, h1_r0)
    return AssumptionReport(
        boundary_residual=h1_r + (dim - 1.0) * float(profile.H(r)) / r,
        interval_ok=interval_test(r0, h1_r0),
        no_delta_residual=no_delta_residual(r0, h1_r0, h2_r0),
        facet_bound_max=facet_bound_max(ext),
        h1_r0=h1_r0,
        h1_r=h1_r,
    )


@dataclass(frozen=True)
class CanonicalRestriction:
    """
    Facet constant, bulk density on r0 < |x| < r, and the coefficient of the
    surface integral over |x| = r0.
    """

    facet_value: float
    surface_coeff: float
    dim: int
    r0: float
    r: float
    profile: RadialProfile

    @property
    def surface_measure(self) -> float:
        """|dOmega_0| = d omega_d r0^(d-1)."""
        return sphere_area(self.dim, self.r0)

    def bulk_density(self, s) -> np.ndarray:
        """H''' + 2(d-1)H''/s + (d-1)(d-3)H'/s^2 - (d-1)(d-3)H/s^3."""
        s = np.asarray(s, dtype=float)
        H = self.profile.H
        k = self.dim - 1.0
        m = k * (self.dim - 3.0)
        return H(s, 3) + 2.0 * k * H(s, 2) / s + m * H(s, 1) / s**2 - m * H(s, 0) / s**3

    def density(self, s) -> np.ndarray:
        """Pointwise density on [0, r]: facet constant inside, bulk density outside (surface term excluded)."""
        s = np.asarray(s, dtype=float)
        outer = self.bulk_density(np.maximum(s, self.r0))
        return np.where(s < self.r0, self.facet_value, outer)


def canonical_restriction(profile: RadialProfile, report: Optional[AssumptionReport] = None) -> CanonicalRestriction:
    """
    Raises:
        AssumptionError: if the boundary condition, the interval condition or
            the facet bound fails; the error carries the report.
    """
    report = report or check_assumptions(profile)
    if not report.passed:
        failures = []
        if not report.boundary_ok:
            failures.append(f"boundary_residual={report.boundary_residual:.3e}")
        if not report.interval_ok:
            failures.append(f"H'(r0)={report.h1_r0:.6g} outside [-9/r0, 0]")
        if not report.facet_bound_ok:
            failures.append(f"facet_bound_max={report.facet_bound_max:.6g} > 1")
        raise AssumptionError(f"{profile.name}: " + ", ".join(failures), report=report)

    r0 = profile.r0
    dim = profile.dim
    facet_value = dim * (dim + 2.0) / r0**2 * (report.h1_r0 + 1.0 / r0)
    return CanonicalRestriction(
        facet_value=facet_value,
        surface_coeff=report.no_delta_residual,
        dim=dim,
        r0=r0,
        r=profile.r,
        profile=profile,
    )


class ExtensionResiduals(BaseModel):
    ode_residual_max: float = Field(..., description="max |ODE residual| of eta over the facet")
    trace_jump: float = Field(..., description="|eta(r0) - H(r0)|")
    divergence_jump: float = Field(..., description="jump of the radial divergence at r0")
    outer_divergence: float = Field(..., description="div u at |x| = r")

    def max_residual(self) -> float:
        return max(abs(self.ode_residual_max), abs(self.trace_jump), abs(self.divergence_jump), abs(self.outer_divergence))


def verify_extension_field(
    profile: RadialProfile,
    ext: FacetExtension,
    eta: Optional[Derivable] = None,
) -> ExtensionResiduals:
    """
    Residuals of the glued field (g | u): the facet ODE, the normal-trace and
    divergence continuity at r0, and the vanishing divergence at r.

    eta overrides the extension's cubic, e.g. to probe a perturbed field.
    """
    eta = eta or ext.eta
    dim, r0, r = profile.dim, profile.r0, profile.r
    s = np.linspace(r0 / ODE_SAMPLES, r0, ODE_SAMPLES)
    ode = float(np.max(np.abs(radial_ode_residual(dim, eta, s))))

    H_r0 = float(profile.H(r0))
    eta_r0 = float(eta(r0))
    inner_div = float(eta(r0, 1)) + (dim - 1.0) * eta_r0 / r0
    outer_div = float(profile.H(r0, 1)) + (dim - 1.0) * H_r0 / r0
    return ExtensionResiduals(
        ode_residual_max=ode,
        trace_jump=abs(eta_r0 - H_r0),
        divergence_jump=abs(inner_div - outer_div),
        outer_divergence=abs(float(profile.H(r, 1)) + (dim - 1.0) * float(profile.H(r)) / r),
    )


def no_delta_residual_by_differences(profile: RadialProfile, step: Optional[float] = None) -> float:
    """Surface-term coefficient from one-sided Richardson differences of H at r0."""
    step = step or 0.05 * (profile.r - profile.r0)
    r0 = profile.r0
    h1 = float(richardson_derivative(profile.H, r0, 1, step, side="forward"))
    h2 = float(richardson_derivative(profile.H, r0, 2, step, side="forward"))
    return no_delta_residual(r0, h1, h2)


def bulk_density_by_differences(profile: RadialProfile, s, step: Optional[float] = None) -> np.ndarray:
    """
    Laplacian of div u with u = H(|x|) x/|x|, by nested central differences on H alone:
    v = H' + (d-1) H/s, then v'' + (d-1) v'/s.
    """
    s = np.asarray(s, dtype=float)
    step = step or 1e-2 * (profile.r - profile.r0)
    dim = profile.dim

    def divergence(t):
        return richardson_derivative(profile.H, t, 1, 0.25 * step) + (dim - 1.0) * profile.H(t) / t

    first = richardson_derivative(divergence, s, 1, step)
    second = richardson_derivative(divergence, s, 2, step)
    return second + (dim - 1.0) * first / s
