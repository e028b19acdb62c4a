"""
Right derivative of the flow at t = 0 against the canonical restriction.

For each tau one minimizing-movement step from the sampled profile gives the
difference quotient (f^1 - f^0)/tau, which should approach minus the
canonical restriction as tau and the spacing go to zero.
"""
import logging
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from app.core.errors import UsageError
from app.flow.certificate import canonical_density
from app.flow.grids import RadialGrid, neg_sobolev_norm, sample_profile
from app.flow.solver import FlowState, minimizing_movement_step
from app.radial.canonical import canonical_restriction, check_assumptions
from app.radial.profile import RadialProfile, exponent_range_ok

logger = logging.getLogger(__name__)


class SlopeRow(BaseModel):
    tau: float
    distance: float = Field(..., description="|(f1 - f0)/tau + u|_{H^-1}")
    facet_slope: float = Field(..., description="mass-weighted mean of (f1 - f0)/tau over the facet nodes")
    facet_error: float = Field(..., description="|facet_slope + facet_value| / max(1, |facet_value|)")
    iterations: int


class SlopeCheckReport(BaseModel):
    facet_value: float
    spacing: float
    rows: List[SlopeRow]
    distance_rates: List[float] = Field(..., description="observed orders log(d_k/d_k+1)/log(tau_k/tau_k+1)")
    distances_decreasing: bool
    errors_decreasing: bool
    facet_tol: Optional[float] = Field(None, description="accepted facet error at the smallest tau, set by the CLI")
    passed: Optional[bool] = None

    @property
    def final_error(self) -> float:
        return self.rows[-1].facet_error


def _observed_rates(taus: Sequence[float], values: Sequence[float]) -> list[float]:
    rates = []
    for (t0, v0), (t1, v1) in zip(zip(taus, values), zip(taus[1:], values[1:])):
        if v0 > 0.0 and v1 > 0.0:
            rates.append(float(np.log(v0 / v1) / np.log(t0 / t1)))
        else:
            rates.append(float("nan"))
    return rates


def initial_slope_check(
    profile: RadialProfile,
    taus: Sequence[float],
    grid: RadialGrid,
    tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> SlopeCheckReport:
    """
    Raises:
        UsageError: if taus are not strictly decreasing, or the exponent lies
            outside the range where the Dirichlet characterization holds.
        AssumptionError: if the profile fails the canonical-restriction hypotheses.
        SolverError: propagated from the minimizing-movement steps.
    """
    if not taus or any(b >= a for a, b in zip(taus, taus[1:])) or taus[-1] <= 0.0:
        raise UsageError(f"taus must be positive and strictly decreasing, got {list(taus)}")
    params = profile.params
    if not exponent_range_ok(params.p, params.dim):
        raise UsageError(f"p={params.p} is outside the admissible range for d={params.dim}")

    restriction = canonical_restriction(profile, check_assumptions(profile))
    target = canonical_density(grid, restriction)
    start = FlowState.initial(sample_profile(grid, profile), params)
    facet_nodes = slice(0, grid.facet_index)
    facet_mass = grid.mass[facet_nodes]

    rows = []
    for tau in taus:
        state = minimizing_movement_step(start, tau, params, tol=tol, max_iterations=max_iterations)
        quotient = (state.f - start.f).scaled(1.0 / tau)
        distance = neg_sobolev_norm(quotient + target)
        facet_slope = float(np.dot(facet_mass, quotient.free[facet_nodes]) / np.sum(facet_mass))
        facet_error = abs(facet_slope + restriction.facet_value) / max(1.0, abs(restriction.facet_value))
        rows.append(
            SlopeRow(
                tau=tau,
                distance=distance,
                facet_slope=facet_slope,
                facet_error=facet_error,
                iterations=state.diagnostics.iterations,
            )
        )
        logger.info("slope check tau=%.3g: distance %.4e, facet slope %.6f (error %.3e)", tau, distance, facet_slope, facet_error)

    distances = [row.distance for row in rows]
    errors = [row.facet_error for row in rows]
    return SlopeCheckReport(
        facet_value=restriction.facet_value,
        spacing=grid.spacing,
        rows=rows,
        distance_rates=_observed_rates(list(taus), distances),
        distances_decreasing=all(b < a for a, b in zip(distances, distances[1:])),
        errors_decreasing=all(b < a for a, b in zip(errors, errors[1:])),
    )
