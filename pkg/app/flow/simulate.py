"""
Flow driver: builds the grid and initial surface from a FlowConfig, applies
fixed-size minimizing-movement steps up to t_max and records the time series.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from app.convex.sigma import EnergyDensityParams
from app.core.config import settings
from app.core.errors import UsageError
from app.flow.grids import Grid, GridFunction, PeriodicGrid, RadialGrid, hat_data, sample_profile, sine_data
from app.flow.solver import FlowState, minimizing_movement_step
from app.radial.profile import RadialProfile, exponent_range_ok, profile_from_config
from app.response_models.configs import FlowConfig
from app.response_models.reports import FlowSummary

logger = logging.getLogger(__name__)

SERIES_COLUMNS = ["t", "energy", "h_neg_norm", "sup_norm"]


@dataclass(frozen=True, eq=False)
class FlowRun:
    series: pd.DataFrame
    final: FlowState
    summary: FlowSummary
    profile: Optional[RadialProfile] = None

    def final_profile(self) -> pd.DataFrame:
        column = "x" if self.final.f.flavor == "periodic" else "s"
        return pd.DataFrame({column: self.final.f.grid.nodes, "f": self.final.f.values})


def build_initial(config: FlowConfig) -> tuple[GridFunction, EnergyDensityParams, Optional[RadialProfile]]:
    """Grid, initial surface and energy parameters described by the config."""
    if config.flavor == "periodic":
        grid: Grid = PeriodicGrid(config.n, config.omega)
        params = EnergyDensityParams(mu=config.mu, p=config.p, dim=1)
        if config.initial == "sin":
            return sine_data(grid, config.amplitude), params, None
        if config.initial == "hat":
            return hat_data(grid, config.amplitude), params, None
        values = np.asarray(config.samples, dtype=float)
        if abs(float(np.mean(values))) > 0.0:
            logger.info("subtracting mean %.3e from the periodic samples", float(np.mean(values)))
        return GridFunction(grid, grid.project(values)), params, None

    profile = profile_from_config(config.profile)
    params = profile.params
    if not exponent_range_ok(params.p, params.dim):
        raise UsageError(f"p={params.p} is outside the admissible range for d={params.dim}")
    grid = RadialGrid(profile.r0, profile.r, config.n, profile.dim)
    return sample_profile(grid, profile), params, profile


def step_count(t_max: float, tau: float) -> int:
    return int(math.ceil(t_max / tau - 1e-9)) if t_max > 0.0 else 0


def run_flow(config: FlowConfig, tol: Optional[float] = None, max_iterations: Optional[int] = None) -> FlowRun:
    """
    Raises:
        UsageError: for inadmissible configs.
        SolverError: propagated from a step that does not converge.
    """
    tol = tol or config.tol or settings.TOL
    f0, params, profile = build_initial(config)
    state = FlowState.initial(f0, params)
    rows = [_row(state)]
    initial_energy = state.energy
    max_increase = 0.0
    max_drift = abs(float(np.mean(state.f.values))) if state.f.flavor == "periodic" else 0.0
    max_inner = 0
    extinction_step = None
    extinction_time = None
    if rows[0][2] <= config.extinction_tol:
        extinction_step, extinction_time = 0, 0.0

    steps = step_count(config.t_max, config.tau)
    logger.info("%s flow: n=%d, tau=%g, %d steps", config.flavor, config.n, config.tau, steps)
    for _ in range(steps):
        if extinction_step is not None and config.stop_when_extinct:
            break
        previous = state
        state = minimizing_movement_step(state, config.tau, params, tol=tol, max_iterations=max_iterations)
        rows.append(_row(state))
        max_increase = max(max_increase, state.energy - previous.energy)
        max_inner = max(max_inner, state.diagnostics.iterations)
        if state.f.flavor == "periodic":
            max_drift = max(max_drift, abs(float(np.mean(state.f.values))))
        if extinction_step is None and rows[-1][2] <= config.extinction_tol:
            extinction_step, extinction_time = state.step_count, state.time
            logger.info("extinct at step %d (t=%.6g)", extinction_step, extinction_time)
        if state.step_count % config.log_every == 0:
            logger.info("step %d: t=%.6g energy=%.10g |f|_-1=%.3e", state.step_count, state.time, state.energy, rows[-1][2])

    series = pd.DataFrame(rows, columns=SERIES_COLUMNS)
    summary = FlowSummary(
        flavor=config.flavor,
        n=config.n,
        tau=config.tau,
        steps=state.step_count,
        final_time=state.time,
        initial_energy=initial_energy,
        final_energy=state.energy,
        max_energy_increase=max_increase,
        max_mean_drift=max_drift,
        extinction_step=extinction_step,
        extinction_time=extinction_time,
        max_inner_iterations=max_inner,
        tol=tol,
        passed=max_increase <= tol * max(1.0, initial_energy),
    )
    return FlowRun(series=series, final=state, summary=summary, profile=profile)


def _row(state: FlowState) -> list[float]:
    return [state.time, state.energy, state.h_neg_norm(), state.sup_norm()]
