"""
One implicit step of the negative-Sobolev gradient flow:

    f_new = argmin_f  E(f) + |f - f_old|^2_{H^-1} / (2 tau)

solved by ADMM on the splitting y = D f. The f-update is an exact linear
solve for the potential w = A^-1 (f - f_old),

    (M / tau + rho L M^-1 L) w = D^T W (rho (y - D f_old) - lam),

the y-update is the edgewise prox of sigma/rho and lam is the multiplier,
which always lies in the subdifferential at y and serves as the
certificate field. Iterations stop on the primal-dual gap.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.convex.sigma import EnergyDensityParams, shrink_magnitude, sigma, sigma_conj, slope_subgradient
from app.core.config import settings
from app.core.errors import SolverError, UsageError
from app.flow.grids import GridFunction, GridVectorField, discrete_energy, neg_sobolev_norm

logger = logging.getLogger(__name__)

LOG_EVERY_ITERATIONS = 500


@dataclass(frozen=True)
class StepDiagnostics:
    iterations: int
    gap: float
    primal_residual: float
    dual_residual: float
    rho: float


@dataclass(frozen=True, eq=False)
class FlowState:
    """Time, surface, its discrete energy and the number of accepted steps."""

    time: float
    f: GridFunction
    energy: float
    step_count: int = 0
    certificate: Optional[GridVectorField] = field(default=None, repr=False)
    diagnostics: Optional[StepDiagnostics] = None

    @classmethod
    def initial(cls, f: GridFunction, params: EnergyDensityParams) -> "FlowState":
        return cls(time=0.0, f=f, energy=discrete_energy(f, params))

    def h_neg_norm(self) -> float:
        return neg_sobolev_norm(self.f)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.f.values)))


def default_penalty(f: GridFunction, tau: float, params: EnergyDensityParams) -> float:
    """
    Geometric mean of the curvature of sigma and of the proximal term on the
    slowest mode, sqrt(mu_eff / (tau lambda_min^2)).
    """
    slopes = f.grid.gradient(f.values)
    scale = max(1.0, float(np.max(np.abs(slopes))) if slopes.size else 1.0)
    mu_eff = params.mu * (params.p - 1.0) * scale ** (params.p - 2.0)
    lam_min = f.grid.smallest_eigenvalue()
    return float(np.sqrt(mu_eff / (tau * lam_min**2)))


def _edge_prox(params: EnergyDensityParams, step: float, z: np.ndarray) -> np.ndarray:
    return np.sign(z) * shrink_magnitude(params, step, np.abs(z))


def minimizing_movement_step(
    state: FlowState,
    tau: float,
    params: EnergyDensityParams,
    tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
    rho: Optional[float] = None,
) -> FlowState:
    """
    Advance the state by one step of size tau.

    Raises:
        UsageError: if tau is not positive.
        SolverError: if the relative gap or the primal and dual residuals
            stay above tol; the error carries the last residual.
    """
    if not tau > 0.0:
        raise UsageError(f"time step tau={tau} must be positive")
    tol = tol or settings.TOL
    max_iterations = max_iterations or settings.MAX_INNER_ITERATIONS
    f_old = state.f
    grid = f_old.grid
    weights = grid.edge_weights
    rho = rho or default_penalty(f_old, tau, params)

    grad_old = grid.gradient(f_old.values)
    energy_old = discrete_energy(f_old, params)
    scale = max(1.0, energy_old)
    y = grad_old.copy()
    lam = state.certificate.values.copy() if state.certificate is not None else slope_subgradient(params, grad_old)

    gap = primal = dual = np.inf
    for iteration in range(1, max_iterations + 1):
        rhs = grid.gradient_adjoint(weights * (rho * (y - grad_old) - lam))
        w = grid.solve_coupled(rhs, 1.0 / tau, rho)
        v = grid.stiffness(w) / grid.mass
        f_values = grid.project(grid.embed(grid.free(f_old.values) + v))
        grad = grid.gradient(f_values)

        y_prev = y
        y = _edge_prox(params, 1.0 / rho, grad + lam / rho)
        lam = lam + rho * (grad - y)

        primal = float(np.max(np.abs(grad - y))) / max(1.0, float(np.max(np.abs(grad))))
        dual = rho * float(np.max(np.abs(y - y_prev))) / max(1.0, float(np.max(np.abs(lam))))
        gap = _duality_gap(grid, params, tau, grad_old, grad, v, w, lam) / scale
        if iteration % LOG_EVERY_ITERATIONS == 0:
            logger.debug("ADMM iteration %d: gap %.3e, residuals %.3e %.3e", iteration, gap, primal, dual)
        if gap <= tol and primal <= tol and dual <= tol:
            break
    else:
        raise SolverError("minimizing movement step did not converge", iterations=max_iterations, residual=max(gap, primal, dual))

    f_new = GridFunction(grid, f_values)
    return FlowState(
        time=state.time + tau,
        f=f_new,
        energy=discrete_energy(f_new, params),
        step_count=state.step_count + 1,
        certificate=GridVectorField(grid, lam),
        diagnostics=StepDiagnostics(iterations=iteration, gap=gap, primal_residual=primal, dual_residual=dual, rho=rho),
    )


def _duality_gap(grid, params, tau, grad_old, grad, v, w, lam) -> float:
    """
    P(f) - D(lam) with

        P(f)   = E(f) + <v, M w> / (2 tau),
        D(lam) = <lam, D f_old>_W - tau/2 q^T L q - sum W sigma^#(lam),  q = M^-1 D^T W lam.
    """
    weights = grid.edge_weights
    primal_value = float(np.dot(weights, sigma(params, grad[:, None]))) + float(np.dot(v, grid.mass * w)) / (2.0 * tau)
    q = grid.gradient_adjoint(weights * lam) / grid.mass
    dual_value = (
        float(np.dot(weights * lam, grad_old))
        - 0.5 * tau * float(np.dot(q, grid.stiffness(q)))
        - float(np.dot(weights, sigma_conj(params, lam[:, None])))
    )
    return max(primal_value - dual_value, 0.0)
