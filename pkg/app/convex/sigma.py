"""
Exact calculus for the singular energy density

    sigma(y) = |y| + (mu/p) |y|^p

and its dual objects: conjugate, subdifferentials, proximal map.
"""
import logging
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import SolverError, UsageError

logger = logging.getLogger(__name__)

# Below this norm a point is treated as the origin when branching on subdifferentials
ZERO_THRESHOLD = 1e-14

PROX_TOL = 1e-12
PROX_MAX_ITERATIONS = 100


class EnergyDensityParams(BaseModel):
    """Parameters (mu, p, d) of the energy density."""

    model_config = ConfigDict(frozen=True)

    mu: float = Field(..., gt=0.0, description="energy weight of the power term")
    p: float = Field(..., gt=1.0, description="exponent of the power term, in (1, inf)")
    dim: int = Field(1, ge=1, description="dimension of the gradient vector")

    @model_validator(mode="after")
    def _finite(self) -> "EnergyDensityParams":
        if not (np.isfinite(self.mu) and np.isfinite(self.p)):
            raise ValueError("mu and p must be finite")
        return self

    @property
    def q(self) -> float:
        """Conjugate exponent p/(p-1)."""
        return conjugate_exponent(self.p)


def conjugate_exponent(p: float) -> float:
    """Return q with 1/p + 1/q = 1."""
    if p <= 1.0:
        raise UsageError(f"exponent p={p} must exceed 1")
    return p / (p - 1.0)


@dataclass(frozen=True)
class SubdiffValue:
    """Either a single vector or the closed unit ball {y : |y| <= 1}."""

    kind: Literal["singleton", "closed_unit_ball"]
    point: Optional[np.ndarray] = field(default=None, compare=False)

    @classmethod
    def singleton(cls, point: np.ndarray) -> "SubdiffValue":
        return cls(kind="singleton", point=np.asarray(point, dtype=float))

    @classmethod
    def closed_unit_ball(cls) -> "SubdiffValue":
        return cls(kind="closed_unit_ball")

    @property
    def is_ball(self) -> bool:
        return self.kind == "closed_unit_ball"

    def distance(self, y: np.ndarray) -> float:
        """Euclidean distance from y to this set."""
        y = np.asarray(y, dtype=float)
        if self.is_ball:
            return max(0.0, float(np.linalg.norm(y)) - 1.0)
        return float(np.linalg.norm(y - self.point))

    def contains(self, y: np.ndarray, tol: float = 1e-12) -> bool:
        return self.distance(y) <= tol


def as_vector(params: EnergyDensityParams, y) -> np.ndarray:
    """Validate a point of R^d against the params' dimension."""
    vec = np.atleast_1d(np.asarray(y, dtype=float))
    if vec.shape != (params.dim,):
        raise UsageError(f"expected a vector of shape ({params.dim},), got {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise UsageError("vector entries must be finite")
    return vec


def _norm(y) -> np.ndarray:
    return np.linalg.norm(np.asarray(y, dtype=float), axis=-1)


def sigma(params: EnergyDensityParams, y) -> float | np.ndarray:
    """
    Energy density |y| + (mu/p)|y|^p.

    Accepts a single vector of shape (d,) or a stack of shape (..., d).
    """
    r = _norm(y)
    return r + params.mu / params.p * r**params.p


def sigma_conj(params: EnergyDensityParams, y) -> float | np.ndarray:
    """Conjugate density: 0 on the unit ball, (1-1/p) mu^(-1/(p-1)) (|y|-1)^(p/(p-1)) outside."""
    r = _norm(y)
    excess = np.maximum(r - 1.0, 0.0)
    return (1.0 - 1.0 / params.p) * params.mu ** (-1.0 / (params.p - 1.0)) * excess**params.q


def subdiff_sigma(params: EnergyDensityParams, x) -> SubdiffValue:
    x = as_vector(params, x)
    r = float(np.linalg.norm(x))
    if r < ZERO_THRESHOLD:
        return SubdiffValue.closed_unit_ball()
    return SubdiffValue.singleton(x / r + params.mu * r ** (params.p - 2.0) * x)


def subdiff_sigma_conj(params: EnergyDensityParams, y) -> SubdiffValue:
    """Always single valued; zero on the closed unit ball."""
    y = as_vector(params, y)
    r = float(np.linalg.norm(y))
    if r <= 1.0:
        return SubdiffValue.singleton(np.zeros_like(y))
    scale = params.mu ** (-1.0 / (params.p - 1.0)) * (r - 1.0) ** (1.0 / (params.p - 1.0))
    return SubdiffValue.singleton(scale * y / r)


def fenchel_young_gap(params: EnergyDensityParams, x, y) -> float:
    """sigma(x) + sigma^#(y) - <x, y>; nonnegative, zero iff y is a subgradient at x."""
    x = as_vector(params, x)
    y = as_vector(params, y)
    return float(sigma(params, x) + sigma_conj(params, y) - x @ y)


def distance_to_subdiff(params: EnergyDensityParams, x, y) -> float:
    """Distance from y to the set subdiff_sigma(x)."""
    return subdiff_sigma(params, x).distance(as_vector(params, y))


def slope_subgradient(params: EnergyDensityParams, slopes) -> np.ndarray:
    """Element of the subdifferential at each scalar slope, zero on the facet."""
    slopes = np.asarray(slopes, dtype=float)
    a = np.abs(slopes)
    g = np.sign(slopes) * (1.0 + params.mu * a ** (params.p - 1.0))
    return np.where(a < ZERO_THRESHOLD, 0.0, g)


def slope_subdiff_distance(params: EnergyDensityParams, slopes, g, slope_tol: float = 0.0) -> np.ndarray:
    """
    distance_to_subdiff for stacks of scalar slopes (one-dimensional gradients).

    With slope_tol > 0 the distance is to the union of the subdifferentials
    over [x - slope_tol, x + slope_tol], an interval by monotonicity.
    """
    x = np.asarray(slopes, dtype=float)
    g = np.asarray(g, dtype=float)
    delta = max(slope_tol, ZERO_THRESHOLD)
    mu, p = params.mu, params.p
    left, right = x - delta, x + delta
    lo = np.where(left > 0.0, 1.0 + mu * np.abs(left) ** (p - 1.0), -1.0 - mu * np.abs(left) ** (p - 1.0))
    hi = np.where(right < 0.0, -1.0 - mu * np.abs(right) ** (p - 1.0), 1.0 + mu * np.abs(right) ** (p - 1.0))
    return np.maximum(np.maximum(lo - g, g - hi), 0.0)


def shrink_magnitude(params: EnergyDensityParams, lam, r) -> np.ndarray:
    """
    Radial part of the proximal map, vectorized over lam and r.

    Returns t >= 0 with t = 0 where r <= lam, otherwise the root of
    t + lam*mu*t^(p-1) + lam - r = 0 on the bracket [0, r - lam].
    """
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    lam, r = np.broadcast_arrays(lam, r)
    t = np.zeros(r.shape)
    active = r > lam
    if not np.any(active):
        return t

    mu, p = params.mu, params.p
    lam_a = lam[active]
    r_a = r[active]
    if p == 2.0:
        t[active] = (r_a - lam_a) / (1.0 + lam_a * mu)
        return t

    lo = np.zeros_like(r_a)
    hi = r_a - lam_a
    # p = 2 guess, kept strictly inside the bracket
    x = np.clip((r_a - lam_a) / (1.0 + lam_a * mu), 0.5 * hi * 1e-3, hi)
    converged = np.zeros(r_a.shape, dtype=bool)
    residual = np.full(r_a.shape, np.inf)
    resolution = 4.0 * np.finfo(float).eps * np.maximum(r_a, 1.0)
    for _ in range(PROX_MAX_ITERATIONS):
        phi = x + lam_a * mu * x ** (p - 1.0) + lam_a - r_a
        dphi = 1.0 + lam_a * mu * (p - 1.0) * x ** (p - 2.0)
        residual = np.abs(phi)
        stalled = ((hi - lo) <= resolution) | (np.abs(phi / dphi) <= resolution)
        converged = (residual <= PROX_TOL * np.minimum(lam_a, 1.0)) | stalled
        if np.all(converged):
            break
        hi = np.where(phi > 0.0, x, hi)
        lo = np.where(phi <= 0.0, x, lo)
        newton = x - phi / dphi
        inside = (newton > lo) & (newton < hi) & np.isfinite(newton)
        x = np.where(converged, x, np.where(inside, newton, 0.5 * (lo + hi)))
    else:
        worst = float(np.max(np.where(converged, 0.0, residual)))
        raise SolverError("prox root-find did not converge", PROX_MAX_ITERATIONS, worst)

    t[active] = x
    return t


def prox_sigma(params: EnergyDensityParams, lam: float, z) -> np.ndarray:
    """
    Proximal map of lam*sigma: argmin_w lam*sigma(w) + |w - z|^2 / 2.

    Raises:
        UsageError: if lam is not positive.
        SolverError: if the scalar root-find does not converge.
    """
    if not lam > 0.0:
        raise UsageError(f"prox step lambda={lam} must be positive")
    z = as_vector(params, z)
    r = float(np.linalg.norm(z))
    if r <= lam:
        return np.zeros_like(z)
    t = float(shrink_magnitude(params, lam, r))
    return t * z / r
