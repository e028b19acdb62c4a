"""
Brute-force oracle for the conjugate density.

The sup of <y, x> - sigma(x) is located by scanning a grid over the ball
|x| <= radius, then refining a shrinking window around the best node.
The maximand is concave, so the local refinement keeps the global maximizer.
"""
import logging
from dataclasses import dataclass

import numpy as np

from app.convex.sigma import EnergyDensityParams, as_vector, sigma
from app.core.errors import UsageError

logger = logging.getLogger(__name__)

# Nodes per axis for the scan; odd so the window centre is always a node
NODES_PER_AXIS = {1: 201, 2: 61, 3: 25}
DEFAULT_NODES = 11
WINDOW_CELLS = 2


@dataclass(frozen=True)
class OracleResult:
    value: float
    maximizer: np.ndarray
    boundary_hit: bool
    levels: int


def apriori_radius(params: EnergyDensityParams, y) -> float:
    """
    Radius containing every maximizer of <y, x> - sigma(x).

    A nonnegative value needs |y||x| >= (mu/p)|x|^p, so |x| <= (p|y|/mu)^(1/(p-1)).
    """
    r = float(np.linalg.norm(as_vector(params, y)))
    return 1.1 * (params.p * r / params.mu) ** (1.0 / (params.p - 1.0)) + 1.0


def _grid(center: np.ndarray, half_width: float, nodes: int) -> np.ndarray:
    axis = np.linspace(-half_width, half_width, nodes)
    mesh = np.meshgrid(*([axis] * center.size), indexing="ij")
    return center + np.stack([m.ravel() for m in mesh], axis=-1)


def sigma_conj_bruteforce(
    params: EnergyDensityParams,
    y,
    radius: float,
    refinement: int = 8,
    allow_boundary: bool = False,
) -> OracleResult:
    """
    Grid maximization of <y, x> - sigma(x) over |x| <= radius.

    Each refinement level rescans a window of WINDOW_CELLS cells around the
    current best node, which stays in the new grid, so the value is
    nondecreasing in the number of levels.

    Raises:
        UsageError: if the coarse maximizer touches the boundary of the ball
            (the radius is too small) and allow_boundary is False.
    """
    y = as_vector(params, y)
    if radius <= 0.0:
        raise UsageError(f"oracle radius={radius} must be positive")
    if refinement < 0:
        raise UsageError(f"refinement={refinement} must be nonnegative")

    nodes = NODES_PER_AXIS.get(params.dim, DEFAULT_NODES)
    cell = 2.0 * radius / (nodes - 1)

    points = _grid(np.zeros(params.dim), radius, nodes)
    points = points[np.linalg.norm(points, axis=-1) <= radius]
    values = points @ y - sigma(params, points)
    best = int(np.argmax(values))
    center, best_value = points[best], float(values[best])
    boundary_hit = bool(np.linalg.norm(center) > radius - cell)

    if boundary_hit and not allow_boundary:
        raise UsageError(
            f"oracle maximizer reached the boundary |x|={np.linalg.norm(center):.4g} "
            f"of radius {radius:.4g}; increase the radius"
        )

    for _ in range(refinement):
        half_width = WINDOW_CELLS * cell
        cell = 2.0 * half_width / (nodes - 1)
        points = _grid(center, half_width, nodes)
        points = points[np.linalg.norm(points, axis=-1) <= radius]
        values = points @ y - sigma(params, points)
        best = int(np.argmax(values))
        if values[best] >= best_value:
            center, best_value = points[best], float(values[best])

    logger.debug("oracle value %.12g at |x|=%.6g", best_value, np.linalg.norm(center))
    return OracleResult(value=best_value, maximizer=center, boundary_hit=boundary_hit, levels=refinement)
