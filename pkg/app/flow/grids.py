"""
Discrete negative-Sobolev geometry on two grid flavors.

Both flavors share one structure: node masses M, edge weights W, a forward
difference D from nodes to edges, and the stiffness matrix L = D^T W D.
The discrete Laplacian is A = M^-1 L and

    <a, b>_{H^-1} = <A^-1 a, b>_M = (L^-1 M a)^T M b.

Periodic: uniform cells on R / omega Z, mean-zero functions, circulant
solves by FFT. Radial: nodes on [0, r] containing r0, weight s^(d-1) through
exact shell volumes, value at r pinned to 0, banded solves.
"""
import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal, solveh_banded

from app.convex.sigma import EnergyDensityParams, sigma
from app.core.errors import UsageError
from app.radial.profile import RadialProfile, unit_ball_volume

logger = logging.getLogger(__name__)

Flavor = Literal["periodic", "radial"]

MIN_NODES = 4
MEAN_ZERO_TOL = 1e-12


class PeriodicGrid:
    """n uniform cells of size omega/n on the one-dimensional torus."""

    flavor: Flavor = "periodic"

    def __init__(self, n: int, omega: float = 1.0):
        if n < MIN_NODES:
            raise UsageError(f"need n >= {MIN_NODES} cells, got {n}")
        if not omega > 0.0:
            raise UsageError(f"period omega={omega} must be positive")
        self.n = int(n)
        self.omega = float(omega)
        self.spacing = self.omega / self.n
        self.nodes = self.spacing * np.arange(self.n)
        self.mass = np.full(self.n, self.spacing)
        self.edge_weights = np.full(self.n, self.spacing)
        # eigenvalues of L on the Fourier modes kept by rfft
        k = np.arange(self.n // 2 + 1)
        self._stiffness_eigs = 4.0 / self.spacing * np.sin(np.pi * k / self.n) ** 2

    @property
    def n_free(self) -> int:
        return self.n

    @property
    def n_edges(self) -> int:
        return self.n

    def free(self, values: np.ndarray) -> np.ndarray:
        return values

    def embed(self, free: np.ndarray) -> np.ndarray:
        return free

    def gradient(self, values: np.ndarray) -> np.ndarray:
        return (np.roll(values, -1) - values) / self.spacing

    def gradient_adjoint(self, edges: np.ndarray) -> np.ndarray:
        """D^T on edge values."""
        return (np.roll(edges, 1) - edges) / self.spacing

    def stiffness(self, free: np.ndarray) -> np.ndarray:
        """L u."""
        return (2.0 * free - np.roll(free, 1) - np.roll(free, -1)) / self.spacing

    def solve_stiffness(self, rhs: np.ndarray) -> np.ndarray:
        """L^-1 on mean-zero right-hand sides; the result has mean zero."""
        scale = max(1.0, float(np.max(np.abs(rhs))))
        if abs(float(np.sum(rhs))) > MEAN_ZERO_TOL * self.n * scale:
            raise UsageError("periodic Laplacian solves need mean-zero data")
        coeffs = np.fft.rfft(rhs)
        coeffs[0] = 0.0
        coeffs[1:] /= self._stiffness_eigs[1:]
        return np.fft.irfft(coeffs, n=self.n)

    def solve_coupled(self, rhs: np.ndarray, alpha: float, beta: float) -> np.ndarray:
        """(alpha M + beta L M^-1 L)^-1 rhs; alpha > 0."""
        symbol = alpha * self.spacing + beta * self._stiffness_eigs**2 / self.spacing
        return np.fft.irfft(np.fft.rfft(rhs) / symbol, n=self.n)

    def smallest_eigenvalue(self) -> float:
        """Smallest nonzero eigenvalue of A."""
        return float(self._stiffness_eigs[1] / self.spacing)

    def project(self, values: np.ndarray) -> np.ndarray:
        return values - np.mean(values)


class RadialGrid:
    """
    Nodes 0 = s_0 < ... < s_{n-1} = r with r0 a node; uniform on [0, r0] and on [r0, r].

    The last node carries the Dirichlet value 0 and is not an unknown.
    """

    flavor: Flavor = "radial"

    def __init__(self, r0: float, r: float, n: int, dim: int):
        if n < MIN_NODES:
            raise UsageError(f"need n >= {MIN_NODES} radial nodes, got {n}")
        if not (0.0 < r0 < r):
            raise UsageError(f"need 0 < r0 < r, got r0={r0}, r={r}")
        if dim < 1:
            raise UsageError(f"dimension {dim} must be at least 1")
        self.r0 = float(r0)
        self.r = float(r)
        self.n = int(n)
        self.dim = int(dim)

        inner = min(max(int(round(r0 / r * (n - 1))), 1), n - 2)
        self.facet_index = inner
        self.nodes = np.concatenate([np.linspace(0.0, r0, inner + 1), np.linspace(r0, r, n - inner)[1:]])
        self.nodes[-1] = self.r
        widths = np.diff(self.nodes)
        self.spacing = float(np.max(widths))
        self._widths = widths

        omega_d = unit_ball_volume(self.dim)
        # exact shell volumes between neighbouring nodes and around each free node
        self.edge_weights = omega_d * (self.nodes[1:] ** self.dim - self.nodes[:-1] ** self.dim)
        bounds = np.concatenate([[0.0], 0.5 * (self.nodes[:-1] + self.nodes[1:])])
        self.mass = omega_d * (bounds[1:] ** self.dim - bounds[:-1] ** self.dim)

        coupling = self.edge_weights / widths**2
        self._diag = coupling + np.concatenate([[0.0], coupling[:-1]])
        self._off = -coupling[:-1]

    @property
    def n_free(self) -> int:
        return self.n - 1

    @property
    def n_edges(self) -> int:
        return self.n - 1

    def free(self, values: np.ndarray) -> np.ndarray:
        return values[:-1]

    def embed(self, free: np.ndarray) -> np.ndarray:
        return np.append(free, 0.0)

    def gradient(self, values: np.ndarray) -> np.ndarray:
        return np.diff(values) / self._widths

    def gradient_adjoint(self, edges: np.ndarray) -> np.ndarray:
        """D^T on edge values, restricted to the free nodes."""
        flux = edges / self._widths
        out = -flux
        out[1:] += flux[:-1]
        return out

    def stiffness(self, free: np.ndarray) -> np.ndarray:
        out = self._diag * free
        out[:-1] += self._off * free[1:]
        out[1:] += self._off * free[:-1]
        return out

    def solve_stiffness(self, rhs: np.ndarray) -> np.ndarray:
        banded = np.vstack([np.concatenate([[0.0], self._off]), self._diag])
        return solveh_banded(banded, rhs)

    def solve_coupled(self, rhs: np.ndarray, alpha: float, beta: float) -> np.ndarray:
        """(alpha M + beta L M^-1 L)^-1 rhs as a pentadiagonal SPD solve."""
        d, o, m = self._diag, self._off, self.mass
        diag = d**2 / m
        diag[1:] += o**2 / m[:-1]
        diag[:-1] += o**2 / m[1:]
        super1 = d[:-1] * o / m[:-1] + o * d[1:] / m[1:]
        super2 = o[:-1] * o[1:] / m[1:-1]
        banded = np.vstack(
            [
                np.concatenate([[0.0, 0.0], beta * super2]),
                np.concatenate([[0.0], beta * super1]),
                alpha * m + beta * diag,
            ]
        )
        return solveh_banded(banded, rhs)

    def smallest_eigenvalue(self) -> float:
        """Smallest eigenvalue of A, from the symmetric form M^-1/2 L M^-1/2."""
        root = np.sqrt(self.mass)
        eigs = eigvalsh_tridiagonal(
            self._diag / self.mass, self._off / (root[:-1] * root[1:]), select="i", select_range=(0, 0)
        )
        return float(eigs[0])

    def project(self, values: np.ndarray) -> np.ndarray:
        out = np.array(values, dtype=float)
        out[-1] = 0.0
        return out


Grid = PeriodicGrid | RadialGrid


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal values on a grid; mean zero (periodic) or zero at s = r (radial)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise UsageError(f"expected {self.grid.n} nodal values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise UsageError("grid function values must be finite")
        scale = max(1.0, float(np.max(np.abs(values))))
        if self.grid.flavor == "periodic" and abs(float(np.sum(values))) > MEAN_ZERO_TOL * self.grid.n * scale:
            raise UsageError(f"periodic grid functions must have mean zero, sum = {float(np.sum(values)):.3e}")
        if self.grid.flavor == "radial" and values[-1] != 0.0:
            raise UsageError("radial grid functions must vanish at s = r")
        object.__setattr__(self, "values", values)

    @property
    def flavor(self) -> Flavor:
        return self.grid.flavor

    @property
    def free(self) -> np.ndarray:
        return self.grid.free(self.values)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def from_free(cls, grid: Grid, free: np.ndarray) -> "GridFunction":
        return cls(grid, grid.project(grid.embed(free)))

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        check_same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        check_same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def scaled(self, factor: float) -> "GridFunction":
        return GridFunction(self.grid, factor * self.values)

    def gradient(self) -> "GridVectorField":
        return GridVectorField(self.grid, self.grid.gradient(self.values))


@dataclass(frozen=True, eq=False)
class GridVectorField:
    """One value per edge: discrete gradients, flux witnesses."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_edges,):
            raise UsageError(f"expected {self.grid.n_edges} edge values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise UsageError("vector field entries must be finite")
        object.__setattr__(self, "values", values)

    def divergence(self) -> np.ndarray:
        """div g on the free nodes: <div g, phi>_M = -<g, D phi>_W."""
        return -self.grid.gradient_adjoint(self.grid.edge_weights * self.values) / self.grid.mass


def check_same_grid(a, b) -> None:
    if a.grid is not b.grid:
        if a.grid.flavor != b.grid.flavor:
            raise UsageError(f"flavor mismatch: {a.grid.flavor} vs {b.grid.flavor}")
        if a.grid.n != b.grid.n or not np.array_equal(a.grid.nodes, b.grid.nodes):
            raise UsageError("grid functions live on different grids")


def laplacian(f: GridFunction) -> np.ndarray:
    """A f = M^-1 L f on the free nodes."""
    return f.grid.stiffness(f.free) / f.grid.mass


def inverse_laplacian(a: GridFunction) -> GridFunction:
    """A^-1 a with the flavor's side condition (mean zero, or zero at s = r)."""
    grid = a.grid
    return GridFunction.from_free(grid, grid.solve_stiffness(grid.mass * a.free))


def neg_sobolev_inner(a: GridFunction, b: GridFunction) -> float:
    """<(-Delta)^-1 a, b> in the mass-weighted pairing; symmetric positive definite."""
    check_same_grid(a, b)
    potential = a.grid.solve_stiffness(a.grid.mass * a.free)
    return float(np.dot(potential, a.grid.mass * b.free))


def neg_sobolev_norm(a: GridFunction) -> float:
    return float(np.sqrt(max(neg_sobolev_inner(a, a), 0.0)))


def discrete_energy(f: GridFunction, params: EnergyDensityParams) -> float:
    """Sum over edges of sigma(slope) times the edge measure (cell length or shell volume)."""
    slopes = f.grid.gradient(f.values)
    return float(np.dot(f.grid.edge_weights, sigma(params, slopes[:, None])))


def sample_profile(grid: RadialGrid, profile: RadialProfile) -> GridFunction:
    """h at the radial nodes."""
    if not (np.isclose(grid.r0, profile.r0) and np.isclose(grid.r, profile.r)):
        raise UsageError(f"grid radii ({grid.r0}, {grid.r}) do not match the profile ({profile.r0}, {profile.r})")
    values = np.asarray(profile.h(grid.nodes), dtype=float)
    values[-1] = 0.0
    return GridFunction(grid, values)


def sine_data(grid: PeriodicGrid, amplitude: float = 1.0) -> GridFunction:
    return GridFunction(grid, grid.project(amplitude * np.sin(2.0 * np.pi * grid.nodes / grid.omega)))


def hat_data(grid: PeriodicGrid, amplitude: float = 1.0) -> GridFunction:
    """Triangle wave with |f'| = amplitude on every cell."""
    x = grid.nodes / grid.omega
    values = amplitude * grid.omega * (0.25 - np.abs(x - 0.5))
    return GridFunction(grid, grid.project(values))
