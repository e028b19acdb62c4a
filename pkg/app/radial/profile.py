"""
Spherically symmetric surfaces f(x) = h(|x|) on the ball of radius r with a
flat facet on the ball of radius r0.

The profile owns h and the flux function H(s) = -1 + mu |h'(s)|^(p-2) h'(s)
on [r0, r], with derivatives up to third order.
"""
import logging
import math
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import make_interp_spline
from scipy.special import gamma

from app.convex.sigma import EnergyDensityParams
from app.core.errors import UsageError
from app.radial.differentiation import Derivable, PolynomialFunction
from app.response_models.configs import ProfileConfig

logger = logging.getLogger(__name__)

# Facets thinner than this fraction of r are rejected
MIN_FACET_FRACTION = 1e-6
SAMPLE_POINTS = 201
SPLINE_DEGREE = 5


def unit_ball_volume(dim: int) -> float:
    """Volume omega_d of the unit ball in R^d."""
    return math.pi ** (dim / 2.0) / gamma(dim / 2.0 + 1.0)


def sphere_area(dim: int, radius: float) -> float:
    """Surface measure of the sphere of the given radius in R^d (2 points when d = 1)."""
    return dim * unit_ball_volume(dim) * radius ** (dim - 1)


def exponent_range_ok(p: float, dim: int) -> bool:
    """Exponent condition of the simplified Dirichlet characterization: any p > 1 for d <= 4, p >= 2d/(d+4) beyond."""
    if dim <= 4:
        return p > 1.0
    return p >= 2.0 * dim / (dim + 4.0)


def _scaled_power(coeff: float, a: np.ndarray, exponent: float) -> np.ndarray:
    """coeff * a**exponent, zero when coeff vanishes (integer p) so that h' = 0 gives no 0 * inf."""
    if coeff == 0.0:
        return np.zeros_like(a)
    return coeff * a**exponent


class RadialProfile:
    """
    Immutable spherically symmetric surface.

    Args:
        r0: facet radius.
        r: domain radius.
        h_outer: derivable for h on [r0, r] with at least five derivatives.
        params: energy density parameters; params.dim is the ambient dimension.
        name: label used in reports.
    """

    def __init__(self, r0: float, r: float, h_outer: Derivable, params: EnergyDensityParams, name: str = "profile"):
        if not (r0 > 0.0 and r > r0):
            raise UsageError(f"need 0 < r0 < r, got r0={r0}, r={r}")
        if r0 < MIN_FACET_FRACTION * r:
            raise UsageError(f"facet radius r0={r0} is degenerate relative to r={r}")
        self._r0 = float(r0)
        self._r = float(r)
        self._h = h_outer
        self._params = params
        self.name = name
        self._validate()

    @property
    def r0(self) -> float:
        return self._r0

    @property
    def r(self) -> float:
        return self._r

    @property
    def params(self) -> EnergyDensityParams:
        return self._params

    @property
    def dim(self) -> int:
        return self._params.dim

    def h(self, s, nu: int = 0) -> np.ndarray:
        """h and its derivatives on [0, r]; flat on the facet."""
        s = np.asarray(s, dtype=float)
        clipped = np.maximum(s, self._r0)
        outer = np.asarray(self._h(clipped, nu), dtype=float)
        if nu == 0:
            return outer
        return np.where(s < self._r0, 0.0, outer)

    def H(self, s, nu: int = 0) -> np.ndarray:
        """
        H(s) = -1 + mu |h'|^(p-2) h' and its derivatives (nu <= 3) on [r0, r].

        Chain rule through phi(v) = |v|^(p-2) v with v = h'.
        """
        if nu > 3:
            raise UsageError(f"H derivatives are available up to order 3, got {nu}")
        s = np.asarray(s, dtype=float)
        mu, p = self._params.mu, self._params.p
        v = [np.asarray(self._h(s, k), dtype=float) for k in range(1, nu + 2)]
        if p == 2.0:
            value = mu * v[nu]
            return value - 1.0 if nu == 0 else value

        a = np.abs(v[0])
        # h' <= 0 on [r0, r]; at r0 the one-sided sign is the one from the right
        sign = np.where(v[0] == 0.0, -1.0, np.sign(v[0]))
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = [
                a ** (p - 1.0) * sign,
                _scaled_power(p - 1.0, a, p - 2.0),
                _scaled_power((p - 1.0) * (p - 2.0), a, p - 3.0) * sign,
                _scaled_power((p - 1.0) * (p - 2.0) * (p - 3.0), a, p - 4.0),
            ]
            if nu == 0:
                return -1.0 + mu * phi[0]
            if nu == 1:
                return mu * phi[1] * v[1]
            if nu == 2:
                return mu * (phi[2] * v[1] ** 2 + phi[1] * v[2])
            return mu * (phi[3] * v[1] ** 3 + 3.0 * phi[2] * v[1] * v[2] + phi[1] * v[3])

    def sample_grid(self, points: int = SAMPLE_POINTS) -> np.ndarray:
        return np.linspace(self._r0, self._r, points)

    def _validate(self) -> None:
        s = self.sample_grid()
        scale = max(1.0, float(np.max(np.abs(self.h(s)))))
        if abs(float(self.h(self._r))) > 1e-10 * scale:
            raise UsageError(f"{self.name}: h(r) = {float(self.h(self._r)):.3e} must vanish")
        slopes = self.h(s[1:-1], 1)
        if np.any(slopes >= 0.0):
            raise UsageError(f"{self.name}: h' must be negative on (r0, r)")
        if abs(float(self.h(self._r0, 1))) > 1e-6 * max(1.0, float(np.max(np.abs(slopes)))):
            raise UsageError(f"{self.name}: h'(r0) must vanish")
        for nu in range(4):
            values = self.H(s, nu)
            if not np.all(np.isfinite(values)):
                raise UsageError(f"{self.name}: H^({nu}) is not finite on [r0, r]; H must be C^3 there")
        self._check_smoothness(s)

    def _check_smoothness(self, s: np.ndarray) -> None:
        """Each supplied derivative of H must agree with a difference quotient of the one below."""
        step = 1e-4 * (self._r - self._r0)
        inner = s[(s > self._r0 + 2 * step) & (s < self._r - 2 * step)]
        for nu in range(3):
            quotient = (self.H(inner + step, nu) - self.H(inner - step, nu)) / (2.0 * step)
            supplied = self.H(inner, nu + 1)
            scale = max(1.0, float(np.max(np.abs(supplied))))
            mismatch = float(np.max(np.abs(quotient - supplied)))
            if mismatch > 1e-4 * scale:
                raise UsageError(f"{self.name}: H^({nu + 1}) disagrees with the derivative of H^({nu}) by {mismatch:.3e}")


def polynomial_profile(
    dim: int,
    r0: float,
    r: float,
    h_prime: Polynomial,
    params: EnergyDensityParams | None = None,
    name: str = "polynomial",
) -> RadialProfile:
    """Profile with polynomial h' on [r0, r] and h(r) = 0."""
    params = params or EnergyDensityParams(mu=1.0, p=2.0, dim=dim)
    if params.dim != dim:
        raise UsageError(f"params.dim={params.dim} does not match dim={dim}")
    h_outer = PolynomialFunction(h_prime.integ(lbnd=r))
    return RadialProfile(r0, r, h_outer, params, name=name)


def example_profile(dim: int, r0: float) -> RadialProfile:
    """
    Worked example with r = 2 r0, p = 2, mu = 1:

        h'(t) = -(3/(5 r0^3)) (t - r0)(t - 2 r0)^2 + ((d-1)/(2 r0^4)) (t - r0)^3 (t - 2 r0)

    on (r0, 2 r0], h' = 0 on the facet and h(2 r0) = 0.
    """
    if dim < 1 or r0 <= 0.0:
        raise UsageError(f"need dim >= 1 and r0 > 0, got dim={dim}, r0={r0}")
    a = Polynomial([-r0, 1.0])
    b = Polynomial([-2.0 * r0, 1.0])
    h_prime = -3.0 / (5.0 * r0**3) * a * b**2 + (dim - 1.0) / (2.0 * r0**4) * a**3 * b
    params = EnergyDensityParams(mu=1.0, p=2.0, dim=dim)
    return polynomial_profile(dim, r0, 2.0 * r0, h_prime, params, name=f"example(d={dim}, r0={r0:g})")


def facet_profile(dim: int, r0: float, r: float, facet_slope: float, mu: float = 1.0) -> RadialProfile:
    """
    p = 2 profile with prescribed H'(r0) = facet_slope < 0 that also meets the outer boundary condition.

    h'(t) = (t - r0)(t - r)(a (t - r) + b (t - r0)^2) with a = H'(r0)/(mu (r - r0)^2)
    and b = (d - 1)/(mu r (r - r0)^3); the example profile is the member r = 2 r0, H'(r0) = -3/(5 r0).
    """
    if facet_slope >= 0.0:
        raise UsageError(f"facet_slope={facet_slope} must be negative for h' < 0 near the facet")
    width = r - r0
    a_coeff = facet_slope / (mu * width**2)
    b_coeff = (dim - 1.0) / (mu * r * width**3)
    left = Polynomial([-r0, 1.0])
    right = Polynomial([-r, 1.0])
    h_prime = left * right * (a_coeff * right + b_coeff * left**2)
    params = EnergyDensityParams(mu=mu, p=2.0, dim=dim)
    return polynomial_profile(dim, r0, r, h_prime, params, name=f"facet(H'(r0)={facet_slope:g})")


def sampled_profile(
    r0: float,
    r: float,
    samples: Sequence[tuple[float, float]],
    params: EnergyDensityParams,
    name: str = "sampled",
) -> RadialProfile:
    """
    Profile interpolated from (s, h) samples by a quintic spline on [r0, r].

    Samples inside the facet must be flat; they are dropped before fitting.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise UsageError("samples must be a list of (s, h) pairs")
    data = data[np.argsort(data[:, 0])]
    facet = data[data[:, 0] < r0]
    outer = data[data[:, 0] >= r0]
    if outer.shape[0] < SPLINE_DEGREE + 1:
        raise UsageError(f"need at least {SPLINE_DEGREE + 1} samples on [r0, r], got {outer.shape[0]}")
    if not (np.isclose(outer[0, 0], r0) and np.isclose(outer[-1, 0], r)):
        raise UsageError("samples must include s = r0 and s = r")
    if facet.size and np.ptp(np.append(facet[:, 1], outer[0, 1])) > 1e-12 * max(1.0, abs(outer[0, 1])):
        raise UsageError("h must be constant on the facet")

    spline = make_interp_spline(outer[:, 0], outer[:, 1], k=SPLINE_DEGREE)
    logger.debug("fitted quintic spline through %d samples", outer.shape[0])
    return RadialProfile(r0, r, spline, params, name=name)


def profile_from_config(config: ProfileConfig) -> RadialProfile:
    """Build the profile described by a structured-text profile record."""
    if config.kind == "example":
        return example_profile(config.dim, config.r0)
    if config.kind == "facet":
        return facet_profile(config.dim, config.r0, config.outer_radius, config.facet_slope, mu=config.mu)
    params = EnergyDensityParams(mu=config.mu, p=config.p, dim=config.dim)
    return sampled_profile(config.r0, config.outer_radius, config.samples, params)
