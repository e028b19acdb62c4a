"""
Radial functions with derivatives, and the finite-difference path used to
cross-check analytic derivatives.

A "derivable" is any callable f(s, nu=0) returning the nu-th derivative at s;
scipy BSplines already follow this calling convention.
"""
import math
from functools import lru_cache
from typing import Literal, Protocol

import numpy as np
from numpy.polynomial import Polynomial

from app.core.errors import UsageError

Side = Literal["central", "forward", "backward"]

# Accuracy order of the base stencils before extrapolation
BASE_ACCURACY = 4


class Derivable(Protocol):
    def __call__(self, s, nu: int = 0) -> np.ndarray: ...


class PolynomialFunction:
    """Polynomial with exact derivatives of any order."""

    def __init__(self, poly: Polynomial):
        self.poly = poly
        self._derivatives = {0: poly}

    def __call__(self, s, nu: int = 0) -> np.ndarray:
        if nu not in self._derivatives:
            self._derivatives[nu] = self.poly.deriv(nu)
        return self._derivatives[nu](np.asarray(s, dtype=float))


class PowerFunction:
    """s**exponent on s > 0."""

    def __init__(self, exponent: float):
        self.exponent = exponent

    def __call__(self, s, nu: int = 0) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        coeff = math.prod(self.exponent - k for k in range(nu))
        return coeff * s ** (self.exponent - nu)


class SLogS:
    """s log s on s > 0."""

    def __call__(self, s, nu: int = 0) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if nu == 0:
            return s * np.log(s)
        if nu == 1:
            return np.log(s) + 1.0
        # d^nu/ds^nu (s log s) = (-1)^nu (nu-2)! / s^(nu-1) for nu >= 2
        return (-1.0) ** nu * math.factorial(nu - 2) / s ** (nu - 1)


def general_solution_basis(dim: int) -> dict[str, Derivable]:
    """
    The four independent solutions of the radial extension ODE in dimension d:
    s, s^3, s^-(d-1), and s log s when d = 2, s^-(d-3) otherwise.
    """
    basis: dict[str, Derivable] = {
        "s": PowerFunction(1.0),
        "s^3": PowerFunction(3.0),
        f"s^-{dim - 1}": PowerFunction(-(dim - 1.0)),
    }
    if dim == 2:
        basis["s log s"] = SLogS()
    else:
        basis[f"s^-({dim - 3})"] = PowerFunction(-(dim - 3.0))
    return basis


@lru_cache(maxsize=None)
def stencil(order: int, side: Side) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of a BASE_ACCURACY-accurate difference stencil for the given derivative order."""
    if order < 1:
        raise UsageError(f"derivative order {order} must be at least 1")
    if side == "central":
        half = (order + 1) // 2 + 1
        offsets = np.arange(-half, half + 1, dtype=float)
    elif side == "forward":
        offsets = np.arange(0, order + BASE_ACCURACY, dtype=float)
    elif side == "backward":
        offsets = -np.arange(0, order + BASE_ACCURACY, dtype=float)
    else:
        raise UsageError(f"unknown stencil side {side!r}")

    n = offsets.size
    vandermonde = np.array([offsets**k / math.factorial(k) for k in range(n)])
    rhs = np.zeros(n)
    rhs[order] = 1.0
    weights = np.linalg.solve(vandermonde, rhs)
    return offsets, weights


def _difference(func, s: np.ndarray, order: int, step: float, side: Side) -> np.ndarray:
    offsets, weights = stencil(order, side)
    total = np.zeros_like(s)
    for offset, weight in zip(offsets, weights):
        total = total + weight * np.asarray(func(s + offset * step), dtype=float)
    return total / step**order


def richardson_derivative(
    func,
    s,
    order: int,
    step: float = 1e-2,
    side: Side = "central",
    levels: int = 2,
) -> np.ndarray:
    """
    order-th derivative of func at s by finite differences, Richardson extrapolated.

    The base stencil is fourth-order accurate; each halving of the step
    removes one more error term (two orders for the symmetric stencil,
    one for the one-sided ones).
    """
    s = np.asarray(s, dtype=float)
    gain = 2 if side == "central" else 1
    table = [_difference(func, s, order, step / 2**k, side) for k in range(levels + 1)]
    accuracy = BASE_ACCURACY
    while len(table) > 1:
        factor = 2.0**accuracy
        table = [(factor * fine - coarse) / (factor - 1.0) for coarse, fine in zip(table, table[1:])]
        accuracy += gain
    return table[0]
