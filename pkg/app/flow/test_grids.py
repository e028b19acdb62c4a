import numpy as np
import pytest
from scipy.integrate import quad

from app.convex.sigma import EnergyDensityParams, sigma
from app.core.errors import UsageError
from app.flow.grids import (
    GridFunction,
    GridVectorField,
    PeriodicGrid,
    RadialGrid,
    discrete_energy,
    hat_data,
    inverse_laplacian,
    laplacian,
    neg_sobolev_inner,
    neg_sobolev_norm,
    sample_profile,
    sine_data,
)
from app.radial.profile import example_profile, unit_ball_volume


def _random_function(grid, seed):
    rng = np.random.default_rng(seed)
    return GridFunction(grid, grid.project(rng.normal(size=grid.n)))


GRIDS = [
    pytest.param(lambda: PeriodicGrid(64, 2.0), id="periodic"),
    pytest.param(lambda: RadialGrid(1.0, 2.0, 41, 2), id="radial-2d"),
    pytest.param(lambda: RadialGrid(0.7, 2.0, 33, 3), id="radial-3d"),
]


@pytest.mark.parametrize("make_grid", GRIDS)
def test_inverse_laplacian_round_trip(make_grid):
    grid = make_grid()
    a = _random_function(grid, 1)
    back = laplacian(inverse_laplacian(a))
    np.testing.assert_allclose(back, a.free, atol=1e-10 * max(1.0, float(np.max(np.abs(a.free)))))


@pytest.mark.parametrize("make_grid", GRIDS)
def test_neg_sobolev_inner_is_symmetric_and_positive(make_grid):
    grid = make_grid()
    a = _random_function(grid, 2)
    b = _random_function(grid, 3)
    ab = neg_sobolev_inner(a, b)
    ba = neg_sobolev_inner(b, a)
    assert ab == pytest.approx(ba, rel=1e-12, abs=1e-14)
    assert neg_sobolev_inner(a, a) > 0.0
    assert neg_sobolev_inner(GridFunction.zeros(grid), b) == 0.0
    assert neg_sobolev_norm(a.scaled(3.0)) == pytest.approx(3.0 * neg_sobolev_norm(a), rel=1e-12)


@pytest.mark.parametrize("make_grid", GRIDS)
def test_coupled_solve_inverts_operator(make_grid):
    grid = make_grid()
    rng = np.random.default_rng(4)
    rhs = rng.normal(size=grid.n_free)
    x = grid.solve_coupled(rhs, 10.0, 0.3)
    applied = 10.0 * grid.mass * x + 0.3 * grid.stiffness(grid.stiffness(x) / grid.mass)
    np.testing.assert_allclose(applied, rhs, atol=1e-7 * float(np.max(np.abs(rhs))))


def test_sine_is_first_periodic_mode():
    grid = PeriodicGrid(128, 1.0)
    f = sine_data(grid)
    expected = 4.0 / grid.spacing**2 * np.sin(np.pi / grid.n) ** 2
    np.testing.assert_allclose(laplacian(f), expected * f.values, atol=1e-9)
    assert grid.smallest_eigenvalue() == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx((2.0 * np.pi) ** 2, rel=1e-3)


def test_radial_smallest_eigenvalue_matches_dense():
    grid = RadialGrid(1.0, 2.0, 30, 2)
    stiffness = np.column_stack([grid.stiffness(e) for e in np.eye(grid.n_free)])
    dense = np.linalg.eigvals(stiffness / grid.mass[:, None])
    assert grid.smallest_eigenvalue() == pytest.approx(float(np.min(dense.real)), rel=1e-8)


def test_radial_grid_layout():
    grid = RadialGrid(1.0, 2.0, 21, 3)
    assert grid.nodes[0] == 0.0
    assert grid.nodes[-1] == 2.0
    assert grid.nodes[grid.facet_index] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diff(grid.nodes) > 0.0)
    ball = unit_ball_volume(3) * 8.0
    assert float(np.sum(grid.edge_weights)) == pytest.approx(ball, rel=1e-12)
    assert float(np.sum(grid.mass)) < ball


def test_divergence_is_adjoint_of_gradient():
    grid = RadialGrid(1.0, 2.0, 25, 2)
    rng = np.random.default_rng(5)
    g = GridVectorField(grid, rng.normal(size=grid.n_edges))
    phi = _random_function(grid, 6)
    lhs = float(np.dot(g.divergence(), grid.mass * phi.free))
    rhs = -float(np.dot(g.values, grid.edge_weights * grid.gradient(phi.values)))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_hat_energy():
    grid = PeriodicGrid(64, 2.0)
    params = EnergyDensityParams(mu=1.0, p=2.0, dim=1)
    f = hat_data(grid)
    np.testing.assert_allclose(np.abs(grid.gradient(f.values)), 1.0, atol=1e-12)
    assert discrete_energy(f, params) == pytest.approx(1.5 * 2.0, rel=1e-12)


def test_radial_example_energy_against_quadrature():
    profile = example_profile(2, 1.0)
    grid = RadialGrid(1.0, 2.0, 20001, 2)
    f = sample_profile(grid, profile)

    def integrand(s):
        return float(sigma(profile.params, np.array([float(profile.h(s, 1))]))) * 2.0 * np.pi * s

    exact, _ = quad(integrand, 1.0, 2.0, epsabs=1e-13, epsrel=1e-13)
    assert discrete_energy(f, profile.params) == pytest.approx(exact, rel=1e-6)


def test_grid_function_checks():
    periodic = PeriodicGrid(8)
    with pytest.raises(UsageError):
        GridFunction(periodic, np.ones(8))
    with pytest.raises(UsageError):
        GridFunction(periodic, np.zeros(7))
    with pytest.raises(UsageError):
        GridFunction(periodic, np.array([np.nan] + [0.0] * 7))
    radial = RadialGrid(1.0, 2.0, 8, 2)
    with pytest.raises(UsageError):
        GridFunction(radial, np.ones(8))
    with pytest.raises(UsageError):
        GridVectorField(radial, np.zeros(8))


def test_mixed_grids_are_rejected():
    a = GridFunction.zeros(PeriodicGrid(8))
    b = GridFunction.zeros(PeriodicGrid(16))
    c = GridFunction.zeros(RadialGrid(1.0, 2.0, 8, 2))
    with pytest.raises(UsageError):
        neg_sobolev_inner(a, b)
    with pytest.raises(UsageError):
        a - c
    assert neg_sobolev_inner(a, GridFunction.zeros(PeriodicGrid(8))) == 0.0


def test_periodic_solve_rejects_nonzero_mean():
    grid = PeriodicGrid(16)
    with pytest.raises(UsageError):
        grid.solve_stiffness(np.ones(16))


@pytest.mark.parametrize(
    "args",
    [(3, 1.0), (8, 0.0), (8, -1.0)],
)
def test_periodic_grid_rejects_bad_sizes(args):
    with pytest.raises(UsageError):
        PeriodicGrid(*args)


@pytest.mark.parametrize(
    "args",
    [(1.0, 2.0, 3, 2), (2.0, 1.0, 8, 2), (1.0, 2.0, 8, 0)],
)
def test_radial_grid_rejects_bad_layout(args):
    with pytest.raises(UsageError):
        RadialGrid(*args)
