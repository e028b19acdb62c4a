"""
Tests for discrete subgradient certificates.
These check:
1. The trivial certificate at zero and certificates built from a field
2. Certificates returned by the minimizing-movement solver
3. The canonical certificate of the radial example under refinement
4. Detection of a certificate that leaves the subdifferential
"""
import numpy as np
import pytest

from app.convex.sigma import EnergyDensityParams
from app.core.errors import UsageError
from app.flow.certificate import (
    SubgradientCertificate,
    canonical_certificate,
    minimal_section_bound,
    random_directions,
    scaled_on_facet,
    verify_certificate,
)
from app.flow.grids import GridFunction, GridVectorField, PeriodicGrid, RadialGrid, sample_profile, sine_data
from app.flow.solver import FlowState, minimizing_movement_step
from app.radial.canonical import canonical_restriction, solve_facet_extension
from app.radial.profile import example_profile

PARAMS = EnergyDensityParams(mu=1.0, p=2.0, dim=1)


def _canonical(n):
    profile = example_profile(2, 1.0)
    grid = RadialGrid(profile.r0, profile.r, n, profile.dim)
    restriction = canonical_restriction(profile)
    cert = canonical_certificate(grid, restriction, solve_facet_extension(profile))
    return profile, grid, cert


def test_zero_certificate_at_zero():
    grid = PeriodicGrid(32)
    zero = GridFunction.zeros(grid)
    cert = SubgradientCertificate(GridVectorField(grid, np.zeros(32)), zero)
    report = verify_certificate(zero, cert, PARAMS, samples=20)
    assert report.max_residual() == 0.0
    assert report.directions == 20
    assert report.worst_slack < 0.0


def test_field_certificate_has_no_divergence_residual():
    grid = PeriodicGrid(32)
    g = GridVectorField(grid, 0.5 * np.cos(2.0 * np.pi * grid.nodes))
    cert = SubgradientCertificate.from_field(g)
    report = verify_certificate(GridFunction.zeros(grid), cert, PARAMS, samples=20)
    assert report.divergence_residual <= 1e-12
    assert report.pointwise_inclusion == 0.0
    assert report.worst_violation <= 1e-12


def test_random_directions_are_admissible():
    for grid in (PeriodicGrid(64), RadialGrid(1.0, 2.0, 33, 2)):
        directions = random_directions(grid, 6, seed=3)
        assert len(directions) == 6
        assert all(np.max(np.abs(d.values)) == pytest.approx(1e-3) for d in directions[::2])
        assert all(np.max(np.abs(d.values)) == pytest.approx(1.0) for d in directions[1::2])
        again = random_directions(grid, 6, seed=3)
        assert all(np.array_equal(a.values, b.values) for a, b in zip(directions, again))


def test_solver_certificate_passes():
    tol = 1e-7
    grid = PeriodicGrid(64)
    state = FlowState.initial(sine_data(grid, 0.5), PARAMS)
    tau = 1e-3
    after = minimizing_movement_step(state, tau, PARAMS, tol=tol)
    cert = SubgradientCertificate.from_step(state, after, tau)
    slopes = grid.gradient(after.f.values)
    slope_tol = tol * max(1.0, float(np.max(np.abs(slopes))))
    report = verify_certificate(after.f, cert, PARAMS, samples=100, slope_tol=slope_tol)
    assert report.pointwise_inclusion <= 10 * tol
    assert report.worst_violation <= 10 * tol
    assert report.divergence_residual <= 10 * tol


def test_radial_solver_certificate_passes():
    tol = 1e-7
    profile = example_profile(2, 1.0)
    grid = RadialGrid(1.0, 2.0, 65, 2)
    state = FlowState.initial(sample_profile(grid, profile), profile.params)
    tau = 5e-3
    after = minimizing_movement_step(state, tau, profile.params, tol=tol)
    cert = SubgradientCertificate.from_step(state, after, tau)
    slopes = grid.gradient(after.f.values)
    slope_tol = tol * max(1.0, float(np.max(np.abs(slopes))))
    report = verify_certificate(after.f, cert, profile.params, samples=100, slope_tol=slope_tol)
    assert report.max_residual() <= 10 * tol


def test_step_quotients_do_not_grow():
    """The previous step's certificate bounds the next difference quotient"""
    tau = 1e-3
    grid = PeriodicGrid(64)
    s0 = FlowState.initial(sine_data(grid, 0.5), PARAMS)
    s1 = minimizing_movement_step(s0, tau, PARAMS, tol=1e-9)
    s2 = minimizing_movement_step(s1, tau, PARAMS, tol=1e-9)
    bound = minimal_section_bound(SubgradientCertificate.from_step(s0, s1, tau))
    quotient = minimal_section_bound(SubgradientCertificate.from_step(s1, s2, tau))
    assert quotient <= bound * (1.0 + 1e-4)


def test_from_step_needs_a_field():
    grid = PeriodicGrid(16)
    state = FlowState.initial(GridFunction.zeros(grid), PARAMS)
    with pytest.raises(UsageError):
        SubgradientCertificate.from_step(state, state, 1e-3)


def test_canonical_certificate_converges():
    coarse = _canonical(201)
    fine = _canonical(401)
    reports = []
    for profile, grid, cert in (coarse, fine):
        f = sample_profile(grid, profile)
        report = verify_certificate(f, cert, profile.params, samples=200)
        assert report.pointwise_inclusion <= grid.spacing**2
        assert report.worst_violation == max(report.worst_slack, 0.0)
        assert report.max_residual() <= 10.0 * grid.spacing
        reports.append(report)
    assert reports[1].max_residual() < reports[0].max_residual()


def test_canonical_density_carries_surface_term():
    profile, grid, cert = _canonical(201)
    restriction = canonical_restriction(profile)
    without = canonical_certificate(grid, restriction, solve_facet_extension(profile), include_surface=False)
    i = grid.facet_index
    jump = cert.claimed_u.values[i] - without.claimed_u.values[i]
    assert jump * grid.mass[i] == pytest.approx(restriction.surface_coeff * restriction.surface_measure, rel=1e-12)
    np.testing.assert_array_equal(np.delete(cert.claimed_u.values, i), np.delete(without.claimed_u.values, i))
    assert cert.claimed_u.values[0] == pytest.approx(3.2, rel=1e-12)


def test_doubled_facet_field_is_detected():
    profile, grid, cert = _canonical(201)
    f = sample_profile(grid, profile)
    report = verify_certificate(f, scaled_on_facet(cert, 2.0), profile.params, samples=20)
    assert report.pointwise_inclusion >= 0.9
    assert report.worst_violation == max(report.worst_slack, 0.0)


def test_facet_scaling_needs_radial_grid():
    grid = PeriodicGrid(16)
    cert = SubgradientCertificate(GridVectorField(grid, np.zeros(16)), GridFunction.zeros(grid))
    with pytest.raises(UsageError):
        scaled_on_facet(cert, 2.0)
