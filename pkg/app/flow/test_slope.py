import numpy as np
import pytest

from app.core.errors import AssumptionError, UsageError
from app.flow.grids import RadialGrid
from app.flow.slope import initial_slope_check
from app.radial.profile import example_profile, facet_profile

TAUS = [1e-2, 5e-3, 2.5e-3]


def test_example_facet_slope_approaches_canonical_value():
    profile = example_profile(2, 1.0)
    grid = RadialGrid(profile.r0, profile.r, 512, profile.dim)
    report = initial_slope_check(profile, TAUS, grid)
    assert report.facet_value == pytest.approx(3.2, rel=1e-12)
    assert [row.tau for row in report.rows] == TAUS
    assert report.errors_decreasing
    assert report.final_error <= 0.05
    assert all(row.facet_slope < 0.0 for row in report.rows)
    assert len(report.distance_rates) == len(TAUS) - 1


def test_unit_slope_facet_reports_absolute_error():
    profile = facet_profile(2, 1.0, 2.0, -1.0)
    grid = RadialGrid(profile.r0, profile.r, 128, profile.dim)
    report = initial_slope_check(profile, TAUS, grid)
    assert report.facet_value == pytest.approx(0.0, abs=1e-12)
    assert all(row.facet_error == pytest.approx(abs(row.facet_slope)) for row in report.rows)


@pytest.mark.parametrize("taus", [[], [1e-2, 1e-2], [1e-3, 1e-2], [1e-2, -1e-3]])
def test_rejects_bad_step_sequences(taus):
    profile = example_profile(2, 1.0)
    grid = RadialGrid(profile.r0, profile.r, 32, profile.dim)
    with pytest.raises(UsageError):
        initial_slope_check(profile, taus, grid)


def test_rejects_profiles_outside_the_hypotheses():
    profile = facet_profile(2, 1.0, 2.0, -10.0)
    grid = RadialGrid(profile.r0, profile.r, 32, profile.dim)
    with pytest.raises(AssumptionError):
        initial_slope_check(profile, TAUS, grid)


def test_observed_rates_are_finite_for_positive_distances():
    profile = example_profile(2, 1.0)
    grid = RadialGrid(profile.r0, profile.r, 128, profile.dim)
    report = initial_slope_check(profile, [1e-2, 5e-3], grid)
    assert all(row.distance > 0.0 for row in report.rows)
    assert np.isfinite(report.distance_rates[0])
    assert report.spacing == pytest.approx(grid.spacing)
