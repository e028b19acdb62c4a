import itertools

import numpy as np
import pytest

from app.convex.oracle import apriori_radius, sigma_conj_bruteforce
from app.convex.sigma import EnergyDensityParams, sigma_conj
from app.core.errors import UsageError


def test_oracle_at_origin():
    params = EnergyDensityParams(mu=1.0, p=2.0, dim=2)
    result = sigma_conj_bruteforce(params, np.zeros(2), radius=3.0)
    assert result.value == pytest.approx(0.0, abs=1e-14)
    assert not result.boundary_hit


def test_oracle_known_value():
    params = EnergyDensityParams(mu=1.0, p=2.0, dim=2)
    result = sigma_conj_bruteforce(params, np.array([2.0, 0.0]), radius=4.0)
    assert result.value == pytest.approx(0.5, abs=1e-8)
    np.testing.assert_allclose(result.maximizer, [1.0, 0.0], atol=1e-3)


def test_oracle_inside_unit_ball():
    params = EnergyDensityParams(mu=2.0, p=3.0, dim=3)
    y = np.array([0.3, -0.5, 0.2])
    assert sigma_conj_bruteforce(params, y, radius=apriori_radius(params, y)).value == pytest.approx(0.0, abs=1e-12)


def test_oracle_monotone_in_refinement():
    params = EnergyDensityParams(mu=0.5, p=1.5, dim=2)
    y = np.array([1.5, 2.0])
    radius = apriori_radius(params, y)
    values = [sigma_conj_bruteforce(params, y, radius, refinement=k).value for k in range(6)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_oracle_reports_small_radius():
    params = EnergyDensityParams(mu=1.0, p=2.0, dim=1)
    with pytest.raises(UsageError):
        sigma_conj_bruteforce(params, np.array([5.0]), radius=1.0)
    flagged = sigma_conj_bruteforce(params, np.array([5.0]), radius=1.0, allow_boundary=True)
    assert flagged.boundary_hit


def test_closed_form_matches_oracle_on_sweep():
    """closed-form conjugate against the oracle over p, mu, d and |y| in [0, 5]"""
    rng = np.random.default_rng(7)
    cases = 0
    for p, mu, dim in itertools.product([1.5, 2.0, 3.0, 4.0], [0.5, 1.0, 2.0], [1, 2, 3]):
        params = EnergyDensityParams(mu=mu, p=p, dim=dim)
        for magnitude in np.linspace(0.0, 5.0, 14):
            direction = rng.normal(size=dim)
            y = magnitude * direction / np.linalg.norm(direction)
            oracle = sigma_conj_bruteforce(params, y, apriori_radius(params, y))
            exact = float(sigma_conj(params, y))
            assert abs(oracle.value - exact) <= 1e-6
            cases += 1
    assert cases >= 500
