"""
Subcommand handlers. Each takes a validated config and an output directory,
writes its CSV and JSON artifacts and returns the exit status.
"""
import itertools
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel

from app.convex.oracle import apriori_radius, sigma_conj_bruteforce
from app.convex.sigma import (
    EnergyDensityParams,
    distance_to_subdiff,
    fenchel_young_gap,
    prox_sigma,
    sigma,
    sigma_conj,
    subdiff_sigma,
)
from app.core.config import settings
from app.core.errors import AssumptionError
from app.flow.grids import RadialGrid
from app.flow.simulate import run_flow
from app.flow.slope import SlopeCheckReport, initial_slope_check
from app.radial.canonical import (
    bulk_density_by_differences,
    canonical_restriction,
    check_assumptions,
    no_delta_residual_by_differences,
    solve_facet_extension,
    verify_extension_field,
)
from app.radial.profile import profile_from_config
from app.response_models.configs import ConjugateCheckConfig, FlowConfig, RadialConfig, SlopeCheckConfig
from app.response_models.reports import ConjugateCheckReport, RadialReport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TOLERANCE = 1

# Closed-form identities hold to rounding
IDENTITY_TOL = 1e-10
# Cross-checks against Richardson differences
DIFFERENCE_TOL = 1e-5
CORRUPTION = 1e-3

SWEEP_COLUMNS = ["p", "mu", "dim", "norm_y", "closed_form", "oracle", "abs_residual", "residual", "boundary_hit"]
BULK_COLUMNS = ["s", "H", "bulk_density", "bulk_density_fd"]
SLOPE_COLUMNS = ["tau", "distance", "facet_slope", "facet_error", "iterations"]


def write_csv(frame: pd.DataFrame, path: Path) -> None:
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("wrote %s (%d rows)", path, len(frame))


def write_report(report: BaseModel, path: Path) -> None:
    path.write_text(report.model_dump_json(indent=2) + "\n")
    logger.info("wrote %s", path)


def _oracle_row(p: float, mu: float, dim: int, y: np.ndarray, refinement: int, corrupt: bool) -> dict:
    params = EnergyDensityParams(mu=mu, p=p, dim=dim)
    closed = float(sigma_conj(params, y))
    if corrupt:
        closed = closed * (1.0 + CORRUPTION) + CORRUPTION
    result = sigma_conj_bruteforce(params, y, apriori_radius(params, y), refinement=refinement, allow_boundary=True)
    return {
        "p": p,
        "mu": mu,
        "dim": dim,
        "norm_y": float(np.linalg.norm(y)),
        "closed_form": closed,
        "oracle": result.value,
        "abs_residual": abs(closed - result.value),
        "residual": abs(closed - result.value) / max(1.0, abs(closed)),
        "boundary_hit": result.boundary_hit,
    }


def _random_params(rng: np.random.Generator) -> EnergyDensityParams:
    return EnergyDensityParams(
        mu=float(rng.uniform(0.2, 3.0)),
        p=float(rng.uniform(1.2, 5.0)),
        dim=int(rng.integers(1, 4)),
    )


def _fenchel_young_residuals(rng: np.random.Generator, cases: int) -> list[float]:
    residuals = []
    for _ in range(cases):
        params = _random_params(rng)
        x = rng.normal(size=params.dim) * rng.uniform(0.1, 3.0)
        g = subdiff_sigma(params, x).point
        residuals.append(abs(fenchel_young_gap(params, x, g)) / max(1.0, float(sigma(params, x))))
    return residuals


def _prox_residuals(rng: np.random.Generator, cases: int) -> list[float]:
    residuals = []
    for _ in range(cases):
        params = _random_params(rng)
        lam = float(rng.uniform(0.05, 5.0))
        z = rng.normal(size=params.dim) * rng.uniform(0.0, 5.0)
        w = prox_sigma(params, lam, z)
        quotient = (z - w) / lam
        residuals.append(distance_to_subdiff(params, w, quotient) / max(1.0, float(np.linalg.norm(quotient))))
    return residuals


def cmd_conjugate_check(config: ConjugateCheckConfig, out: Path) -> int:
    """Closed-form conjugate against the brute-force oracle, plus Fenchel-Young and prox identities."""
    tol = config.tol or settings.TOL
    seed = settings.SEED if config.seed is None else config.seed
    rng = np.random.default_rng(seed)

    cases = []
    for p, mu, dim, magnitude in itertools.product(config.p_values, config.mu_values, config.dims, config.magnitudes):
        direction = rng.normal(size=dim)
        cases.append((p, mu, dim, magnitude * direction / np.linalg.norm(direction)))
    logger.info("conjugate sweep: %d cases on %d workers", len(cases), settings.N_JOBS)
    rows = Parallel(n_jobs=settings.N_JOBS)(
        delayed(_oracle_row)(p, mu, dim, y, config.refinement, config.corrupt_formula) for p, mu, dim, y in cases
    )
    sweep = pd.DataFrame(rows, columns=SWEEP_COLUMNS)

    fenchel_young = _fenchel_young_residuals(rng, config.fenchel_young_cases)
    prox = _prox_residuals(rng, config.prox_cases)

    notes = []
    if not cases:
        notes.append("no cases")
    boundary_hits = int(sweep["boundary_hit"].sum()) if cases else 0
    if boundary_hits:
        notes.append(f"{boundary_hits} oracle runs touched the search ball")
    max_oracle = float(sweep["residual"].max()) if cases else 0.0
    max_oracle_abs = float(sweep["abs_residual"].max()) if cases else 0.0
    max_fy = max(fenchel_young, default=0.0)
    max_prox = max(prox, default=0.0)
    passed = (
        max(max_oracle, max_oracle_abs) <= tol
        and max(max_fy, max_prox) <= IDENTITY_TOL
        and boundary_hits == 0
    )

    report = ConjugateCheckReport(
        cases=len(cases),
        max_oracle_residual=max_oracle,
        max_oracle_abs_residual=max_oracle_abs,
        max_fenchel_young_residual=max_fy,
        max_prox_residual=max_prox,
        boundary_hits=boundary_hits,
        tol=tol,
        passed=passed,
        notes=notes,
    )
    write_csv(sweep, out / "conjugate_check.csv")
    write_report(report, out / "conjugate_check.json")
    if not passed:
        logger.warning(
            "conjugate check failed: oracle %.3e, Fenchel-Young %.3e, prox %.3e", max_oracle, max_fy, max_prox
        )
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_radial(config: RadialConfig, out: Path) -> int:
    """Hypotheses, facet extension and canonical restriction of one radial profile."""
    tol = config.tol or settings.TOL
    profile = profile_from_config(config.profile)
    assumptions = check_assumptions(profile)
    ext = solve_facet_extension(profile)
    residuals = verify_extension_field(profile, ext)
    no_delta_fd = no_delta_residual_by_differences(profile)

    flags = []
    restriction = None
    try:
        restriction = canonical_restriction(profile, assumptions)
    except AssumptionError as exc:
        flags.append(f"hypotheses fail: {exc}")
        logger.warning("%s", exc)

    s = np.linspace(profile.r0, profile.r, config.bulk_samples)
    H = profile.H(s)
    bulk = restriction.bulk_density(s) if restriction is not None else np.full_like(s, np.nan)
    bulk_fd = bulk_density_by_differences(profile, s)
    # endpoint differences reach outside [r0, r]
    inner = slice(1, -1) if s.size > 2 else slice(None)
    bulk_fd_error = float("nan")
    if restriction is not None:
        gap = np.abs(bulk_fd[inner] - bulk[inner]) / np.maximum(1.0, np.abs(bulk[inner]))
        bulk_fd_error = float(np.max(gap))

    surface = assumptions.no_delta_residual
    if abs(surface) > tol * max(1.0, abs(assumptions.h1_r0)):
        flags.append(
            f"surface coefficient H''(r0) - 3H'(r0)/r0 - 3/r0^2 = {surface:.12g} is nonzero: "
            "the restriction carries a surface measure on |x| = r0 and the no-delta condition fails"
        )
        logger.warning("%s: nonzero surface coefficient %.12g", profile.name, surface)
        if config.profile.kind == "example":
            flags.append(
                "the worked example is published as satisfying the no-delta condition "
                "(coefficient zero, no surface integral); the measured coefficient contradicts that claim"
            )
    difference_gap = abs(surface - no_delta_fd)
    if difference_gap > DIFFERENCE_TOL * max(1.0, abs(surface)):
        flags.append(f"surface coefficient by differences disagrees by {difference_gap:.3e}")

    extension_residual = residuals.max_residual()
    scale = 1.0 + abs(assumptions.h1_r0) + 1.0 / profile.r0
    passed = (
        restriction is not None
        and extension_residual <= tol * scale
        and bulk_fd_error <= DIFFERENCE_TOL
        and difference_gap <= DIFFERENCE_TOL * max(1.0, abs(surface))
    )
    report = RadialReport(
        profile=profile.name,
        dim=profile.dim,
        r0=profile.r0,
        r=profile.r,
        boundary_residual=assumptions.boundary_residual,
        interval_ok=assumptions.interval_ok,
        facet_bound_max=assumptions.facet_bound_max,
        h1_r0=assumptions.h1_r0,
        c1=ext.c1,
        c2=ext.c2,
        facet_value=restriction.facet_value if restriction else None,
        surface_coeff=restriction.surface_coeff if restriction else None,
        surface_measure=restriction.surface_measure if restriction else None,
        no_delta_residual=surface,
        no_delta_residual_fd=no_delta_fd,
        extension_residual=extension_residual,
        bulk_fd_error=bulk_fd_error,
        tol=tol,
        passed=passed,
        flags=flags,
    )
    bulk_frame = pd.DataFrame({"s": s, "H": H, "bulk_density": bulk, "bulk_density_fd": bulk_fd}, columns=BULK_COLUMNS)
    write_csv(bulk_frame, out / "radial_bulk.csv")
    write_report(report, out / "radial_report.json")
    if restriction is not None:
        logger.info("%s: facet value %.12g", profile.name, restriction.facet_value)
    return EXIT_OK if passed else EXIT_TOLERANCE


def _slope_check(config: SlopeCheckConfig, out: Path) -> SlopeCheckReport:
    profile = profile_from_config(config.profile)
    grid = RadialGrid(profile.r0, profile.r, config.n, profile.dim)
    report = initial_slope_check(profile, config.taus, grid, tol=config.tol, max_iterations=config.max_iterations)
    passed = report.errors_decreasing and report.final_error <= config.facet_tol
    report = report.model_copy(update={"facet_tol": config.facet_tol, "passed": passed})
    write_csv(pd.DataFrame([row.model_dump() for row in report.rows], columns=SLOPE_COLUMNS), out / "slope_check.csv")
    write_report(report, out / "slope_check.json")
    if not passed:
        logger.warning("slope check: final facet error %.3e (limit %.3e)", report.final_error, config.facet_tol)
    return report


def cmd_slope_check(config: SlopeCheckConfig, out: Path) -> int:
    """Right derivative at t = 0 against the canonical restriction."""
    return EXIT_OK if _slope_check(config, out).passed else EXIT_TOLERANCE


def cmd_evolve(config: FlowConfig, out: Path) -> int:
    """Flow run with time series, final profile and summary; optional slope check."""
    run = run_flow(config)
    write_csv(run.series, out / "flow_series.csv")
    write_csv(run.final_profile(), out / "flow_final.csv")
    write_report(run.summary, out / "flow_summary.json")
    passed = run.summary.passed
    if not passed:
        logger.warning("energy increased by %.3e during the run", run.summary.max_energy_increase)
    if config.slope_check is not None:
        passed = _slope_check(config.slope_check, out).passed and passed
    return EXIT_OK if passed else EXIT_TOLERANCE
