from app.flow.certificate import (
    CertificateReport,
    SubgradientCertificate,
    canonical_certificate,
    minimal_section_bound,
    verify_certificate,
)
from app.flow.grids import (
    GridFunction,
    GridVectorField,
    PeriodicGrid,
    RadialGrid,
    discrete_energy,
    inverse_laplacian,
    laplacian,
    neg_sobolev_inner,
    neg_sobolev_norm,
)
from app.flow.simulate import FlowRun, run_flow
from app.flow.slope import SlopeCheckReport, initial_slope_check
from app.flow.solver import FlowState, minimizing_movement_step

__all__ = [
    "CertificateReport",
    "FlowRun",
    "FlowState",
    "GridFunction",
    "GridVectorField",
    "PeriodicGrid",
    "RadialGrid",
    "SlopeCheckReport",
    "SubgradientCertificate",
    "canonical_certificate",
    "discrete_energy",
    "initial_slope_check",
    "inverse_laplacian",
    "laplacian",
    "minimal_section_bound",
    "minimizing_movement_step",
    "neg_sobolev_inner",
    "neg_sobolev_norm",
    "run_flow",
    "verify_certificate",
]
