from typing import List, Optional

from pydantic import BaseModel, Field


class ConjugateCheckReport(BaseModel):
    cases: int = Field(..., description="oracle comparisons run")
    max_oracle_residual: float = Field(..., description="max |closed form - oracle| / max(1, |closed form|)")
    max_oracle_abs_residual: float = Field(..., description="max |closed form - oracle|")
    max_fenchel_young_residual: float = Field(..., description="max |sigma(x) + sigma^#(g) - <x, g>| on subgradient pairs")
    max_prox_residual: float = Field(..., description="max distance from (z - w)/lambda to the subdifferential at w")
    boundary_hits: int = Field(0, description="oracle runs whose maximizer touched the search ball")
    tol: float
    passed: bool
    notes: List[str] = Field(default_factory=list)


class RadialReport(BaseModel):
    profile: str
    dim: int
    r0: float
    r: float
    boundary_residual: float
    interval_ok: bool
    facet_bound_max: float
    h1_r0: float = Field(..., description="H'(r0)")
    c1: float
    c2: float
    facet_value: Optional[float] = Field(None, description="absent when the hypotheses fail")
    surface_coeff: Optional[float] = None
    surface_measure: Optional[float] = None
    no_delta_residual: float = Field(..., description="H''(r0) - 3H'(r0)/r0 - 3/r0^2 from analytic derivatives")
    no_delta_residual_fd: float = Field(..., description="the same from one-sided Richardson differences")
    extension_residual: float = Field(..., description="largest residual of the glued field")
    bulk_fd_error: float = Field(..., description="max relative gap between the bulk density and its difference approximation")
    tol: float
    passed: bool
    flags: List[str] = Field(default_factory=list)


class FlowSummary(BaseModel):
    flavor: str
    n: int
    tau: float
    steps: int
    final_time: float
    initial_energy: float
    final_energy: float
    max_energy_increase: float = Field(..., description="largest step-to-step energy increase, 0 when dissipative")
    max_mean_drift: float = Field(0.0, description="largest |mean f| seen (periodic runs)")
    extinction_step: Optional[int] = Field(None, description="first step with |f|_{H^-1} <= extinction_tol")
    extinction_time: Optional[float] = None
    max_inner_iterations: int = 0
    tol: float
    passed: bool
