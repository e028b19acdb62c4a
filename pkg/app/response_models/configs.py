from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class ProfileConfig(BaseModel):
    kind: Literal["example", "facet", "samples"] = Field("example", description="named example, prescribed facet slope, or (s, h) samples")
    r0: float = Field(1.0, gt=0, description="facet radius")
    r: Optional[float] = Field(None, gt=0, description="domain radius; 2 r0 when omitted")
    mu: float = Field(1.0, gt=0, description="coefficient of the |y|^p term")
    p: float = Field(2.0, gt=1, description="exponent of the |y|^p term")
    dim: int = Field(2, ge=1, description="ambient dimension d")
    facet_slope: Optional[float] = Field(None, description="H'(r0) for kind 'facet'")
    samples: Optional[List[Tuple[float, float]]] = Field(None, description="(s, h) pairs for kind 'samples'")

    @property
    def outer_radius(self) -> float:
        return self.r if self.r is not None else 2.0 * self.r0

    @model_validator(mode="after")
    def check_kind(self) -> "ProfileConfig":
        if self.outer_radius <= self.r0:
            raise ValueError(f"r0={self.r0} must be smaller than r={self.outer_radius}")
        if self.kind == "example":
            if self.r is not None and self.r != 2.0 * self.r0:
                raise ValueError("the example profile lives on r = 2 r0")
            if self.mu != 1.0 or self.p != 2.0:
                raise ValueError("the example profile has mu = 1, p = 2")
        if self.kind == "facet":
            if self.facet_slope is None:
                raise ValueError("kind 'facet' needs facet_slope")
            if self.p != 2.0:
                raise ValueError("kind 'facet' builds p = 2 profiles")
        if self.kind == "samples" and not self.samples:
            raise ValueError("kind 'samples' needs samples")
        return self


class RunConfig(BaseModel):
    """Fields shared by every command; CLI flags override them."""

    out: Optional[str] = Field(None, description="output directory")
    seed: Optional[int] = Field(None, description="seed for randomized checks")
    tol: Optional[float] = Field(None, gt=0, description="report tolerance")


class ConjugateCheckConfig(RunConfig):
    p_values: List[float] = Field([1.5, 2.0, 3.0, 4.0], description="exponents p > 1")
    mu_values: List[float] = Field([0.5, 1.0, 2.0], description="coefficients mu > 0")
    dims: List[int] = Field([1, 2, 3], description="dimensions of y")
    magnitudes: List[float] = Field(
        [5.0 * k / 13.0 for k in range(14)], description="|y| values of the sweep"
    )
    refinement: int = Field(8, ge=0, description="oracle refinement levels")
    fenchel_young_cases: int = Field(1000, ge=0)
    prox_cases: int = Field(1000, ge=0)
    corrupt_formula: bool = Field(False, description="test hook: perturb the closed-form conjugate")

    @model_validator(mode="after")
    def check_ranges(self) -> "ConjugateCheckConfig":
        if any(p <= 1.0 for p in self.p_values):
            raise ValueError("every p must exceed 1")
        if any(mu <= 0.0 for mu in self.mu_values):
            raise ValueError("every mu must be positive")
        if any(d < 1 for d in self.dims):
            raise ValueError("every dimension must be at least 1")
        if any(m < 0.0 for m in self.magnitudes):
            raise ValueError("magnitudes must be nonnegative")
        return self


class RadialConfig(RunConfig):
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    bulk_samples: int = Field(101, ge=2, description="rows of the bulk density CSV")


class SlopeCheckConfig(RunConfig):
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    n: int = Field(512, ge=4, description="radial nodes on [0, r]")
    taus: List[float] = Field([1e-2, 5e-3, 2.5e-3], description="decreasing step sizes")
    facet_tol: float = Field(0.05, gt=0, description="accepted relative facet-slope error at the smallest tau")
    max_iterations: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_taus(self) -> "SlopeCheckConfig":
        if not self.taus or any(t <= 0.0 for t in self.taus):
            raise ValueError("taus must be positive")
        if any(b >= a for a, b in zip(self.taus, self.taus[1:])):
            raise ValueError("taus must be strictly decreasing")
        return self


class FlowConfig(RunConfig):
    flavor: Literal["periodic", "radial"] = "periodic"
    n: int = Field(128, ge=4, description="cells (periodic) or radial nodes")
    omega: float = Field(1.0, gt=0, description="period of the 1-D torus")
    mu: float = Field(1.0, gt=0)
    p: float = Field(2.0, gt=1)
    tau: float = Field(1e-3, gt=0, description="time step")
    t_max: float = Field(1.0, ge=0, description="final time")
    amplitude: float = Field(1.0, description="amplitude of the named periodic initial data")
    initial: Literal["sin", "hat", "samples", "profile"] = "sin"
    samples: Optional[List[float]] = Field(None, description="nodal values for initial 'samples'")
    profile: Optional[ProfileConfig] = Field(None, description="radial initial surface; its mu, p and dim override the flow values")
    stop_when_extinct: bool = Field(False, description="stop once the H^-1 norm falls below extinction_tol")
    extinction_tol: float = Field(1e-6, gt=0)
    log_every: int = Field(50, ge=1)
    slope_check: Optional[SlopeCheckConfig] = None

    @model_validator(mode="after")
    def check_initial(self) -> "FlowConfig":
        if self.flavor == "periodic" and self.initial not in ("sin", "hat", "samples"):
            raise ValueError(f"initial '{self.initial}' is not a periodic initial condition")
        if self.flavor == "radial":
            if self.initial != "profile":
                raise ValueError(f"radial runs start from a profile, got initial '{self.initial}'")
            if self.profile is None:
                self.profile = ProfileConfig()
        if self.initial == "samples":
            if not self.samples:
                raise ValueError("initial 'samples' needs samples")
            if self.flavor == "periodic" and len(self.samples) != self.n:
                raise ValueError(f"need {self.n} samples, got {len(self.samples)}")
        return self
