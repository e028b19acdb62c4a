from app.response_models.configs import (
    ConjugateCheckConfig,
    FlowConfig,
    ProfileConfig,
    RadialConfig,
    RunConfig,
    SlopeCheckConfig,
)
from app.response_models.reports import ConjugateCheckReport, FlowSummary, RadialReport

__all__ = [
    "ConjugateCheckConfig",
    "ConjugateCheckReport",
    "FlowConfig",
    "FlowSummary",
    "ProfileConfig",
    "RadialConfig",
    "RadialReport",
    "RunConfig",
    "SlopeCheckConfig",
]
