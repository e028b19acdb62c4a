from .config import settings
from .errors import AssumptionError, FacetFlowError, SolverError, UsageError

__all__ = ["settings", "FacetFlowError", "UsageError", "SolverError", "AssumptionError"]
