"""
Exception hierarchy shared by the computational modules and the CLI.
"""
from typing import Any, Optional


class FacetFlowError(Exception):
    """Base class for every error raised on purpose by this package."""


class UsageError(FacetFlowError):
    """Invalid parameters, mismatched grids or flavors."""


class SolverError(FacetFlowError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class AssumptionError(FacetFlowError):
    """A profile does not satisfy the hypotheses needed for the canonical restriction."""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report
