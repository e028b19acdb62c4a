# app/core/config.py
import os

from dotenv import load_dotenv
from pydantic import BaseModel


load_dotenv()


class Settings(BaseModel):
    """Loads settings from environment variables."""

    LOG_LEVEL: str = "INFO"
    OUTPUT_DIR: str = "out"
    SEED: int = 0
    N_JOBS: int = 1
    TOL: float = 1e-6
    MAX_INNER_ITERATIONS: int = 20000


settings = Settings(
    LOG_LEVEL=os.getenv("FACETFLOW_LOG_LEVEL", "INFO"),
    OUTPUT_DIR=os.getenv("FACETFLOW_OUTPUT_DIR") or "out",
    SEED=int(os.getenv("FACETFLOW_SEED", "0")),
    N_JOBS=int(os.getenv("FACETFLOW_N_JOBS", "1")),
    TOL=float(os.getenv("FACETFLOW_TOL", "1e-6")),
    MAX_INNER_ITERATIONS=int(os.getenv("FACETFLOW_MAX_INNER_ITERATIONS", "20000")),
)

# Fail fast on settings no run can use
if settings.TOL <= 0.0:
    raise ValueError("FACETFLOW_TOL must be positive.")

if settings.N_JOBS == 0:
    raise ValueError("FACETFLOW_N_JOBS must be nonzero (use -1 for all cores).")

if settings.MAX_INNER_ITERATIONS < 1:
    raise ValueError("FACETFLOW_MAX_INNER_ITERATIONS must be at least 1.")
