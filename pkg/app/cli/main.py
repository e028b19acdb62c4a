"""
Command-line entry point.

    facet-flow conjugate-check [--config FILE] [--out DIR] [--seed N] [--tol X]
    facet-flow radial          [--config FILE] [--out DIR] [--tol X]
    facet-flow evolve          [--config FILE] [--out DIR] [--tol X]
    facet-flow slope-check     [--config FILE] [--out DIR] [--tol X]

Exit status: 0 ok, 1 tolerance or hypothesis failure, 2 usage error, 3 solver failure.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence, Type

from pydantic import BaseModel, ValidationError

from app.cli.commands import cmd_conjugate_check, cmd_evolve, cmd_radial, cmd_slope_check
from app.core.config import settings
from app.core.errors import AssumptionError, SolverError, UsageError
from app.core.log import configure_logging
from app.response_models.configs import ConjugateCheckConfig, FlowConfig, RadialConfig, RunConfig, SlopeCheckConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3

COMMANDS: dict[str, tuple[Type[RunConfig], Callable[..., int]]] = {
    "conjugate-check": (ConjugateCheckConfig, cmd_conjugate_check),
    "radial": (RadialConfig, cmd_radial),
    "evolve": (FlowConfig, cmd_evolve),
    "slope-check": (SlopeCheckConfig, cmd_slope_check),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="facet-flow", description="Total-variation-type flows: checks and simulations.")
    parser.add_argument("--log-level", default=None, help="overrides FACETFLOW_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", type=Path, default=None, help="JSON config; defaults when omitted")
        sub.add_argument("--out", default=None, help="output directory")
        sub.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
        sub.add_argument("--tol", type=float, default=None, help="report tolerance")
    return parser


def load_config(model: Type[RunConfig], path: Optional[Path], overrides: dict) -> RunConfig:
    """Read a JSON config (or take the defaults) and apply command-line overrides."""
    data: dict = {}
    if path is not None:
        try:
            data = model.model_validate_json(path.read_text()).model_dump(exclude_unset=True)
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
    data.update({key: value for key, value in overrides.items() if value is not None})
    return model.model_validate(data)


def _with_tol(config: BaseModel, tol: Optional[float]) -> BaseModel:
    # a nested slope check inherits the run tolerance unless it sets its own
    if tol is None or not isinstance(config, FlowConfig) or config.slope_check is None:
        return config
    if config.slope_check.tol is None:
        return config.model_copy(update={"slope_check": config.slope_check.model_copy(update={"tol": tol})})
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        model, handler = COMMANDS[args.command]
        config = load_config(model, args.config, {"out": args.out, "seed": args.seed, "tol": args.tol})
        config = _with_tol(config, config.tol)
        out = Path(config.out or settings.OUTPUT_DIR)
        out.mkdir(parents=True, exist_ok=True)
        logger.info("%s: writing to %s", args.command, out)
        return handler(config, out)
    except (UsageError, ValidationError) as exc:
        logger.error("usage error: %s", exc)
        return EXIT_USAGE
    except AssumptionError as exc:
        logger.error("hypotheses fail: %s", exc)
        return EXIT_TOLERANCE
    except SolverError as exc:
        logger.error("solver failure: %s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
