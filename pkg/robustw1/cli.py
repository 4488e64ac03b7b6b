"""
This module contains the command-line front-end: parse flags, load the experiment config, run it, and map the outcome to an exit status.
"""

# Python Standard Libraries
import argparse
import logging
import sys

# Local Libraries
from robustw1.errors import IO_EXIT_CODE, RobustW1Error
from robustw1.models.config import ExperimentConfig, RunResponse
from robustw1.runner import ExperimentRunner
from robustw1.settings import configure_logging

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustw1",
        description="Robust minimization over 1-Wasserstein balls on dyadic filtrations.",
    )
    parser.add_argument("--config", required=True, help="YAML experiment config.")
    parser.add_argument("--out", help="Output directory (overrides 'out').")
    parser.add_argument("--seed", type=int, help="Seed for generated instances.")
    parser.add_argument("--threads", type=int, help="Worker threads for studies.")
    parser.add_argument(
        "--dump-coupling",
        action="store_true",
        help="Also write the coupling as i,j,flow,cost CSV.",
    )
    parser.add_argument(
        "--progress",
        action="store_true",
        help="Show a progress bar on stderr.",
    )
    parser.add_argument("--log-level", help="Overrides LOG_LEVEL.")
    return parser


def load(args: argparse.Namespace) -> ExperimentConfig | RunResponse:
    """
    Load the config named by the flags, or a failed response explaining why not.
    """
    try:
        return ExperimentConfig.from_yaml(
            args.config,
            out=args.out,
            seed=args.seed,
            threads=args.threads,
            dump_coupling=True if args.dump_coupling else None,
        )
    except RobustW1Error as e:
        return RunResponse(status=e.exit_code, message=f"error: {args.config}: {e}")
    except OSError as e:
        return RunResponse(status=IO_EXIT_CODE, message=f"error: I/O: {e}")


def main(argv: list[str] | None = None) -> int:
    """
    Run the CLI and return the process exit status.

    Args:
        argv (list[str] | None): Arguments without the program name; defaults to sys.argv.

    Returns:
        int: 0 on success, 2 for config errors, 3 for numerical failures, 4 for I/O.
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    config = load(args)
    if isinstance(config, RunResponse):
        logger.error(config.message)
        print(config.message, file=sys.stderr)
        return config.status

    response = ExperimentRunner(config, progress=args.progress).run()
    if response.status != 0:
        print(response.message, file=sys.stderr)
    else:
        print(response.message)
    return response.status
