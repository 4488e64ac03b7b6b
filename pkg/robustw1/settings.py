# Environment-driven configuration, read once at import time.

import json
import logging
import os
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

load_dotenv()

use_loglevel = os.getenv("LOG_LEVEL", "info")
max_level_str = os.getenv("ROBUSTW1_MAX_LEVEL", "24")
threads_str = os.getenv("ROBUSTW1_THREADS", "1")
lp_max_iter_str = os.getenv("ROBUSTW1_LP_MAX_ITER", "1000000")
max_cells_str = os.getenv("ROBUSTW1_MAX_CELLS", str(2**22))

max_level = int(max_level_str)
assert max_level > 0
threads = int(threads_str)
assert threads > 0
lp_max_iter = int(lp_max_iter_str)
assert lp_max_iter > 0
max_cells = int(max_cells_str)
assert max_cells > 0


class Settings(BaseModel):
    """
    Effective runtime settings. Tolerances are fixed; limits come from the environment.
    """

    model_config = ConfigDict(frozen=True)

    loglevel: str = Field(
        default=use_loglevel,
        description="Logging level name for the robustw1 logger.",
    )
    max_level: int = Field(
        default=max_level,
        description="Largest dyadic filtration level that may be built.",
    )
    threads: int = Field(
        default=threads,
        description="Worker threads used for independent solves.",
    )
    lp_max_iter: int = Field(
        default=lp_max_iter,
        description="Pivot cap for the LP and network simplex solvers.",
    )
    max_cells: int = Field(
        default=max_cells,
        description="Largest number of cell centers enumerated as a support.",
    )
    mass_input_tol: float = Field(
        default=1e-9,
        description="Accepted |sum(weights) - 1| for measures at input.",
    )
    merge_tol: float = Field(
        default=1e-12,
        description="Sup-norm distance below which atoms are identified.",
    )
    feasibility_tol: float = Field(
        default=1e-9,
        description="Primal feasibility tolerance of the LP solver.",
    )
    optimality_tol: float = Field(
        default=1e-9,
        description="Dual feasibility tolerance of the LP solver.",
    )


settings = Settings()


def configure_logging(level: str | None = None) -> None:
    """
    Install a stream handler on the package logger.

    Args:
        level (str | None): Level name; falls back to LOG_LEVEL.
    """
    logger = logging.getLogger("robustw1")
    logger.setLevel((level or settings.loglevel).upper())
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        logger.addHandler(handler)
    # For debugging and testing
    logger.debug(json.dumps(settings.model_dump()))
