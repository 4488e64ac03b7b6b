# External Libraries
import numpy as np

# Python Standard Libraries
import logging
from pathlib import Path
from typing import Callable

# Local Libraries
from robustw1.core.convergence import domain_perturbation_scan, study_convergence
from robustw1.core.dro import make_instance, solve_primal, solve_robust_max
from robustw1.core.filtration import cell_centers, make_filtration
from robustw1.core.measures import (
    as_points,
    integrate,
    make_measure,
    random_measure,
    uniform,
)
from robustw1.core.payoffs import make_payoff
from robustw1.core.transport import w1_distance
from robustw1.errors import IO_EXIT_CODE, RobustW1Error
from robustw1.models.config import ExperimentConfig, RunResponse
from robustw1.models.measures import Box, DiscreteMeasure
from robustw1.utils.io_utils import (
    convergence_csv,
    convergence_plotdata,
    coupling_to_csv,
    json_envelope,
    measure_to_text,
    perturbation_csv,
    perturbation_plotdata,
    read_measure,
    solution_record,
    write_text,
)

logger = logging.getLogger(__name__)


def _inline_measure(atoms, weights) -> DiscreteMeasure:
    if weights is None:
        return uniform(atoms)
    return make_measure(atoms, weights)


# Runner class definition
class ExperimentRunner:
    """
    This class is responsible for running one experiment config and writing its outputs.
    """

    def __init__(self, config: ExperimentConfig, progress: bool = False):
        self.config = config
        self.progress = progress
        self.out = Path(config.out)
        self.rng = np.random.default_rng(config.seed)
        self.handlers: dict[str, Callable[[], RunResponse]] = {
            "solve": self.solve,
            "convergence": self.convergence,
            "perturbation": self.perturbation,
            "w1": self.w1,
        }

    def run(self) -> RunResponse:
        """
        Dispatch on the config mode. Errors become a response carrying their exit status.
        """
        logger.info("running mode '%s' into %s", self.config.mode, self.out)
        try:
            return self.handlers[self.config.mode]()
        except RobustW1Error as e:
            logger.error("%s failed: %s", self.config.mode, e)
            return RunResponse(
                status=e.exit_code,
                message=f"error: {type(e).__name__}: {e}",
            )
        except OSError as e:
            logger.error("%s failed: %s", self.config.mode, e)
            return RunResponse(
                status=IO_EXIT_CODE,
                message=f"error: I/O: {e}",
            )

    # Inputs

    def center(self) -> DiscreteMeasure:
        config = self.config
        if config.atoms is not None:
            return _inline_measure(config.atoms, config.weights)
        if config.measure_file is not None:
            return read_measure(config.measure_file)
        return random_measure(self.rng, config.random_atoms, self.box())

    def target(self) -> DiscreteMeasure:
        config = self.config
        if config.target_atoms is not None:
            return _inline_measure(config.target_atoms, config.target_weights)
        return read_measure(config.target_file)

    def box(self) -> Box:
        return Box.from_bounds(self.config.box)

    def support(self) -> np.ndarray:
        if self.config.support_atoms is not None:
            return as_points(self.config.support_atoms)
        return cell_centers(make_filtration(self.box(), self.config.level))

    def payoff(self):
        return make_payoff(self.config.payoff, self.config.payoff_params)

    # Modes

    def solve(self) -> RunResponse:
        """
        Solve one robust problem and write solution.txt (and coupling.csv on request).
        """
        mu = self.center()
        instance = make_instance(self.payoff(), mu, self.config.theta, self.support())
        solve = solve_robust_max if self.config.maximize else solve_primal
        solution = solve(instance)
        record = solution_record(solution)
        written = [
            write_text(self.out / "center.txt", measure_to_text(mu)),
            write_text(self.out / "solution.txt", record),
        ]
        if self.config.dump_coupling:
            written.append(
                write_text(self.out / "coupling.csv", coupling_to_csv(solution.coupling))
            )
        logger.info("solve: value %.17g, gap %.3g", solution.value, solution.gap)
        return RunResponse(
            status=0,
            message=record.rstrip("\n"),
            data=[str(p) for p in written],
        )

    def convergence(self) -> RunResponse:
        """
        Run a convergence study and write convergence.csv, plotdata.csv and study.json.
        """
        mu = self.center()
        study = study_convergence(
            self.payoff(),
            mu,
            self.box(),
            self.config.theta,
            self.config.level_range,
            self.config.reference_level,
            threads=self.config.threads,
            progress=self.progress,
        )
        table = write_text(self.out / "convergence.csv", convergence_csv(study.rows))
        written = [
            write_text(self.out / "center.txt", measure_to_text(mu)),
            table,
            write_text(self.out / "plotdata.csv", convergence_plotdata(study)),
            write_text(
                self.out / "study.json",
                json_envelope(self.config, study.model_dump(mode="json")),
            ),
        ]
        logger.info(
            "convergence: reference value %.17g, monotone %s",
            study.reference_value,
            study.monotone,
        )
        return RunResponse(
            status=0,
            message=str(table),
            data=[str(p) for p in written],
        )

    def perturbation(self) -> RunResponse:
        """
        Scan the optimal value over the radii and write perturbation.csv and plotdata.csv.
        """
        mu = self.center()
        payoff = self.payoff()
        rows = domain_perturbation_scan(
            payoff,
            mu,
            self.support(),
            self.config.thetas,
            threads=self.config.threads,
        )
        table = write_text(self.out / "perturbation.csv", perturbation_csv(rows))
        written = [
            write_text(self.out / "center.txt", measure_to_text(mu)),
            table,
            write_text(
                self.out / "plotdata.csv",
                perturbation_plotdata(rows, integrate(payoff, mu), payoff.lipschitz_K),
            ),
        ]
        logger.info("perturbation: %d radii", len(rows))
        return RunResponse(
            status=0,
            message=str(table),
            data=[str(p) for p in written],
        )

    def w1(self) -> RunResponse:
        """
        Compute W1 between the center and the target and write w1.txt.
        """
        distance, plan = w1_distance(self.center(), self.target())
        distance = float(distance)
        written = [write_text(self.out / "w1.txt", f"{distance!r}\n")]
        if self.config.dump_coupling:
            written.append(write_text(self.out / "coupling.csv", coupling_to_csv(plan)))
        logger.info("w1: %r", distance)
        return RunResponse(
            status=0,
            message=repr(distance),
            data=[str(p) for p in written],
        )
