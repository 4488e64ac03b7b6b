"""
This module contains the experiment engine: convergence studies over filtration levels, domain-perturbation scans over the radius, and the center-shift check.

Independent solves are fanned out on a thread pool from an asyncio loop; results are always assembled in level (or radius) order.
"""

# External Libraries
import nest_asyncio
import numpy as np
from tqdm import tqdm

# Python Standard Libraries
import asyncio
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Iterable, NamedTuple

# Local Libraries
from robustw1.core.dro import make_instance, solve_primal
from robustw1.core.filtration import cell_centers, make_filtration, mesh, project
from robustw1.core.transport import w1_distance
from robustw1.errors import InstanceError, InvalidRadius
from robustw1.models.measures import Box, DiscreteMeasure, PayoffSpec
from robustw1.models.results import (
    CenterShiftRow,
    ConvergenceRow,
    ConvergenceStudy,
    PerturbationRow,
    RobustInstance,
)
from robustw1.settings import settings

logger = logging.getLogger(__name__)

nest_asyncio.apply()


class _LevelSolve(NamedTuple):
    level: int
    mesh: float
    center_error: float
    value: float
    solver_gap: float


def solve_level(
    payoff: PayoffSpec,
    mu: DiscreteMeasure,
    box: Box,
    theta: float,
    level: int,
) -> _LevelSolve:
    """
    Solve the level-n problem: center project(mu, F_n), support the level-n cell centers.
    """
    filtration = make_filtration(box, level)
    mu_n = project(mu, filtration)
    center_error, _ = w1_distance(mu_n, mu)
    instance = RobustInstance(
        payoff=payoff,
        center=mu_n,
        radius=theta,
        support=cell_centers(filtration),
    )
    solution = solve_primal(instance)
    logger.debug(
        "level %d: value %.17g, center error %.3g, gap %.3g",
        level,
        solution.value,
        center_error,
        solution.gap,
    )
    return _LevelSolve(
        level=level,
        mesh=mesh(filtration),
        center_error=center_error,
        value=solution.value,
        solver_gap=solution.gap,
    )


async def _gather_in_pool(jobs: list, threads: int, progress: bool, label: str) -> list:
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=threads) as pool, tqdm(
        total=len(jobs),
        desc=label,
        disable=not progress,
        file=sys.stderr,
    ) as bar:
        futures = []
        for job in jobs:
            future = loop.run_in_executor(pool, job)
            future.add_done_callback(lambda _: bar.update())
            futures.append(future)
        return await asyncio.gather(*futures)


def _check_theta(theta: float) -> None:
    if not np.isfinite(theta) or theta < 0:
        raise InvalidRadius(f"radius must be finite and >= 0, got {theta}")


async def astudy_convergence(
    payoff: PayoffSpec,
    mu: DiscreteMeasure,
    box: Box,
    theta: float,
    levels: Iterable[int],
    reference_level: int,
    threads: int | None = None,
    progress: bool = False,
) -> ConvergenceStudy:
    """
    Solve the level-n problems for every requested level and a finer reference level, and compare.

    Args:
        payoff (PayoffSpec): The payoff V.
        mu (DiscreteMeasure): The nominal measure, supported in box.
        box (Box): The filtration box.
        theta (float): The radius.
        levels (Iterable[int]): The levels to report.
        reference_level (int): Level standing in for the continuum problem; must exceed every level.
        threads (int | None): Worker threads; defaults to ROBUSTW1_THREADS.
        progress (bool): Show a progress bar on stderr.

    Returns:
        ConvergenceStudy: Rows ordered by level, the reference value and the error budgets.
    """
    _check_theta(theta)
    levels = sorted(set(int(n) for n in levels))
    if not levels:
        raise InstanceError("a convergence study needs at least one level")
    if reference_level <= levels[-1]:
        raise InstanceError(
            f"reference level {reference_level} must exceed every study level "
            f"(largest {levels[-1]})"
        )
    jobs = [
        partial(solve_level, payoff, mu, box, theta, level)
        for level in [*levels, reference_level]
    ]
    logger.info(
        "convergence study: levels %d..%d, reference %d, theta %g",
        levels[0],
        levels[-1],
        reference_level,
        theta,
    )
    *solves, reference = await _gather_in_pool(
        jobs, threads or settings.threads, progress, "levels"
    )

    K = payoff.lipschitz_K
    rows = [
        ConvergenceRow(
            level=s.level,
            mesh=s.mesh,
            center_error=s.center_error,
            value=s.value,
            gap_to_reference=abs(s.value - reference.value),
            solver_gap=s.solver_gap,
        )
        for s in solves
    ]
    values = [row.value for row in rows]
    monotone = all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
    if not monotone:
        logger.info("values were not monotone in the level")
    return ConvergenceStudy(
        rows=rows,
        reference_level=reference_level,
        reference_value=reference.value,
        reference_gap=reference.solver_gap,
        budgets=[K * (row.center_error + row.mesh / 2.0) for row in rows],
        monotone=monotone,
    )


def study_convergence(*args, **kwargs) -> ConvergenceStudy:
    """
    Synchronous wrapper of astudy_convergence.
    """
    return asyncio.run(astudy_convergence(*args, **kwargs))


def run_convergence_study(
    payoff: PayoffSpec,
    mu: DiscreteMeasure,
    box: Box,
    theta: float,
    levels: Iterable[int],
    reference_level: int,
    threads: int | None = None,
) -> list[ConvergenceRow]:
    """
    The rows of a convergence study, ordered by level.
    """
    return study_convergence(
        payoff, mu, box, theta, levels, reference_level, threads=threads
    ).rows


def _value_at_radius(instance: RobustInstance, theta: float) -> float:
    return solve_primal(instance.model_copy(update={"radius": theta})).value


async def adomain_perturbation_scan(
    payoff: PayoffSpec,
    center: DiscreteMeasure,
    support,
    thetas: list[float],
    threads: int | None = None,
    progress: bool = False,
) -> list[PerturbationRow]:
    """
    Optimal value m(theta) for each radius on a fixed support.

    Args:
        payoff (PayoffSpec): The payoff V.
        center (DiscreteMeasure): The ball center.
        support: Candidate support; the center atoms are added to it.
        thetas (list[float]): Positive radii in ascending order.
        threads (int | None): Worker threads; defaults to ROBUSTW1_THREADS.
        progress (bool): Show a progress bar on stderr.

    Returns:
        list[PerturbationRow]: One row per radius, in the given order.
    """
    thetas = [float(t) for t in thetas]
    if not thetas:
        raise InvalidRadius("a perturbation scan needs at least one radius")
    if any(t <= 0 or not np.isfinite(t) for t in thetas):
        raise InvalidRadius(f"scan radii must be positive and finite: {thetas}")
    if any(b < a for a, b in zip(thetas, thetas[1:])):
        raise InvalidRadius("scan radii must be sorted ascending")

    base = make_instance(payoff, center, thetas[0], support)
    jobs = [partial(_value_at_radius, base, theta) for theta in thetas]
    values = await _gather_in_pool(
        jobs, threads or settings.threads, progress, "radii"
    )
    return [PerturbationRow(theta=t, value=v) for t, v in zip(thetas, values)]


def domain_perturbation_scan(
    payoff: PayoffSpec,
    center: DiscreteMeasure,
    support,
    thetas: list[float],
    threads: int | None = None,
) -> list[PerturbationRow]:
    """
    Synchronous wrapper of adomain_perturbation_scan.
    """
    return asyncio.run(
        adomain_perturbation_scan(payoff, center, support, thetas, threads=threads)
    )


def center_shift(
    payoff: PayoffSpec,
    mu: DiscreteMeasure,
    shifted: DiscreteMeasure,
    support,
    theta: float,
) -> CenterShiftRow:
    """
    Compare the robust minimum around mu with the one around a shifted center on a support containing both.

    The difference is at most K * W1(mu, shifted): a ball of radius theta
    around the shifted center lies in the ball of radius theta + W1 around mu.
    """
    _check_theta(theta)
    points = np.vstack([np.asarray(support, dtype=np.float64).reshape(-1, mu.dim), shifted.atoms])
    value = solve_primal(make_instance(payoff, mu, theta, points)).value
    shifted_value = solve_primal(
        make_instance(payoff, shifted, theta, np.vstack([points, mu.atoms]))
    ).value
    distance, _ = w1_distance(mu, shifted)
    return CenterShiftRow(
        w1=distance,
        value=value,
        shifted_value=shifted_value,
        bound=payoff.lipschitz_K * distance,
    )
