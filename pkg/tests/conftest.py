# External Libraries
import numpy as np
import pytest

# Python Standard Libraries
import logging
from functools import lru_cache

# Local Libraries
from robustw1.core.dro import make_instance
from robustw1.core.measures import make_measure, random_measure
from robustw1.core.payoffs import bump, call, clamp, constant, tabulated
from robustw1.models.measures import Box, PayoffSpec
from robustw1.models.results import RobustInstance


@pytest.fixture(autouse=True)
def detach_log_handlers():
    yield
    logger = logging.getLogger("robustw1")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def clamp_payoff() -> PayoffSpec:
    return clamp()


def cube(dim: int, half_width: float) -> Box:
    return Box(lower=(-half_width,) * dim, upper=(half_width,) * dim)


def random_payoff(rng: np.random.Generator, dim: int) -> PayoffSpec:
    """
    One of the registry payoffs with random parameters.
    """
    kinds = ["clamp", "call", "bump", "constant"] + (["tabulated"] if dim == 1 else [])
    kind = kinds[rng.integers(len(kinds))]
    if kind == "clamp":
        return clamp(
            a=rng.normal(size=dim).tolist(),
            b=float(rng.uniform(-0.5, 0.5)),
            lo=-1.0,
            hi=1.0,
        )
    if kind == "call":
        return call(
            strike=float(rng.uniform(-1, 1)),
            cap=float(rng.uniform(0.2, 2)),
            axis=int(rng.integers(dim)),
            dim=dim,
        )
    if kind == "bump":
        return bump(
            center=rng.uniform(-1, 1, size=dim).tolist(),
            height=float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2)),
            width=float(rng.uniform(0.2, 1)),
        )
    if kind == "tabulated":
        grid = np.sort(rng.choice(np.arange(-20, 21) / 10.0, size=6, replace=False))
        return tabulated(grid.tolist(), rng.uniform(-1, 1, size=6).tolist())
    return constant(level=float(rng.uniform(-1, 1)), dim=dim)


def random_instance(
    rng: np.random.Generator,
    max_center: int = 8,
    max_support: int = 32,
) -> RobustInstance:
    """
    Random instance in d in {1, 2}: center in [-1, 1]^d, support in [-2, 2]^d, log-uniform radius in [1e-3, 10].
    """
    dim = int(rng.integers(1, 3))
    center = random_measure(rng, int(rng.integers(1, max_center + 1)), cube(dim, 1.0))
    support = rng.uniform(-2, 2, size=(int(rng.integers(1, max_support + 1)), dim))
    theta = float(10 ** rng.uniform(-3, 1))
    return make_instance(random_payoff(rng, dim), center, theta, support)


@lru_cache(maxsize=None)
def compositions(total: int, parts: int) -> np.ndarray:
    """
    All rows of `parts` nonnegative integers summing to total.
    """
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = [
        np.column_stack(
            [np.full(len(tail), first), tail]
        )
        for first in range(total + 1)
        for tail in [compositions(total - first, parts - 1)]
    ]
    return np.vstack(blocks)


def brute_force_minimum(instance: RobustInstance, steps: int) -> float:
    """
    Minimum of integral(V, nu) over nu on a 1-d support with weights in multiples of 1 / steps and W1(nu, center) <= theta.
    """
    support = instance.support[:, 0]
    assert np.all(np.diff(support) > 0)
    center = np.zeros(len(support))
    index = np.searchsorted(support, instance.center.atoms[:, 0])
    np.add.at(center, index, instance.center.weights)

    nus = compositions(steps, len(support)) / steps
    gaps = np.diff(support)
    cdf_gap = np.abs(np.cumsum(nus, axis=1)[:, :-1] - np.cumsum(center)[:-1])
    distances = cdf_gap @ gaps
    values = nus @ instance.payoff(instance.support)
    feasible = distances <= instance.radius + 1e-12
    return float(values[feasible].min())


def grid_weights(rng: np.random.Generator, count: int, steps: int) -> np.ndarray:
    """
    Positive weights in multiples of 1 / steps.
    """
    counts = rng.multinomial(steps - count, np.full(count, 1.0 / count)) + 1
    return counts / steps


def measure_on_grid(rng: np.random.Generator, atoms: np.ndarray, steps: int):
    return make_measure(atoms, grid_weights(rng, len(atoms), steps))
