"""
This module contains the registry of built-in payoffs. Each builder returns a PayoffSpec whose Lipschitz constant K and sup-bound B are known analytically (or, for tabulated payoffs, exactly from the table).
"""

# External Libraries
import numpy as np
from pydantic import ValidationError

# Python Standard Libraries
import logging
import math
from typing import Any, Callable

# Local Libraries
from robustw1.errors import DimensionMismatch, InstanceError, UnknownPayoff
from robustw1.models.measures import PayoffSpec

logger = logging.getLogger(__name__)


def clamp(
    a: list[float] | float = 1.0,
    b: float = 0.0,
    lo: float = -1.0,
    hi: float = 1.0,
) -> PayoffSpec:
    """
    V(x) = min(max(<a, x> + b, lo), hi), with K = ||a||_2 and B = max(|lo|, |hi|).
    """
    a_vec = np.atleast_1d(np.asarray(a, dtype=np.float64))
    if lo >= hi:
        raise InstanceError(f"clamp needs lo < hi, got {lo} and {hi}")

    def evaluate(points: np.ndarray) -> np.ndarray:
        return np.clip(points @ a_vec + b, lo, hi)

    return PayoffSpec(
        evaluator=evaluate,
        lipschitz_K=float(np.linalg.norm(a_vec)),
        sup_bound_B=max(abs(lo), abs(hi)),
        name="clamp",
        dim=int(a_vec.shape[0]),
        params={"a": a_vec.tolist(), "b": b, "lo": lo, "hi": hi},
    )


def call(
    strike: float = 0.0,
    cap: float = 1.0,
    axis: int = 0,
    dim: int = 1,
) -> PayoffSpec:
    """
    Clipped call max(0, min(x_axis - strike, cap)), with K = 1 and B = cap.
    """
    if cap <= 0:
        raise InstanceError(f"call cap must be positive, got {cap}")
    if not 0 <= axis < dim:
        raise DimensionMismatch(f"axis {axis} is not a coordinate of R^{dim}")

    def evaluate(points: np.ndarray) -> np.ndarray:
        return np.clip(points[:, axis] - strike, 0.0, cap)

    return PayoffSpec(
        evaluator=evaluate,
        lipschitz_K=1.0,
        sup_bound_B=float(cap),
        name="call",
        dim=dim,
        params={"strike": strike, "cap": cap, "axis": axis, "dim": dim},
    )


def bump(
    center: list[float] | float = 0.0,
    height: float = 1.0,
    width: float = 1.0,
) -> PayoffSpec:
    """
    Gaussian bump height * exp(-||x - center||^2 / (2 width^2)).

    The radial profile has its steepest slope at distance width, giving
    K = |height| * exp(-1/2) / width and B = |height|.
    """
    c_vec = np.atleast_1d(np.asarray(center, dtype=np.float64))
    if width <= 0 or height == 0:
        raise InstanceError("bump needs width > 0 and height != 0")

    def evaluate(points: np.ndarray) -> np.ndarray:
        sq = np.sum((points - c_vec) ** 2, axis=1)
        return height * np.exp(-sq / (2.0 * width**2))

    return PayoffSpec(
        evaluator=evaluate,
        lipschitz_K=abs(height) * math.exp(-0.5) / width,
        sup_bound_B=abs(height),
        name="bump",
        dim=int(c_vec.shape[0]),
        params={"center": c_vec.tolist(), "height": height, "width": width},
    )


def tabulated(grid: list[float], values: list[float]) -> PayoffSpec:
    """
    Piecewise-linear interpolation of values on a 1-d grid, constant beyond its ends.

    K is the largest finite-difference slope, which is exactly the Lipschitz constant of the interpolant.
    """
    xs = np.asarray(grid, dtype=np.float64)
    ys = np.asarray(values, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.shape[0] < 2:
        raise InstanceError("tabulated payoff needs matching grids of length >= 2")
    if np.any(np.diff(xs) <= 0):
        raise InstanceError("tabulated grid must be strictly increasing")
    slopes = np.abs(np.diff(ys) / np.diff(xs))

    def evaluate(points: np.ndarray) -> np.ndarray:
        return np.interp(points[:, 0], xs, ys)

    return PayoffSpec(
        evaluator=evaluate,
        lipschitz_K=float(slopes.max()),
        sup_bound_B=max(float(np.abs(ys).max()), np.finfo(np.float64).tiny),
        name="tabulated",
        dim=1,
        params={"grid": xs.tolist(), "values": ys.tolist()},
    )


def constant(level: float = 0.0, dim: int | None = None) -> PayoffSpec:
    """
    V(x) = level, declared with K = 0.
    """

    def evaluate(points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[0], float(level))

    return PayoffSpec(
        evaluator=evaluate,
        lipschitz_K=0.0,
        sup_bound_B=max(abs(level), np.finfo(np.float64).tiny),
        name="constant",
        dim=dim,
        params={"level": level, "dim": dim},
    )


def negate(payoff: PayoffSpec) -> PayoffSpec:
    """
    The payoff -V with the same constants.
    """
    inner = payoff.evaluator

    def evaluate(points: np.ndarray) -> np.ndarray:
        return -np.asarray(inner(points), dtype=np.float64)

    return payoff.model_copy(
        update={
            "evaluator": evaluate,
            "name": f"neg_{payoff.name}",
        }
    )


REGISTRY: dict[str, Callable[..., PayoffSpec]] = {
    "clamp": clamp,
    "call": call,
    "bump": bump,
    "tabulated": tabulated,
    "constant": constant,
}


def make_payoff(name: str, params: list[Any] | dict[str, Any] | None = None) -> PayoffSpec:
    """
    Build a registry payoff from its name and a positional or keyword parameter list.

    Args:
        name (str): Registry name.
        params (list | dict | None): Builder arguments.

    Returns:
        PayoffSpec: The payoff.
    """
    try:
        builder = REGISTRY[name]
    except KeyError:
        raise UnknownPayoff(
            f"unknown payoff '{name}'; available: {', '.join(sorted(REGISTRY))}"
        )
    try:
        if params is None:
            return builder()
        if isinstance(params, dict):
            return builder(**params)
        return builder(*params)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors()
        )
        raise InstanceError(f"bad parameters for payoff '{name}': {problems}")
    except (TypeError, ValueError) as e:
        raise InstanceError(f"bad parameters for payoff '{name}': {e}")
