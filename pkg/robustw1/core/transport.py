"""
This module contains exact 1-Wasserstein computations between discrete measures: the network-simplex distance with its optimal plan, the 1-d quantile formula, and Kantorovich-Rubinstein dual potentials.
"""

# External Libraries
import numpy as np
import ot
from scipy.spatial.distance import cdist
from scipy.stats import wasserstein_distance

# Python Standard Libraries
import logging
import math

# Local Libraries
from robustw1.core.measures import union_support
from robustw1.errors import DimensionMismatch, NumericalFailure
from robustw1.models.measures import DiscreteMeasure, frozen_array
from robustw1.models.results import DualPotential, TransportPlan
from robustw1.settings import settings

logger = logging.getLogger(__name__)

# Residual masses below this are rounding noise left by presaturation.
_RESIDUAL_TOL = 1e-15


def _check_dims(rho: DiscreteMeasure, sigma: DiscreteMeasure) -> None:
    if rho.dim != sigma.dim:
        raise DimensionMismatch(
            f"measures live in R^{rho.dim} and R^{sigma.dim}"
        )


def ground_cost(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """
    Euclidean cost matrix with distances at merge tolerance set to exactly 0.
    """
    cost = cdist(source, target)
    cost[cost <= settings.merge_tol] = 0.0
    return cost


def network_simplex(
    a: np.ndarray, b: np.ndarray, cost: np.ndarray
) -> tuple[np.ndarray, dict]:
    """
    Solve a balanced transport problem exactly with POT's network simplex.

    Args:
        a (np.ndarray): Source masses.
        b (np.ndarray): Target masses with the same total.
        cost (np.ndarray): Cost matrix.

    Returns:
        tuple[np.ndarray, dict]: The optimal plan and POT's log (cost, u, v).
    """
    plan, log = ot.emd(
        np.ascontiguousarray(a),
        np.ascontiguousarray(b),
        np.ascontiguousarray(cost),
        numItermax=settings.lp_max_iter,
        log=True,
    )
    if log.get("result_code", 1) != 1:
        raise NumericalFailure(
            f"network simplex stopped early: {log.get('warning')}"
        )
    return np.asarray(plan), log


def w1_distance(
    rho: DiscreteMeasure, sigma: DiscreteMeasure
) -> tuple[float, TransportPlan]:
    """
    Exact W1 distance and an optimal transport plan from rho to sigma.

    Mass shared by coincident atoms is left in place before pivoting; for a
    metric cost some optimal plan always does this.

    Args:
        rho (DiscreteMeasure): Source measure.
        sigma (DiscreteMeasure): Target measure.

    Returns:
        tuple[float, TransportPlan]: The distance and the plan.
    """
    _check_dims(rho, sigma)
    cost = ground_cost(rho.atoms, sigma.atoms)
    a = rho.weights.copy()
    b = sigma.weights.copy()
    flow = np.zeros_like(cost)

    for i, j in zip(*np.nonzero(cost == 0.0)):
        moved = min(a[i], b[j])
        flow[i, j] += moved
        a[i] -= moved
        b[j] -= moved

    src = np.flatnonzero(a > _RESIDUAL_TOL)
    dst = np.flatnonzero(b > _RESIDUAL_TOL)
    mass_a = math.fsum(a[src])
    mass_b = math.fsum(b[dst])
    if len(src) and len(dst) and min(mass_a, mass_b) > _RESIDUAL_TOL:
        sub, _ = network_simplex(
            a[src] / mass_a, b[dst] / mass_b, cost[np.ix_(src, dst)]
        )
        flow[np.ix_(src, dst)] += sub * mass_a
    flow = np.maximum(flow, 0.0)

    total = math.fsum((flow * cost).ravel())
    logger.debug(
        "w1 between %d and %d atoms: %.17g (%d presaturated pairs)",
        rho.size,
        sigma.size,
        total,
        int(np.count_nonzero(cost == 0.0)),
    )
    plan = TransportPlan(
        source_atoms=rho.atoms,
        target_atoms=sigma.atoms,
        flow=frozen_array(flow, 2),
        total_cost=total,
    )
    return total, plan


def w1_1d(rho: DiscreteMeasure, sigma: DiscreteMeasure) -> float:
    """
    W1 in dimension 1 from the quantile coupling, integral of |F_rho^-1 - F_sigma^-1|.
    """
    if rho.dim != 1 or sigma.dim != 1:
        raise DimensionMismatch(
            f"the quantile formula needs d = 1, got R^{rho.dim} and R^{sigma.dim}"
        )
    return float(
        wasserstein_distance(
            rho.atoms[:, 0], sigma.atoms[:, 0], rho.weights, sigma.weights
        )
    )


def kr_dual_potential(
    rho: DiscreteMeasure, sigma: DiscreteMeasure
) -> DualPotential:
    """
    A 1-Lipschitz f on the union support with integral(f, rho) - integral(f, sigma) = W1(rho, sigma).

    The network simplex duals (u, v) are turned into f by the Lipschitz
    envelope f(z) = min_j (||z - y_j|| - v_j), which is 1-Lipschitz, dominates
    u on the source atoms and is dominated by -v on the target atoms.

    Args:
        rho (DiscreteMeasure): Source measure.
        sigma (DiscreteMeasure): Target measure.

    Returns:
        DualPotential: The potential on the union support.
    """
    _check_dims(rho, sigma)
    _, log = network_simplex(
        rho.weights, sigma.weights, ground_cost(rho.atoms, sigma.atoms)
    )
    v = np.asarray(log["v"], dtype=np.float64)
    points = union_support(rho, sigma)
    values = np.min(ground_cost(points, sigma.atoms) - v[np.newaxis, :], axis=1)
    return DualPotential(
        atoms=frozen_array(points, 2),
        values=frozen_array(values, 1),
    )
