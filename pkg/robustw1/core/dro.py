"""
This module contains the exact solvers of the robust problem

    minimize  integral(V, nu)  over nu on a finite support S with W1(nu, mu) <= theta.

The primal is the coupling LP solved with HiGHS; the dual maximises the concave piecewise-linear function
g(lambda) = -lambda * theta + sum_i mu_i * min_j [V(y_j) + lambda * ||x_i - y_j||] exactly, independently of the LP.
"""

# External Libraries
import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix, eye, kron
from scipy.spatial import cKDTree

# Python Standard Libraries
import logging
import math

# Local Libraries
from robustw1.core.measures import as_points, canonical_points, integrate, make_measure
from robustw1.core.payoffs import negate
from robustw1.core.transport import ground_cost
from robustw1.errors import (
    EmptySupport,
    InfeasibleInstance,
    InstanceError,
    NumericalFailure,
)
from robustw1.models.measures import DiscreteMeasure, PayoffSpec, frozen_array
from robustw1.models.results import RobustInstance, Solution, TransportPlan
from robustw1.settings import settings

logger = logging.getLogger(__name__)

_CUTTING_PLANE_MAX_ITER = 10_000
_GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def make_instance(
    payoff: PayoffSpec,
    center: DiscreteMeasure,
    radius: float,
    support,
    include_center: bool = True,
) -> RobustInstance:
    """
    Build a robust instance on a canonicalised candidate support.

    Args:
        payoff (PayoffSpec): The payoff V.
        center (DiscreteMeasure): The ball center mu.
        radius (float): The radius theta.
        support: Candidate support points.
        include_center (bool): Add the center atoms to the support.

    Returns:
        RobustInstance: The instance.
    """
    points = as_points(support, dim=center.dim)
    if include_center:
        points = np.vstack([points, center.atoms])
    return RobustInstance(
        payoff=payoff,
        center=center,
        radius=float(radius),
        support=frozen_array(canonical_points(points), 2),
    )


def lambda_c_transform(
    payoff: PayoffSpec, lam: float, x, support
) -> float:
    """
    The lambda-c-transform V_lambda(x) = min over y in support of V(y) + lambda * ||x - y||.

    Args:
        payoff (PayoffSpec): The payoff V.
        lam (float): Nonnegative multiplier.
        x: The evaluation point.
        support: Candidate points y.

    Returns:
        float: V_lambda(x).
    """
    if lam < 0:
        raise InstanceError(f"lambda must be >= 0, got {lam}")
    points = as_points(support)
    if points.shape[0] == 0:
        raise EmptySupport("the lambda-c-transform needs a nonempty support")
    x_row = as_points([np.ravel(np.asarray(x, dtype=np.float64))], dim=points.shape[1])
    cost = ground_cost(x_row, points)[0]
    return float(np.min(payoff(points) + lam * cost))


def lipschitz_bounds(instance: RobustInstance) -> tuple[float, float]:
    """
    A-priori interval (F(mu) - K * theta, F(mu)) holding the optimum.
    """
    nominal = integrate(instance.payoff, instance.center)
    return nominal - instance.payoff.lipschitz_K * instance.radius, nominal


class _DualFunction:
    """
    Evaluates g(lambda) and its one-sided slopes for an instance.
    """

    def __init__(self, instance: RobustInstance):
        self.values = instance.payoff(instance.support)
        self.cost = ground_cost(instance.center.atoms, instance.support)
        self.weights = np.asarray(instance.center.weights)
        self.theta = instance.radius

    def __call__(self, lam: float) -> tuple[float, float, float]:
        lines = self.values[np.newaxis, :] + lam * self.cost
        envelope = lines.min(axis=1)
        tol = 1e-12 * (1.0 + np.abs(envelope))
        active = lines <= (envelope + tol)[:, np.newaxis]
        right = np.where(active, self.cost, np.inf).min(axis=1)
        left = np.where(active, self.cost, -np.inf).max(axis=1)
        g = math.fsum(self.weights * envelope) - lam * self.theta
        return (
            g,
            float(self.weights @ left) - self.theta,
            float(self.weights @ right) - self.theta,
        )


def _golden_section(dual: _DualFunction, lo: float, hi: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    gc, gd = dual(c)[0], dual(d)[0]
    while b - a > _GOLDEN_TOL:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - _INVPHI * (b - a)
            gc = dual(c)[0]
        else:
            a, c, gc = c, d, gd
            d = a + _INVPHI * (b - a)
            gd = dual(d)[0]
    candidates = [(dual(x)[0], x) for x in (lo, a, b, hi)]
    best_g, best_x = max(candidates)
    return best_x, best_g


def solve_dual(instance: RobustInstance) -> tuple[float, float]:
    """
    Maximise g over lambda in [0, K] exactly.

    g is concave and piecewise linear, and non-increasing beyond K. A
    one-dimensional cutting-plane method intersects the tangents at the two
    ends of the bracket; once the new point reaches the tangent model it is
    optimal, and each failed step exposes a new linear piece, so the loop is
    finite. Golden-section search on the bracket is the fallback.

    Args:
        instance (RobustInstance): The instance.

    Returns:
        tuple[float, float]: (lambda_star, dual_value).
    """
    dual = _DualFunction(instance)
    K = instance.payoff.lipschitz_K
    g_lo, _, s_lo = dual(0.0)
    if K == 0.0 or s_lo <= 0.0:
        return 0.0, g_lo
    g_hi, s_hi, _ = dual(K)
    if s_hi >= 0.0:
        return K, g_hi

    lo, hi = 0.0, K
    for iteration in range(_CUTTING_PLANE_MAX_ITER):
        lam = (g_hi - g_lo + s_lo * lo - s_hi * hi) / (s_lo - s_hi)
        lam = min(max(lam, lo), hi)
        model = g_lo + s_lo * (lam - lo)
        g, s_left, s_right = dual(lam)
        if model - g <= 1e-12 * (1.0 + abs(g)):
            logger.debug("dual converged in %d cuts at lambda=%.17g", iteration + 1, lam)
            return lam, g
        if s_right > 0.0:
            lo, g_lo, s_lo = lam, g, s_right
        elif s_left < 0.0:
            hi, g_hi, s_hi = lam, g, s_left
        else:
            return lam, g
    logger.warning("cutting planes did not close; falling back to golden section")
    lam, g = _golden_section(dual, lo, hi)
    if not math.isfinite(g):
        raise NumericalFailure("dual maximisation produced a non-finite value")
    return lam, g


def _center_columns(instance: RobustInstance) -> np.ndarray:
    _, index = cKDTree(instance.support).query(instance.center.atoms, p=np.inf)
    return index


def _certificate(
    instance: RobustInstance, flow: np.ndarray
) -> tuple[DiscreteMeasure, TransportPlan]:
    """
    Turn LP output into an exactly feasible coupling and its column marginal.
    """
    weights = np.asarray(instance.center.weights)
    cost = ground_cost(instance.center.atoms, instance.support)
    flow = np.maximum(flow, 0.0)
    row_sums = flow.sum(axis=1)
    stay = _center_columns(instance)
    for i, total in enumerate(row_sums):
        if total > 0.0:
            flow[i] *= weights[i] / total
        else:
            flow[i] = 0.0
            flow[i, stay[i]] = weights[i]

    spent = math.fsum((flow * cost).ravel())
    if spent > instance.radius:
        # Blend toward the zero-cost plan that leaves mu in place.
        t = (spent - instance.radius) / spent
        flow *= 1.0 - t
        flow[np.arange(len(stay)), stay] += t * weights

    column_mass = flow.sum(axis=0)
    columns = np.flatnonzero(column_mass > 0.0)
    minimizer = make_measure(instance.support[columns], column_mass[columns])
    # canonical support is sorted, so the minimizer keeps column order
    flow = flow[:, columns]
    plan = TransportPlan(
        source_atoms=instance.center.atoms,
        target_atoms=minimizer.atoms,
        flow=frozen_array(flow, 2),
        total_cost=math.fsum((flow * cost[:, columns]).ravel()),
    )
    return minimizer, plan


def _degenerate(instance: RobustInstance, with_dual: bool) -> Solution:
    center = instance.center
    value = integrate(instance.payoff, center)
    plan = TransportPlan(
        source_atoms=center.atoms,
        target_atoms=center.atoms,
        flow=frozen_array(np.diag(center.weights), 2),
        total_cost=0.0,
    )
    if with_dual:
        lam, dual_value = solve_dual(instance)
    else:
        lam, dual_value = instance.payoff.lipschitz_K, value
    return Solution(
        value=value,
        minimizer=center,
        coupling=plan,
        dual_lambda=lam,
        dual_value=dual_value,
        gap=abs(value - dual_value),
        radius=instance.radius,
        payoff_name=instance.payoff.name,
    )


def solve_primal(instance: RobustInstance, with_dual: bool = True) -> Solution:
    """
    Solve the coupling LP

        minimize sum_ij V(y_j) pi_ij  s.t.  sum_j pi_ij = mu_i,  sum_ij c_ij pi_ij <= theta,  pi >= 0

    whose optimum equals the robust minimum over measures on the support.

    Args:
        instance (RobustInstance): The instance.
        with_dual (bool): Also run solve_dual and report the duality gap. Otherwise the LP's own multiplier is used.

    Returns:
        Solution: The optimum, a minimizer and its coupling certificate.
    """
    support = canonical_points(instance.support)
    if not np.array_equal(support, instance.support):
        instance = instance.model_copy(update={"support": frozen_array(support, 2)})
    if instance.radius == 0.0:
        return _degenerate(instance, with_dual)

    center, support = instance.center, instance.support
    m, s = center.size, support.shape[0]
    values = instance.payoff(support)
    cost = ground_cost(center.atoms, support)

    result = linprog(
        c=np.tile(values, m),
        A_ub=csr_matrix(cost.reshape(1, -1)),
        b_ub=np.array([instance.radius]),
        A_eq=kron(eye(m, format="csr"), csr_matrix(np.ones((1, s))), format="csr"),
        b_eq=np.asarray(center.weights),
        bounds=(0.0, None),
        method="highs-ds",
        options={
            "maxiter": settings.lp_max_iter,
            "primal_feasibility_tolerance": settings.feasibility_tol,
            "dual_feasibility_tolerance": settings.optimality_tol,
        },
    )
    if result.status == 2:
        raise InfeasibleInstance(f"coupling LP is infeasible: {result.message}")
    if result.status != 0 or result.x is None:
        raise NumericalFailure(
            f"coupling LP failed (status {result.status}): {result.message}"
        )
    logger.debug(
        "coupling LP with %d variables solved in %s iterations, objective %.17g",
        m * s,
        getattr(result, "nit", "?"),
        result.fun,
    )

    minimizer, plan = _certificate(instance, result.x.reshape(m, s))
    value = integrate(instance.payoff, minimizer)
    if with_dual:
        lam, dual_value = solve_dual(instance)
    else:
        marginals = getattr(result.ineqlin, "marginals", np.zeros(1))
        lam = max(0.0, -float(marginals[0]))
        dual_value = _DualFunction(instance)(lam)[0]
    gap = abs(value - dual_value)
    if gap > 1e-6 * (1.0 + abs(value)):
        logger.warning(
            "duality gap %.3g exceeds tolerance (primal %.17g, dual %.17g)",
            gap,
            value,
            dual_value,
        )
    return Solution(
        value=value,
        minimizer=minimizer,
        coupling=plan,
        dual_lambda=lam,
        dual_value=dual_value,
        gap=gap,
        radius=instance.radius,
        payoff_name=instance.payoff.name,
    )


def solve_robust_max(instance: RobustInstance, with_dual: bool = True) -> Solution:
    """
    The robust maximum of integral(V, nu) over the same ball, by minimising -V.
    """
    flipped = make_instance(
        negate(instance.payoff),
        instance.center,
        instance.radius,
        instance.support,
        include_center=False,
    )
    solution = solve_primal(flipped, with_dual=with_dual)
    return solution.model_copy(
        update={
            "value": -solution.value,
            "dual_value": -solution.dual_value,
            "payoff_name": instance.payoff.name,
        }
    )
