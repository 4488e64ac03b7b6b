"""
This module contains the models for transport plans, robust instances and the results produced by the solvers and experiments.
"""

# External Libraries
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.spatial import cKDTree

# Python Standard Libraries
import math

# Local Libraries
from robustw1.errors import (
    DimensionMismatch,
    EmptySupport,
    InfeasibleInstance,
    InvalidRadius,
)
from robustw1.models.measures import DiscreteMeasure, PayoffSpec
from robustw1.settings import settings


class TransportPlan(BaseModel):
    """
    This class represents a coupling between a source and a target measure. Rows of flow index source atoms, columns index target atoms.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source_atoms: np.ndarray = Field(
        description="The (m, d) source atoms.",
    )
    target_atoms: np.ndarray = Field(
        description="The (s, d) target atoms.",
    )
    flow: np.ndarray = Field(
        description="The (m, s) nonnegative flow matrix.",
    )
    total_cost: float = Field(
        ge=0.0,
        description="Sum of flow times Euclidean distance.",
    )

    def nonzero(self) -> list[tuple[int, int, float, float]]:
        """
        Returns the (i, j, flow, cost) entries with positive flow in row-major order.
        """
        rows, cols = np.nonzero(self.flow > 0)
        dist = np.linalg.norm(
            self.source_atoms[rows] - self.target_atoms[cols], axis=1
        )
        return [
            (int(i), int(j), float(self.flow[i, j]), float(c))
            for i, j, c in zip(rows, cols, dist)
        ]


class DualPotential(BaseModel):
    """
    This class represents a Kantorovich-Rubinstein witness: a 1-Lipschitz function given by its values on the union of two supports.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    atoms: np.ndarray = Field(
        description="The (n, d) union support.",
    )
    values: np.ndarray = Field(
        description="The (n,) potential values on the union support.",
    )

    def integrate(self, measure: DiscreteMeasure) -> float:
        """
        Integrate the potential against a measure supported in the union support.
        """
        tree = cKDTree(self.atoms)
        dist, index = tree.query(measure.atoms, p=np.inf)
        if np.any(dist > settings.merge_tol):
            raise DimensionMismatch("measure is not supported on the potential's atoms")
        return math.fsum(measure.weights * self.values[index])


class RobustInstance(BaseModel):
    """
    This class represents one instance of the robust minimization problem: minimize the integral of payoff over measures on support within W1-distance radius of center.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    payoff: PayoffSpec = Field(
        description="The payoff V.",
    )
    center: DiscreteMeasure = Field(
        description="The nominal measure at the center of the ball.",
    )
    radius: float = Field(
        description="The ball radius theta; 0 is the degenerate ball.",
    )
    support: np.ndarray = Field(
        description="The (s, d) candidate support for the decision measure.",
    )

    @model_validator(mode="after")
    def check_instance(self) -> "RobustInstance":
        if not math.isfinite(self.radius) or self.radius < 0:
            raise InvalidRadius(f"radius must be finite and >= 0, got {self.radius}")
        if self.support.ndim != 2 or self.support.shape[0] == 0:
            raise EmptySupport("candidate support must be a nonempty (s, d) array")
        if self.support.shape[1] != self.center.dim:
            raise DimensionMismatch(
                f"support is in R^{self.support.shape[1]}, "
                f"center in R^{self.center.dim}"
            )
        if self.payoff.dim is not None and self.payoff.dim != self.center.dim:
            raise DimensionMismatch(
                f"payoff '{self.payoff.name}' is defined on R^{self.payoff.dim}, "
                f"center in R^{self.center.dim}"
            )
        dist, _ = cKDTree(self.support).query(self.center.atoms, p=np.inf)
        if np.any(dist > settings.merge_tol):
            missing = self.center.atoms[int(np.argmax(dist))]
            raise InfeasibleInstance(
                f"support does not contain center atom {tuple(missing)}"
            )
        return self


class Solution(BaseModel):
    """
    This class represents the solution of a robust instance. The coupling is a feasibility certificate from the center to the minimizer, not necessarily the optimal plan between them.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: float = Field(
        description="The attained optimum.",
    )
    minimizer: DiscreteMeasure = Field(
        description="An optimal measure on the candidate support.",
    )
    coupling: TransportPlan = Field(
        description="Coupling from the center to the minimizer with cost at most theta.",
    )
    dual_lambda: float = Field(
        ge=0.0,
        description="The optimal multiplier of the transport budget.",
    )
    dual_value: float = Field(
        description="The dual objective at dual_lambda.",
    )
    gap: float = Field(
        ge=0.0,
        description="The duality gap |value - dual_value|.",
    )
    radius: float = Field(
        default=0.0,
        description="The radius the instance was solved at.",
    )
    payoff_name: str = Field(
        default="",
        description="Registry name of the payoff.",
    )


class ConvergenceRow(BaseModel):
    """
    This class represents one filtration level of a convergence study.
    """

    model_config = ConfigDict(frozen=True)

    level: int = Field(
        description="The filtration level n.",
    )
    mesh: float = Field(
        description="The largest cell side at level n.",
    )
    center_error: float = Field(
        description="W1 distance between the projected and the original center.",
    )
    value: float = Field(
        description="Optimal value of the level-n problem.",
    )
    gap_to_reference: float = Field(
        description="Absolute difference between value and the reference value.",
    )
    solver_gap: float = Field(
        description="Duality gap of the level-n solve.",
    )


class PerturbationRow(BaseModel):
    """
    This class represents one radius of a domain-perturbation scan.
    """

    model_config = ConfigDict(frozen=True)

    theta: float = Field(
        description="The ball radius.",
    )
    value: float = Field(
        description="The optimal value m(theta).",
    )


class ConvergenceStudy(BaseModel):
    """
    This class represents a full convergence study: its rows, the reference solve, the a-priori error budget per row, and whether values were empirically monotone in the level.
    """

    model_config = ConfigDict(frozen=True)

    rows: list[ConvergenceRow] = Field(
        default_factory=list,
        description="One row per level, ordered by level.",
    )
    reference_level: int = Field(
        description="Level of the reference solve.",
    )
    reference_value: float = Field(
        description="Optimal value at the reference level.",
    )
    reference_gap: float = Field(
        default=0.0,
        description="Duality gap of the reference solve.",
    )
    budgets: list[float] = Field(
        default_factory=list,
        description="K * (center_error + mesh / 2) for each row.",
    )
    monotone: bool = Field(
        default=True,
        description="Whether row values were non-increasing in the level.",
    )


class CenterShiftRow(BaseModel):
    """
    This class represents the effect of moving the ball center from one measure to another on a common support.
    """

    model_config = ConfigDict(frozen=True)

    w1: float = Field(
        description="W1 distance between the two centers.",
    )
    value: float = Field(
        description="Optimal value with the original center.",
    )
    shifted_value: float = Field(
        description="Optimal value with the shifted center.",
    )
    bound: float = Field(
        description="K * w1, the bound on |value - shifted_value|.",
    )
