"""
This module contains the models for measures, payoffs and dyadic filtrations. Arrays held by these models are read-only once constructed.
"""

# External Libraries
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Python Standard Libraries
import math
from typing import Any, Callable

# Local Libraries
from robustw1.errors import (
    DimensionMismatch,
    InvalidBox,
    LevelOverflow,
    MassNotOne,
    NegativeWeight,
    NonFiniteValue,
)
from robustw1.settings import settings


def frozen_array(values: Any, ndim: int) -> np.ndarray:
    """
    Copy values into a read-only float64 array of the given rank.

    Args:
        values (Any): Array-like input.
        ndim (int): Required number of dimensions.

    Returns:
        np.ndarray: The read-only copy.
    """
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise DimensionMismatch(
            f"expected a {ndim}-dimensional array, got shape {array.shape}"
        )
    array.setflags(write=False)
    return array


class DiscreteMeasure(BaseModel):
    """
    This class represents a finitely supported probability measure on R^d. Atoms are rows of an (n, d) array and are kept in lexicographic order with pairwise distinct positions; build instances with make_measure.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    atoms: np.ndarray = Field(
        description="The (n, d) array of atom positions.",
    )
    weights: np.ndarray = Field(
        description="The (n,) array of nonnegative atom weights summing to one.",
    )

    @model_validator(mode="after")
    def check_invariants(self) -> "DiscreteMeasure":
        if self.atoms.ndim != 2 or self.weights.ndim != 1:
            raise DimensionMismatch("atoms must be (n, d) and weights (n,)")
        if self.atoms.shape[0] != self.weights.shape[0]:
            raise DimensionMismatch(
                f"{self.atoms.shape[0]} atoms but {self.weights.shape[0]} weights"
            )
        if self.atoms.shape[1] < 1:
            raise DimensionMismatch("atoms need at least one coordinate")
        if not np.all(np.isfinite(self.atoms)):
            raise NonFiniteValue("atom coordinates must be finite")
        if np.any(self.weights < 0):
            raise NegativeWeight("weights must be nonnegative")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > 1e-12:
            raise MassNotOne(f"weights sum to {total!r}, expected 1")
        return self

    @property
    def dim(self) -> int:
        return int(self.atoms.shape[1])

    @property
    def size(self) -> int:
        return int(self.atoms.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return (
            self.atoms.shape == other.atoms.shape
            and np.array_equal(self.atoms, other.atoms)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None  # type: ignore[assignment]


class PayoffSpec(BaseModel):
    """
    This class represents a bounded Lipschitz payoff V together with its declared Lipschitz constant K and sup-bound B. The evaluator maps an (n, d) array of points to an (n,) array of values.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    evaluator: Callable[[np.ndarray], np.ndarray] = Field(
        description="Vectorised evaluation of V on rows of an (n, d) array.",
    )
    lipschitz_K: float = Field(
        ge=0.0,
        allow_inf_nan=False,
        description="Declared Lipschitz constant; 0 only for constant payoffs.",
    )
    sup_bound_B: float = Field(
        gt=0.0,
        allow_inf_nan=False,
        description="Declared bound on |V|.",
    )
    name: str = Field(
        description="Registry name of the payoff.",
    )
    dim: int | None = Field(
        default=None,
        description="Domain dimension, or None when V accepts any dimension.",
    )
    params: dict[str, Any] = Field(
        default_factory=dict,
        description="Parameters the payoff was built with, for records.",
    )

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points.reshape(1, -1)
        if self.dim is not None and points.shape[1] != self.dim:
            raise DimensionMismatch(
                f"payoff '{self.name}' is defined on R^{self.dim}, "
                f"got points in R^{points.shape[1]}"
            )
        return np.asarray(self.evaluator(points), dtype=np.float64).reshape(-1)


class Box(BaseModel):
    """
    This class represents an axis-aligned box [lower, upper] in R^d, the truncation domain of a dyadic filtration.
    """

    model_config = ConfigDict(frozen=True)

    lower: tuple[float, ...] = Field(
        description="Lower corner of the box.",
    )
    upper: tuple[float, ...] = Field(
        description="Upper corner of the box.",
    )

    @model_validator(mode="after")
    def check_sides(self) -> "Box":
        if len(self.lower) != len(self.upper) or len(self.lower) == 0:
            raise DimensionMismatch(
                f"box corners have dimensions {len(self.lower)} and {len(self.upper)}"
            )
        if not all(map(math.isfinite, self.lower + self.upper)):
            raise InvalidBox("box corners must be finite")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise InvalidBox(
                f"box sides must have positive length: {self.lower} .. {self.upper}"
            )
        return self

    @classmethod
    def from_bounds(cls, bounds: list[list[float]]) -> "Box":
        """
        Build a box from the config form [[lo, hi], ...].
        """
        try:
            lower = tuple(float(lo) for lo, _ in bounds)
            upper = tuple(float(hi) for _, hi in bounds)
        except (TypeError, ValueError) as e:
            raise InvalidBox(f"box must be a list of [lo, hi] pairs: {e}")
        return cls(lower=lower, upper=upper)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def sides(self) -> np.ndarray:
        return np.subtract(self.upper, self.lower)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """
        Mask of the rows of points lying in the closed box.
        """
        points = np.asarray(points, dtype=np.float64)
        return np.all(
            (points >= np.asarray(self.lower)) & (points <= np.asarray(self.upper)),
            axis=1,
        )


class DyadicFiltration(BaseModel):
    """
    This class represents level n of the dyadic filtration of a box: 2^(n*d) congruent cells with their centers as representatives.
    """

    model_config = ConfigDict(frozen=True)

    box: Box = Field(
        description="The box being partitioned.",
    )
    level: int = Field(
        ge=0,
        description="The dyadic level n.",
    )
    max_level: int = Field(
        default=settings.max_level,
        ge=0,
        description="Largest level this filtration may be refined to.",
    )

    @model_validator(mode="after")
    def check_level(self) -> "DyadicFiltration":
        if self.level > self.max_level:
            raise LevelOverflow(
                f"level {self.level} exceeds the maximum level {self.max_level}"
            )
        return self

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def cells_per_axis(self) -> int:
        return 2**self.level

    @property
    def cell_count(self) -> int:
        return 2 ** (self.level * self.dim)

    @property
    def cell_sides(self) -> np.ndarray:
        return self.box.sides / self.cells_per_axis
