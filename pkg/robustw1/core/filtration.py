"""
This module contains the dyadic filtration of a box: cell lookup, projection of measures onto cell centers, refinement and mesh size.

Cells along each axis are half-open [a, b) except the last, which is closed, so every point of the closed box belongs to exactly one cell.
"""

# External Libraries
import numpy as np

# Python Standard Libraries
import logging
import math

# Local Libraries
from robustw1.core.measures import as_points, make_measure
from robustw1.errors import AtomOutsideBox, DimensionMismatch, LevelOverflow
from robustw1.models.measures import Box, DiscreteMeasure, DyadicFiltration
from robustw1.settings import settings

logger = logging.getLogger(__name__)


def make_filtration(
    box: Box, level: int, max_level: int | None = None
) -> DyadicFiltration:
    """
    Level `level` of the dyadic filtration of box.
    """
    if max_level is None:
        return DyadicFiltration(box=box, level=level)
    return DyadicFiltration(box=box, level=level, max_level=max_level)


def refine(filtration: DyadicFiltration) -> DyadicFiltration:
    """
    The next level over the same box. Raises LevelOverflow past max_level.
    """
    return DyadicFiltration(
        box=filtration.box,
        level=filtration.level + 1,
        max_level=filtration.max_level,
    )


def mesh(filtration: DyadicFiltration) -> float:
    """
    The largest cell side length, max_k (upper_k - lower_k) / 2^n.
    """
    return float(filtration.cell_sides.max())


def projection_bound(filtration: DyadicFiltration) -> float:
    """
    The a-priori bound (sqrt(d) / 2) * mesh on W1 between a measure and its projection.
    """
    return math.sqrt(filtration.dim) / 2.0 * mesh(filtration)


def cell_index(filtration: DyadicFiltration, points) -> np.ndarray:
    """
    Integer multi-index (n, d) of the cell holding each point.

    Args:
        filtration (DyadicFiltration): The filtration level.
        points: Points inside the closed box.

    Returns:
        np.ndarray: The cell indices.
    """
    box = filtration.box
    points = as_points(points, dim=box.dim)
    outside = ~box.contains(points)
    if np.any(outside):
        raise AtomOutsideBox(points[np.argmax(outside)], box.lower, box.upper)
    # Scaling by a power of two is exact, so indices nest across levels.
    unit = (points - np.asarray(box.lower)) / box.sides
    index = np.floor(unit * filtration.cells_per_axis).astype(np.int64)
    return np.clip(index, 0, filtration.cells_per_axis - 1)


def cell_center(filtration: DyadicFiltration, index: np.ndarray) -> np.ndarray:
    """
    Centers of the cells with the given multi-indices.
    """
    index = np.asarray(index, dtype=np.int64)
    if index.ndim != 2 or index.shape[1] != filtration.dim:
        raise DimensionMismatch(f"cell indices must be (n, {filtration.dim})")
    return np.asarray(filtration.box.lower) + (index + 0.5) * filtration.cell_sides


def cell_bounds(
    filtration: DyadicFiltration, index: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    Lower and upper corners of the cells with the given multi-indices.
    """
    index = np.asarray(index, dtype=np.int64)
    lower = np.asarray(filtration.box.lower) + index * filtration.cell_sides
    upper = np.asarray(filtration.box.lower) + (index + 1) * filtration.cell_sides
    # the last cell ends exactly at the box
    last = index == filtration.cells_per_axis - 1
    upper = np.where(last, np.asarray(filtration.box.upper), upper)
    return lower, upper


def cell_centers(filtration: DyadicFiltration) -> np.ndarray:
    """
    All 2^(n*d) cell centers in lexicographic order; the level-n candidate support.
    """
    if filtration.cell_count > settings.max_cells:
        raise LevelOverflow(
            f"level {filtration.level} in R^{filtration.dim} has "
            f"{filtration.cell_count} cells, too many to enumerate"
        )
    axes = [np.arange(filtration.cells_per_axis)] * filtration.dim
    grid = np.meshgrid(*axes, indexing="ij")
    index = np.stack([g.reshape(-1) for g in grid], axis=1)
    return cell_center(filtration, index)


def project(measure: DiscreteMeasure, filtration: DyadicFiltration) -> DiscreteMeasure:
    """
    Move each atom to the center of its cell, summing the mass per cell.

    Args:
        measure (DiscreteMeasure): A measure supported in the box.
        filtration (DyadicFiltration): The filtration level.

    Returns:
        DiscreteMeasure: The projected measure on cell centers.
    """
    if measure.dim != filtration.dim:
        raise DimensionMismatch(
            f"measure in R^{measure.dim}, box in R^{filtration.dim}"
        )
    centers = cell_center(filtration, cell_index(filtration, measure.atoms))
    projected = make_measure(centers, measure.weights)
    logger.debug(
        "projected %d atoms onto %d cells at level %d",
        measure.size,
        projected.size,
        filtration.level,
    )
    return projected


def bounding_box(measure: DiscreteMeasure, pad: float = 0.0) -> Box:
    """
    Smallest box holding the atoms, grown by pad; flat sides get half-width 0.5.
    """
    lower = measure.atoms.min(axis=0) - pad
    upper = measure.atoms.max(axis=0) + pad
    flat = upper <= lower
    lower = np.where(flat, lower - 0.5, lower)
    upper = np.where(flat, upper + 0.5, upper)
    return Box(lower=tuple(lower.tolist()), upper=tuple(upper.tolist()))
