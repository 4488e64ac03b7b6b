"""
This module contains construction and integration of discrete probability measures.
"""

# External Libraries
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

# Python Standard Libraries
import logging
import math
from typing import Sequence

# Local Libraries
from robustw1.errors import (
    DimensionMismatch,
    EmptySupport,
    MassNotOne,
    NegativeWeight,
    NonFiniteValue,
)
from robustw1.models.measures import Box, DiscreteMeasure, PayoffSpec, frozen_array
from robustw1.settings import settings

logger = logging.getLogger(__name__)

# Residual mass error tolerated before a renormalising division.
_RENORM_TOL = 4 * np.finfo(np.float64).eps


def as_points(points, dim: int | None = None) -> np.ndarray:
    """
    Convert a list of points (or of scalars, for d = 1) into an (n, d) float array.

    Args:
        points: Sequence of points or scalars.
        dim (int | None): Required dimension, if any.

    Returns:
        np.ndarray: The (n, d) array.
    """
    try:
        array = np.array(points, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise DimensionMismatch(f"points must form an (n, d) array: {e}")
    if array.ndim == 1:
        array = array.reshape(-1, 1)
    if array.ndim != 2:
        raise DimensionMismatch(f"points must form an (n, d) array, got {array.shape}")
    if array.shape[0] > 0 and array.shape[1] < 1:
        raise DimensionMismatch("points need at least one coordinate")
    if dim is not None and array.shape[0] > 0 and array.shape[1] != dim:
        raise DimensionMismatch(f"expected points in R^{dim}, got R^{array.shape[1]}")
    if not np.all(np.isfinite(array)):
        raise NonFiniteValue("point coordinates must be finite")
    return array


def lexsort_rows(points: np.ndarray) -> np.ndarray:
    """
    Indices sorting the rows of points lexicographically (first coordinate primary).
    """
    return np.lexsort(points.T[::-1])


def merge_labels(points: np.ndarray, tol: float) -> np.ndarray:
    """
    Label rows so that rows closer than tol in sup-norm (transitively) share a label.
    """
    n = points.shape[0]
    pairs = cKDTree(points).query_pairs(r=tol, p=np.inf, output_type="ndarray")
    if len(pairs) == 0:
        return np.arange(n)
    graph = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
    )
    _, labels = connected_components(graph, directed=False)
    return labels


def _normalise(weights: np.ndarray) -> np.ndarray:
    total = math.fsum(weights)
    if abs(total - 1.0) > _RENORM_TOL:
        weights = weights / total
    # Absorb the rounding residue in the largest weight so repeated
    # canonicalisation is a fixed point.
    k = int(np.argmax(weights))
    rest = math.fsum(np.delete(weights, k))
    weights = weights.copy()
    weights[k] = 1.0 - rest
    return weights


def make_measure(atoms, weights) -> DiscreteMeasure:
    """
    Build a canonical discrete measure: atoms sorted lexicographically, near-duplicates (sup-norm < 1e-12) merged by summing weights, zero-weight atoms dropped, mass renormalised.

    Args:
        atoms: Sequence of points in R^d (scalars allowed for d = 1).
        weights: Sequence of nonnegative weights summing to 1 within 1e-9.

    Returns:
        DiscreteMeasure: The canonical measure.
    """
    points = as_points(atoms)
    try:
        w = np.array(weights, dtype=np.float64).reshape(-1)
    except (TypeError, ValueError) as e:
        raise DimensionMismatch(f"weights must be a flat list of numbers: {e}")
    if points.shape[0] == 0 or w.shape[0] == 0:
        raise EmptySupport("a measure needs at least one atom")
    if points.shape[0] != w.shape[0]:
        raise DimensionMismatch(f"{points.shape[0]} atoms but {w.shape[0]} weights")
    if not np.all(np.isfinite(w)):
        raise NonFiniteValue("weights must be finite")
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight {float(w.min())!r}")
    total = math.fsum(w)
    if abs(total - 1.0) > settings.mass_input_tol:
        raise MassNotOne(f"weights sum to {total!r}, expected 1")

    order = lexsort_rows(points)
    points, w = points[order], w[order]
    labels = merge_labels(points, settings.merge_tol)
    _, first = np.unique(labels, return_index=True)
    _, inverse = np.unique(labels, return_inverse=True)
    merged = np.bincount(inverse, weights=w)
    keep = np.argsort(first)
    points, w = points[first[keep]], merged[keep]

    positive = w > 0
    points, w = points[positive], w[positive]
    return DiscreteMeasure(
        atoms=frozen_array(points, 2),
        weights=frozen_array(_normalise(w), 1),
    )


def dirac(point) -> DiscreteMeasure:
    """
    The point mass at point.
    """
    return make_measure([as_points([point]).reshape(-1)], [1.0])


def uniform(atoms) -> DiscreteMeasure:
    """
    The uniform measure on the given atoms (duplicates keep their multiplicity).
    """
    points = as_points(atoms)
    if points.shape[0] == 0:
        raise EmptySupport("a measure needs at least one atom")
    return make_measure(points, np.full(points.shape[0], 1.0 / points.shape[0]))


def integrate(payoff: PayoffSpec, measure: DiscreteMeasure) -> float:
    """
    Integrate a payoff against a measure.

    Args:
        payoff (PayoffSpec): The payoff V.
        measure (DiscreteMeasure): The measure nu.

    Returns:
        float: The sum of w_i * V(x_i).
    """
    values = payoff(measure.atoms)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue(f"payoff '{payoff.name}' returned non-finite values")
    return math.fsum(measure.weights * values)


def first_moment(measure: DiscreteMeasure) -> float:
    """
    The first moment sum of w_i * ||x_i||_2.
    """
    return math.fsum(measure.weights * np.linalg.norm(measure.atoms, axis=1))


def mixture(
    rho: DiscreteMeasure, sigma: DiscreteMeasure, alpha: float
) -> DiscreteMeasure:
    """
    The convex combination alpha * rho + (1 - alpha) * sigma.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"cannot mix measures in R^{rho.dim} and R^{sigma.dim}")
    if not 0.0 <= alpha <= 1.0:
        raise NegativeWeight(f"mixture weight {alpha} is outside [0, 1]")
    return make_measure(
        np.vstack([rho.atoms, sigma.atoms]),
        np.concatenate([alpha * rho.weights, (1.0 - alpha) * sigma.weights]),
    )


def union_support(*measures: DiscreteMeasure) -> np.ndarray:
    """
    Canonical (sorted, merged) union of the atoms of the given measures.
    """
    dims = {m.dim for m in measures}
    if len(dims) != 1:
        raise DimensionMismatch(f"measures live in different dimensions {sorted(dims)}")
    return canonical_points(np.vstack([m.atoms for m in measures]))


def support_diameter(points: Sequence) -> float:
    """
    Largest Euclidean distance between two of the points.
    """
    points = as_points(points)
    if points.shape[0] < 2:
        return 0.0
    return float(pdist(points).max())


def random_measure(
    rng: np.random.Generator,
    n_atoms: int,
    box: Box,
) -> DiscreteMeasure:
    """
    Draw a measure with uniformly placed atoms in box and Dirichlet(1) weights.

    Args:
        rng (np.random.Generator): Seeded generator.
        n_atoms (int): Number of atoms before merging.
        box (Box): Region holding the atoms.

    Returns:
        DiscreteMeasure: The random measure.
    """
    atoms = rng.uniform(box.lower, box.upper, size=(n_atoms, box.dim))
    weights = rng.dirichlet(np.ones(n_atoms))
    return make_measure(atoms, weights)


def canonical_points(points) -> np.ndarray:
    """
    Sort points lexicographically and drop near-duplicates (sup-norm < 1e-12), keeping the first of each group.
    """
    points = as_points(points)
    if points.shape[0] == 0:
        raise EmptySupport("no points given")
    points = points[lexsort_rows(points)]
    labels = merge_labels(points, settings.merge_tol)
    _, first = np.unique(labels, return_index=True)
    return points[np.sort(first)]
