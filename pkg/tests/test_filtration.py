# External Libraries
import numpy as np
import pytest

# Python Standard Libraries
import math

# Local Libraries
from robustw1.core.filtration import (
    bounding_box,
    cell_bounds,
    cell_center,
    cell_centers,
    cell_index,
    make_filtration,
    mesh,
    project,
    projection_bound,
    refine,
)
from robustw1.core.measures import dirac, make_measure, random_measure, uniform
from robustw1.core.transport import w1_distance
from robustw1.errors import AtomOutsideBox, InvalidBox, LevelOverflow
from robustw1.models.measures import Box

UNIT = Box(lower=(0.0,), upper=(1.0,))
UNIT_SQUARE = Box(lower=(0.0, 0.0), upper=(1.0, 1.0))


def test_box_validation():
    with pytest.raises(InvalidBox):
        Box(lower=(1.0,), upper=(0.0,))
    with pytest.raises(InvalidBox):
        Box.from_bounds([[0.0]])
    assert Box.from_bounds([[-2, 2], [0, 1]]).sides.tolist() == [4.0, 1.0]


@pytest.mark.parametrize(
    "box, level, expected",
    [
        (UNIT, 3, 0.125),
        (Box(lower=(0.0, 0.0), upper=(2.0, 1.0)), 1, 1.0),
        (Box(lower=(0.0,) * 3, upper=(1.0,) * 3), 4, 2.0**-4),
    ],
)
def test_mesh(box, level, expected):
    assert mesh(make_filtration(box, level)) == expected


def test_refine_splits_cells():
    level_one = refine(make_filtration(UNIT, 0))
    assert level_one.level == 1
    lower, upper = cell_bounds(level_one, np.array([[0], [1]]))
    assert lower.tolist() == [[0.0], [0.5]]
    assert upper.tolist() == [[0.5], [1.0]]
    assert refine(make_filtration(UNIT_SQUARE, 1)).cell_count == 16


def test_level_overflow():
    with pytest.raises(LevelOverflow):
        refine(make_filtration(UNIT, 2, max_level=2))
    with pytest.raises(LevelOverflow):
        make_filtration(UNIT, 25)


def test_cell_centers_refuse_huge_grids():
    with pytest.raises(LevelOverflow):
        cell_centers(make_filtration(Box(lower=(0.0,) * 3, upper=(1.0,) * 3), 8))


def test_cell_index_boundary_convention():
    filtration = make_filtration(UNIT, 1)
    assert cell_index(filtration, [[0.0], [0.5], [1.0]]).tolist() == [[0], [1], [1]]
    with pytest.raises(AtomOutsideBox):
        cell_index(filtration, [[1.5]])


def test_cell_centers_level_two():
    centers = cell_centers(make_filtration(UNIT, 2))
    assert centers[:, 0].tolist() == [0.125, 0.375, 0.625, 0.875]
    assert cell_centers(make_filtration(UNIT_SQUARE, 1)).tolist() == [
        [0.25, 0.25],
        [0.25, 0.75],
        [0.75, 0.25],
        [0.75, 0.75],
    ]


@pytest.mark.parametrize(
    "level, center, distance",
    [
        (1, 0.25, 0.05),
        (2, 0.375, 0.075),
    ],
)
def test_project_point_mass(level, center, distance):
    filtration = make_filtration(UNIT, level)
    projected = project(dirac([0.3]), filtration)
    assert projected == dirac([center])
    assert w1_distance(projected, dirac([0.3]))[0] == pytest.approx(distance, abs=1e-15)


def test_project_one_atom_per_cell():
    projected = project(uniform([0.1, 0.9]), make_filtration(UNIT, 1))
    assert projected == uniform([0.25, 0.75])


def test_project_merges_atoms_in_one_cell():
    mu = make_measure([[0.1], [0.2], [0.9]], [0.25, 0.25, 0.5])
    projected = project(mu, make_filtration(UNIT, 1))
    assert projected.atoms[:, 0].tolist() == [0.25, 0.75]
    assert projected.weights.tolist() == [0.5, 0.5]


def test_project_rejects_atoms_outside_box():
    with pytest.raises(AtomOutsideBox) as info:
        project(dirac([2.0]), make_filtration(UNIT, 1))
    assert info.value.atom == (2.0,)


@pytest.mark.parametrize("seed", range(100))
def test_projection_bound_and_tower_property(seed):
    rng = np.random.default_rng(3000 + seed)
    dim = int(rng.integers(1, 3))
    lower = rng.uniform(-2, 0, size=dim)
    box = Box(
        lower=tuple(lower.tolist()),
        upper=tuple((lower + rng.uniform(0.5, 3, size=dim)).tolist()),
    )
    mu = random_measure(rng, int(rng.integers(1, 12)), box)

    for level in range(1, 9):
        coarse = make_filtration(box, level)
        fine = refine(coarse)
        projected = project(mu, coarse)
        distance, _ = w1_distance(projected, mu)
        assert distance <= projection_bound(coarse) + 1e-9

        # atoms agree exactly; merged weights may differ in the last bit
        tower = project(project(mu, fine), coarse)
        assert np.array_equal(tower.atoms, projected.atoms)
        assert np.allclose(tower.weights, projected.weights, rtol=0, atol=1e-14)
        assert project(projected, coarse) == projected


def test_projection_bound_formula():
    filtration = make_filtration(UNIT_SQUARE, 2)
    assert projection_bound(filtration) == pytest.approx(math.sqrt(2) / 2 * 0.25)


def test_cell_center_round_trips_cell_index():
    filtration = make_filtration(UNIT_SQUARE, 3)
    index = np.array([[0, 7], [3, 4]])
    assert cell_index(filtration, cell_center(filtration, index)).tolist() == index.tolist()


def test_bounding_box():
    mu = make_measure([[0.0, 1.0], [2.0, 1.0]], [0.5, 0.5])
    padded = bounding_box(mu, pad=0.5)
    assert padded.lower == (-0.5, 0.5)
    assert padded.upper == (2.5, 1.5)
    # a flat side gets half-width 0.5
    tight = bounding_box(mu)
    assert tight.lower == (0.0, 0.5)
    assert tight.upper == (2.0, 1.5)
