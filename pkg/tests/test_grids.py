"""Grid, cube, and average tests: counts, exact quadrature, lattice geometry."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weightlab.grids import (
    DyadicCube,
    Grid,
    GridFunction,
    IntegralImage,
    average,
    enumerate_cubes,
    level_cell_means,
    shifted_lattices,
)


def test_cube_counts():
    assert len(list(enumerate_cubes(Grid(1, 1)))) == 3
    assert len(list(enumerate_cubes(Grid(1, 2)))) == 7
    assert len(list(enumerate_cubes(Grid(2, 1)))) == 5


def test_cube_enumeration_unique_and_complete():
    grid = Grid(2, 3)
    cubes = list(enumerate_cubes(grid))
    assert len(cubes) == len(set(cubes)) == sum(4**k for k in range(4))
    # every cube is the disjoint union of its children
    for cube in cubes:
        if cube.level < grid.depth:
            masks = [child.cell_mask(grid) for child in cube.children()]
            assert np.array_equal(sum(masks).astype(bool), cube.cell_mask(grid))
            assert np.max(sum(masks)) == 1


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(3, 4)
    with pytest.raises(ValueError):
        Grid(1, 0)
    with pytest.raises(ValueError):
        Grid(1, 17)


def test_average_examples():
    grid = Grid(1, 1)
    f = GridFunction.from_flat(grid, [1.0, 0.0])
    root = DyadicCube(0, (0,))
    assert average(f, root, 1.0) == 0.5
    assert average(f, root, 2.0) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    const = GridFunction.constant(Grid(2, 2), 3.25)
    for cube in enumerate_cubes(Grid(2, 2)):
        for r in (0.5, 1.0, 2.0, 7.0):
            assert average(const, cube, r) == pytest.approx(3.25, rel=1e-15)


def test_average_sup_order():
    grid = Grid(1, 2)
    f = GridFunction.from_flat(grid, [1.0, -4.0, 0.5, 2.0])
    assert average(f, DyadicCube(0, (0,)), math.inf) == 4.0


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-10, 10, allow_nan=False), min_size=8, max_size=8),
    st.floats(0.2, 4.0),
    st.floats(0.2, 4.0),
)
def test_average_jensen_monotone_in_order(cells, r1, r2):
    grid = Grid(1, 3)
    f = GridFunction.from_flat(grid, cells)
    lo, hi = sorted((r1, r2))
    for cube in enumerate_cubes(grid):
        assert average(f, cube, lo) <= average(f, cube, hi) * (1 + 1e-12) + 1e-15


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=4),
    st.floats(-3, 3),
)
def test_average_homogeneity(cells, lam):
    grid = Grid(1, 2)
    f = GridFunction.from_flat(grid, cells)
    g = f * lam
    for cube in enumerate_cubes(grid):
        assert average(g, cube, 1.5) == pytest.approx(abs(lam) * average(f, cube, 1.5), abs=1e-12)


def test_average_nesting_consistency():
    grid = Grid(1, 3)
    rng = np.random.default_rng(3)
    f = GridFunction(grid, np.abs(rng.standard_normal(grid.shape)))
    for cube in enumerate_cubes(grid):
        if cube.level == grid.depth:
            continue
        children = list(cube.children())
        weighted = sum(c.volume() * average(f, c, 1.0) for c in children)
        assert weighted / cube.volume() == pytest.approx(average(f, cube, 1.0), rel=1e-13)


def test_shifted_lattice_counts_and_identity_shift():
    assert len(shifted_lattices(Grid(1, 4))) == 3
    assert len(shifted_lattices(Grid(2, 2))) == 9
    grid = Grid(1, 3)
    zero = shifted_lattices(grid)[0]
    assert zero.shift == (0,)
    dyadic = list(enumerate_cubes(grid))
    boxes = list(zero.all_boxes())
    assert len(boxes) == len(dyadic)
    for cube, box in zip(dyadic, boxes):
        (lo, hi), = cube.bounds()
        assert box.lo == (lo,) and box.hi == (hi,)


def test_shifted_boxes_tile_the_domain():
    grid = Grid(1, 3)
    for lat in shifted_lattices(grid):
        for level in range(grid.depth + 1):
            boxes = list(lat.boxes(level))
            assert boxes[0].lo[0] == 0.0 and boxes[-1].hi[0] == pytest.approx(1.0)
            total = sum(b.volume() for b in boxes)
            assert total == pytest.approx(1.0, rel=1e-12)


def test_integral_image_matches_brute_force_1d():
    grid = Grid(1, 4)
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(grid.shape)
    img = IntegralImage(vals, grid)
    h = grid.cell_width
    for a, b in [(0.0, 1.0), (0.13, 0.87), (0.5, 0.5625), (1 / 3, 2 / 3)]:
        # brute force: sum of cell values times overlap lengths
        expected = sum(
            vals[i] * max(0.0, min(b, (i + 1) * h) - max(a, i * h))
            for i in range(grid.cells_per_axis)
        )
        got = img.box_integrals(np.array([a, b]))[0]
        assert got == pytest.approx(expected, abs=1e-14)


def test_integral_image_matches_brute_force_2d():
    grid = Grid(2, 2)
    rng = np.random.default_rng(8)
    vals = rng.standard_normal(grid.shape)
    img = IntegralImage(vals, grid)
    h = grid.cell_width
    xs = np.array([0.1, 0.8])
    ys = np.array([0.31, 0.97])
    expected = 0.0
    for i in range(grid.cells_per_axis):
        for j in range(grid.cells_per_axis):
            ox = max(0.0, min(xs[1], (i + 1) * h) - max(xs[0], i * h))
            oy = max(0.0, min(ys[1], (j + 1) * h) - max(ys[0], j * h))
            expected += vals[i, j] * ox * oy
    got = img.box_integrals(xs, ys)[0, 0]
    assert got == pytest.approx(expected, abs=1e-14)


def test_grid_function_serialization_round_trip():
    grid = Grid(2, 2)
    rng = np.random.default_rng(9)
    f = GridFunction(grid, rng.standard_normal(grid.shape))
    back = GridFunction.from_json(f.to_json())
    assert back.grid == grid
    assert np.array_equal(back.values, f.values)
    back_csv = GridFunction.from_csv(f.to_csv())
    assert np.array_equal(back_csv.values, f.values)


def test_grid_function_rejects_bad_values():
    grid = Grid(1, 1)
    with pytest.raises(ValueError):
        GridFunction.from_flat(grid, [1.0, math.nan])
    with pytest.raises(ValueError):
        GridFunction.from_flat(grid, [1.0, -1.0], nonnegative=True)


def test_cube_relations():
    parent = DyadicCube(1, (1,))
    children = list(parent.children())
    assert [c.index for c in children] == [(2,), (3,)]
    assert all(c.parent() == parent for c in children)
    assert parent.contains(children[0]) and not children[0].contains(parent)
    with pytest.raises(ValueError):
        DyadicCube(0, (0,)).parent()
    with pytest.raises(ValueError):
        DyadicCube(1, (2,))


def test_level_cell_means_shapes_and_values():
    grid = Grid(2, 2)
    vals = np.arange(16, dtype=float).reshape(4, 4)
    means = level_cell_means(vals, grid)
    assert means[0].shape == (1, 1)
    assert means[0][0, 0] == pytest.approx(vals.mean())
    assert means[2].shape == (4, 4)
    assert means[1][0, 0] == pytest.approx(vals[:2, :2].mean())
