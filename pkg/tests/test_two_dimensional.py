"""Two-dimensional coverage: the planar paths of every subsystem."""

import numpy as np
import pytest
from fractions import Fraction

from weightlab.compactness import (
    KernelSpec,
    bmo_norm,
    commutator_matrix,
    discretize,
    symbol_generator,
    weighted_singular_values,
)
from weightlab.grids import DyadicCube, Grid, GridFunction, average
from weightlab.maximal import cz_sparse_family, maximal, sparse_operator, verify_sparse
from weightlab.random_functions import random_nonnegative, random_weight
from weightlab.runner import ExperimentConfig, run
from weightlab.spaces import WeightedLebesgue, rescale_spec, space_norm
from weightlab.weights import Weight, ainf_constant


def test_planar_maximal_hand_case():
    grid = Grid(2, 1)
    f = GridFunction(grid, np.array([[1.0, 0.0], [0.0, 0.0]]))
    out = maximal(f)
    assert out.values[0, 0] == 1.0
    assert np.allclose(out.values[[0, 1, 1], [1, 0, 1]], 0.25)


def test_planar_average_and_children():
    grid = Grid(2, 2)
    rng = np.random.default_rng(61)
    f = GridFunction(grid, np.abs(rng.standard_normal(grid.shape)))
    root = DyadicCube(0, (0, 0))
    children = list(root.children())
    assert len(children) == 4
    combined = sum(c.volume() * average(f, c, 1.0) for c in children)
    assert combined == pytest.approx(average(f, root, 1.0), rel=1e-13)


def test_planar_sparse_domination():
    grid = Grid(2, 3)
    rng = np.random.default_rng(62)
    for _ in range(5):
        f = random_nonnegative(grid, rng)
        family = cz_sparse_family(f, 2.0)
        assert verify_sparse(family).ok
        gap = maximal(f).values - 2.0 * sparse_operator(family, f).values
        assert np.max(gap) <= 1e-12


def test_planar_ainf_and_rescale():
    grid = Grid(2, 2)
    rng = np.random.default_rng(63)
    w = random_weight(grid, rng, sigma=0.5)
    ainf, worst = ainf_constant(w)
    assert ainf >= 1.0 and worst.dimension == 2
    spec = WeightedLebesgue(Fraction(2), w)
    res = rescale_spec(spec, Fraction(4, 3), 4)
    assert res.chain_verified
    f = GridFunction(grid, rng.standard_normal(grid.shape))
    assert space_norm(res.spec, f) > 0


def test_planar_bmo_shifted_lattice():
    grid = Grid(2, 2)
    b = symbol_generator("jump", grid).values
    dyadic = bmo_norm(b, "dyadic")[0]
    shifted = bmo_norm(b, "shifted")[0]
    assert shifted >= dyadic - 1e-14 >= 0.25 - 1e-14


def test_planar_dini_and_rough_commutators():
    grid = Grid(2, 2)
    for spec in (
        KernelSpec("dini", 2),
        KernelSpec("rough", 2, cos_coeffs=(0.0, 1.0), sin_coeffs=(1.0,)),
    ):
        op = discretize(spec, grid)
        sym = symbol_generator("bump", grid, center=0.5, width=0.4)
        comm = commutator_matrix(sym, op)
        sigma = weighted_singular_values(comm, Weight.unit(grid))
        assert sigma[0] >= 0 and sigma.shape == (grid.cell_count,)
    const = commutator_matrix(GridFunction.constant(grid, 2.0), op)
    assert np.all(const.matrix == 0.0)


def test_planar_cli_experiment():
    record = run(
        ExperimentConfig(
            kind="weights", seed=3, dimension=2, depth=3,
            params={"weight": "lognormal(0.5)", "p": "2", "r": "1", "s": "inf"},
        )
    )
    assert record.passed
    assert record.outputs["limited"] == pytest.approx(record.outputs["ap"], abs=1e-12)


def test_planar_log_symbol_finite():
    grid = Grid(2, 3)
    b = symbol_generator("log", grid).values
    assert np.all(np.isfinite(b.values))
    assert bmo_norm(b)[0] > 0
