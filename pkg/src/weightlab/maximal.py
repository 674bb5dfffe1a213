"""Hardy-Littlewood maximal operator, sparse families, and sparse operators.

The dyadic maximal operator is computed by one pooled pass per level
(running maxima down the ancestor chain); the optional shifted-lattice
variant widens the cube family to the 3^d translated lattices. Sparse
families come from the Calderon-Zygmund stopping construction, which at
threshold a >= 2 is 1/2-sparse by Chebyshev and dominates the dyadic
maximal function pointwise: M f <= a * (sparse operator applied to f).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grids import (
    DyadicCube,
    Grid,
    GridFunction,
    IntegralImage,
    chain_running_max,
    level_cell_means,
    shifted_lattices,
)

__all__ = [
    "maximal",
    "iterate_maximal",
    "bilinear_maximal",
    "SparseFamily",
    "cz_sparse_family",
    "sparse_operator",
    "verify_sparse",
    "VerifyResult",
    "OperatorNormEstimate",
    "operator_norm_lower_bound",
    "SampleStrategy",
]


def maximal(f: GridFunction, lattice: str = "dyadic") -> GridFunction:
    """Cellwise max of <|f|> over all lattice cubes containing the cell.

    Cells are level-L cubes themselves, so the result dominates |f|
    pointwise. Shifted-lattice cubes count only when they contain the whole
    cell; their averages use the clipped box measure.
    """
    grid = f.grid
    means = level_cell_means(np.abs(f.values), grid)
    out = chain_running_max(means, grid)[0]
    if lattice == "dyadic":
        return GridFunction(grid, out, nonnegative=True)
    if lattice != "shifted":
        raise ValueError(f"unknown lattice {lattice!r}")
    out = out.copy()
    img = IntegralImage(np.abs(f.values), grid)
    h = grid.cell_width
    for lat in shifted_lattices(grid):
        if all(s == 0 for s in lat.shift):
            continue
        for k in range(grid.depth + 1):
            edges = lat.axis_edges(k)
            if grid.dimension == 1:
                ints = img.box_integrals(edges[0])
                e = edges[0]
                for m in range(len(ints)):
                    a = int(math.ceil(e[m] / h - 1e-12))
                    b = int(math.floor(e[m + 1] / h + 1e-12))
                    if b > a:
                        avg = ints[m] / (e[m + 1] - e[m])
                        np.maximum(out[a:b], avg, out=out[a:b])
            else:
                ints = img.box_integrals(edges[0], edges[1])
                ex, ey = edges
                for mi in range(ints.shape[0]):
                    ax = int(math.ceil(ex[mi] / h - 1e-12))
                    bx = int(math.floor(ex[mi + 1] / h + 1e-12))
                    if bx <= ax:
                        continue
                    for mj in range(ints.shape[1]):
                        ay = int(math.ceil(ey[mj] / h - 1e-12))
                        by = int(math.floor(ey[mj + 1] / h + 1e-12))
                        if by > ay:
                            vol = (ex[mi + 1] - ex[mi]) * (ey[mj + 1] - ey[mj])
                            np.maximum(out[ax:bx, ay:by], ints[mi, mj] / vol, out=out[ax:bx, ay:by])
    return GridFunction(grid, out, nonnegative=True)


def iterate_maximal(f: GridFunction, k: int, lattice: str = "dyadic") -> GridFunction:
    """k-th iterate of the maximal operator; k = 0 gives |f|."""
    if k < 0:
        raise ValueError("iteration count must be nonnegative")
    g = abs(f)
    for _ in range(k):
        g = maximal(g, lattice)
    return g


def bilinear_maximal(
    f: GridFunction,
    g: GridFunction,
    family: Sequence[DyadicCube] | None = None,
) -> GridFunction:
    """Cellwise sup of <f>_Q <g>_Q over dyadic cubes Q containing the cell.

    When ``family`` is given, the sup runs over that collection only
    (cells outside every family cube get 0).
    """
    if f.grid != g.grid:
        raise ValueError("f and g live on different grids")
    grid = f.grid
    if family is None:
        mf = level_cell_means(np.abs(f.values), grid)
        mg = level_cell_means(np.abs(g.values), grid)
        prods = [a * b for a, b in zip(mf, mg)]
        return GridFunction(grid, chain_running_max(prods, grid)[0], nonnegative=True)
    from .grids import average

    out = np.zeros(grid.shape)
    for cube in family:
        v = average(f, cube, 1.0) * average(g, cube, 1.0)
        sl = cube.cell_slices(grid)
        np.maximum(out[sl], v, out=out[sl])
    return GridFunction(grid, out, nonnegative=True)


# ---------------------------------------------------------------------------
# sparse families
# ---------------------------------------------------------------------------


@dataclass
class SparseFamily:
    """Dyadic cubes with designated pairwise-disjoint majority subsets.

    ``e_sets[i]`` is the boolean cell mask of the set attached to
    ``cubes[i]``; sparseness means each mask covers at least half its cube.
    """

    grid: Grid
    cubes: list[DyadicCube]
    e_sets: list[np.ndarray] = field(repr=False)

    def __len__(self) -> int:
        return len(self.cubes)

    def e_measure(self, i: int) -> float:
        return float(np.count_nonzero(self.e_sets[i])) * self.grid.cell_volume

    def to_json(self) -> list[dict]:
        out = []
        for cube, mask in zip(self.cubes, self.e_sets):
            cells = np.flatnonzero(mask.reshape(-1))
            out.append(
                {"level": cube.level, "index": list(cube.index), "E_cells": cells.tolist()}
            )
        return out

    @staticmethod
    def from_json(grid: Grid, records: list[dict]) -> "SparseFamily":
        cubes, e_sets = [], []
        for rec in records:
            cubes.append(DyadicCube(rec["level"], tuple(rec["index"])))
            mask = np.zeros(grid.cell_count, dtype=bool)
            mask[np.asarray(rec["E_cells"], dtype=int)] = True
            e_sets.append(mask.reshape(grid.shape))
        return SparseFamily(grid, cubes, e_sets)


def cz_sparse_family(f: GridFunction, a: float = 2.0) -> SparseFamily:
    """Stopping-time sparse family of a nonnegative function.

    From each family cube Q, the maximal strict dyadic descendants whose
    average exceeds a * <f>_Q (strictly) are selected and recursed on; E_Q
    is Q minus the selected cubes. The search must consider all strict
    descendants, not just children, for the pointwise bound M f <= a T f.
    Chebyshev gives total selected measure <= |Q|/a, hence 1/2-sparseness
    for a >= 2 (smaller a is rejected).
    """
    if a < 2.0:
        raise ValueError(f"threshold factor must be >= 2 for 1/2-sparseness, got {a}")
    if np.any(f.values < 0):
        raise ValueError("sparse construction expects a nonnegative function")
    if not np.any(f.values > 0):
        raise ValueError("sparse construction expects a function that is not identically 0")
    grid = f.grid
    means = level_cell_means(f.values, grid)

    def mean_of(cube: DyadicCube) -> float:
        return float(means[cube.level][cube.index])

    cubes: list[DyadicCube] = []
    e_sets: list[np.ndarray] = []

    def build(cube: DyadicCube) -> None:
        threshold = a * mean_of(cube)
        selected: list[DyadicCube] = []

        def walk(c: DyadicCube) -> None:
            if c.level >= grid.depth:
                return
            for child in c.children():
                if mean_of(child) > threshold:
                    selected.append(child)
                else:
                    walk(child)

        walk(cube)
        mask = cube.cell_mask(grid)
        for sel in selected:
            mask[sel.cell_slices(grid)] = False
        cubes.append(cube)
        e_sets.append(mask)
        for sel in selected:
            build(sel)

    build(DyadicCube(0, (0,) * grid.dimension))
    return SparseFamily(grid, cubes, e_sets)


def sparse_operator(family: SparseFamily, f: GridFunction) -> GridFunction:
    """Sum over family cubes of <|f|>_Q on Q (the sparse averaging operator)."""
    grid = f.grid
    if family.grid != grid:
        raise ValueError("sparse family built on a different grid")
    means = level_cell_means(np.abs(f.values), grid)
    out = np.zeros(grid.shape)
    for cube in family.cubes:
        out[cube.cell_slices(grid)] += means[cube.level][cube.index]
    return GridFunction(grid, out, nonnegative=True)


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    witness: DyadicCube | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_sparse(family: SparseFamily) -> VerifyResult:
    """Check containment, the half-measure bound, and pairwise disjointness.

    Two cubes of one dyadic lattice are always nested or disjoint, and
    ``SparseFamily`` can only hold such cubes, so no matching argument for
    partially overlapping cubes is needed here; general (multi-lattice)
    families are out of scope and unrepresentable by construction.
    """
    coverage = np.zeros(family.grid.shape, dtype=int)
    for cube, mask in zip(family.cubes, family.e_sets):
        if np.any(mask & ~cube.cell_mask(family.grid)):
            return VerifyResult(False, cube, "E_Q not contained in Q")
        if np.count_nonzero(mask) * family.grid.cell_volume < 0.5 * cube.volume():
            return VerifyResult(False, cube, "E_Q smaller than half of Q")
        coverage += mask
    if np.any(coverage > 1):
        bad = np.argwhere(coverage > 1)[0]
        for cube, mask in zip(family.cubes, family.e_sets):
            if mask[tuple(bad)]:
                return VerifyResult(False, cube, "E sets overlap")
    return VerifyResult(True)


# ---------------------------------------------------------------------------
# empirical operator norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorNormEstimate:
    """Empirical lower bound for an operator norm, with optional upper bound.

    Sampling can only certify lower bounds; the upper bound, when present,
    comes from cited theory (its provenance says which).
    """

    lower: float
    witness: GridFunction | None
    upper: float | None = None
    upper_provenance: str | None = None

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper * (1 + 1e-12):
            raise ValueError(
                f"empirical lower bound {self.lower} exceeds claimed upper bound {self.upper}"
            )


@dataclass(frozen=True)
class SampleStrategy:
    """How test functions are generated for norm-ratio sampling."""

    seed: int = 0
    random_count: int = 32
    indicator_levels: int | None = None  # None = all levels
    adversarial_steps: int = 4


def operator_norm_lower_bound(
    operator: Callable[[GridFunction], GridFunction],
    space_norm: Callable[[GridFunction], float],
    grid: Grid,
    strategy: SampleStrategy = SampleStrategy(),
    upper: float | None = None,
    upper_provenance: str | None = None,
) -> OperatorNormEstimate:
    """Max of norm(T f)/norm(f) over indicators, random functions, and iterates.

    Test functions with zero norm are skipped. Adversarial steps re-feed the
    normalized output of the operator, which climbs toward the top of the
    spectrum for averaging-type operators.
    """
    rng = np.random.default_rng(strategy.seed)
    best = -math.inf
    witness = None

    def consider(f: GridFunction) -> float | None:
        nonlocal best, witness
        nf = space_norm(f)
        if nf <= 0 or not math.isfinite(nf):
            return None
        ratio = space_norm(operator(f)) / nf
        if ratio > best:
            best = ratio
            witness = f
        return ratio

    top = grid.depth if strategy.indicator_levels is None else strategy.indicator_levels
    from .grids import enumerate_cubes

    for cube in enumerate_cubes(grid, max_level=min(top, grid.depth)):
        consider(GridFunction(grid, cube.cell_mask(grid).astype(float), nonnegative=True))
    for _ in range(strategy.random_count):
        consider(GridFunction(grid, np.abs(rng.standard_normal(grid.shape)), nonnegative=True))
    if witness is not None:
        f = witness
        for _ in range(strategy.adversarial_steps):
            g = operator(f)
            m = g.max_abs()
            if m <= 0:
                break
            f = GridFunction(grid, g.values / m, nonnegative=True)
            consider(f)
    return OperatorNormEstimate(
        lower=best, witness=witness, upper=upper, upper_provenance=upper_provenance
    )
