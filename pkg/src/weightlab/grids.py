"""Finite dyadic grids on the unit cube, cube enumeration, and cell averages.

The ambient space is truncated to [0,1)^d (d = 1 or 2) split into 2^(dL)
congruent cells; every function is piecewise constant on cells, so all
integrals below are exact cell sums. Suprema "over all cubes" become finite
maxima: by default over the dyadic lattice (levels 0..L), optionally widened
to the 3^d shifted lattices, whose cubes are clipped to the domain and need
not align with cell boundaries (their integrals are still exact because the
integrand is piecewise constant).

Functions vanish outside the domain; there is no periodic extension. Weights
with singularities at the boundary therefore behave differently than on the
full space, which callers probing boundary behavior should keep in mind.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Grid",
    "DyadicCube",
    "GridFunction",
    "Box",
    "ShiftedLattice",
    "enumerate_cubes",
    "average",
    "shifted_lattices",
    "level_cell_means",
    "repeat_to_cells",
    "chain_running_max",
    "IntegralImage",
]

MAX_DEPTH = 16


@dataclass(frozen=True)
class Grid:
    """Dyadic grid on [0,1)^d with 2^depth cells per axis."""

    dimension: int
    depth: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in [1, {MAX_DEPTH}], got {self.depth}")

    @property
    def cells_per_axis(self) -> int:
        return 1 << self.depth

    @property
    def cell_count(self) -> int:
        return 1 << (self.dimension * self.depth)

    @property
    def cell_width(self) -> float:
        return 2.0 ** (-self.depth)

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.dimension * self.depth)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_axis,) * self.dimension

    def axis_centers(self) -> np.ndarray:
        n = self.cells_per_axis
        return (np.arange(n) + 0.5) / n

    def cell_centers(self) -> np.ndarray:
        """Cell center coordinates; shape (n,) for d=1, (n, n, 2) for d=2."""
        c = self.axis_centers()
        if self.dimension == 1:
            return c
        x, y = np.meshgrid(c, c, indexing="ij")
        return np.stack([x, y], axis=-1)


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic cube of side 2^-level; index has one entry per axis."""

    level: int
    index: tuple[int, ...]

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        for i in self.index:
            if not 0 <= i < (1 << self.level):
                raise ValueError(f"index {self.index} out of range for level {self.level}")

    @property
    def dimension(self) -> int:
        return len(self.index)

    def volume(self) -> float:
        return 2.0 ** (-self.dimension * self.level)

    def bounds(self) -> tuple[tuple[float, float], ...]:
        side = 2.0**-self.level
        return tuple((i * side, (i + 1) * side) for i in self.index)

    def children(self) -> Iterator["DyadicCube"]:
        k = self.level + 1
        if self.dimension == 1:
            (i,) = self.index
            yield DyadicCube(k, (2 * i,))
            yield DyadicCube(k, (2 * i + 1,))
        else:
            i, j = self.index
            for di in (0, 1):
                for dj in (0, 1):
                    yield DyadicCube(k, (2 * i + di, 2 * j + dj))

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("root cube has no parent")
        return DyadicCube(self.level - 1, tuple(i // 2 for i in self.index))

    def contains(self, other: "DyadicCube") -> bool:
        if other.level < self.level:
            return False
        shift = other.level - self.level
        return all(o >> shift == s for o, s in zip(other.index, self.index))

    def cell_slices(self, grid: Grid) -> tuple[slice, ...]:
        """Slices selecting this cube's cells in a grid-shaped value array."""
        if self.level > grid.depth:
            raise ValueError("cube is finer than the grid")
        span = 1 << (grid.depth - self.level)
        return tuple(slice(i * span, (i + 1) * span) for i in self.index)

    def cell_mask(self, grid: Grid) -> np.ndarray:
        mask = np.zeros(grid.shape, dtype=bool)
        mask[self.cell_slices(grid)] = True
        return mask

    def to_json(self) -> dict:
        return {"level": self.level, "index": list(self.index)}

    @staticmethod
    def from_json(obj: dict) -> "DyadicCube":
        return DyadicCube(obj["level"], tuple(obj["index"]))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real-valued function sampled on the cells of a grid.

    Values are stored in a write-locked array shaped like the grid
    ((n,) for d=1, (n, n) for d=2, row index = first axis). Set
    ``nonnegative=True`` to declare sign information (checked).
    """

    grid: Grid
    values: np.ndarray
    nonnegative: bool = False

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != self.grid.shape:
            arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid function values must be finite")
        if self.nonnegative and np.any(arr < 0):
            raise ValueError("declared nonnegative but has negative cells")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @staticmethod
    def constant(grid: Grid, value: float) -> "GridFunction":
        return GridFunction(grid, np.full(grid.shape, float(value)), nonnegative=value >= 0)

    @staticmethod
    def from_flat(grid: Grid, flat: Sequence[float], nonnegative: bool = False) -> "GridFunction":
        return GridFunction(grid, np.asarray(flat, dtype=float).reshape(grid.shape), nonnegative)

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def __abs__(self) -> "GridFunction":
        return GridFunction(self.grid, np.abs(self.values), nonnegative=True)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> float:
        return float(np.sum(self.values)) * self.grid.cell_volume

    def _check_same_grid(self, other: "GridFunction") -> None:
        if other.grid != self.grid:
            raise ValueError("grid functions live on different grids")

    def to_json(self) -> str:
        return json.dumps(
            {"d": self.grid.dimension, "L": self.grid.depth, "values": self.flat().tolist()}
        )

    @staticmethod
    def from_json(text: str) -> "GridFunction":
        obj = json.loads(text)
        grid = Grid(obj["d"], obj["L"])
        return GridFunction.from_flat(grid, obj["values"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["d", self.grid.dimension])
        writer.writerow(["L", self.grid.depth])
        writer.writerow(["cell", "value"])
        for i, v in enumerate(self.flat()):
            writer.writerow([i, repr(float(v))])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "GridFunction":
        rows = list(csv.reader(io.StringIO(text)))
        header = {row[0]: row[1] for row in rows[:2]}
        grid = Grid(int(header["d"]), int(header["L"]))
        values = np.empty(grid.cell_count)
        for row in rows[3:]:
            if row:
                values[int(row[0])] = float(row[1])
        return GridFunction.from_flat(grid, values)


def enumerate_cubes(grid: Grid, max_level: int | None = None) -> Iterator[DyadicCube]:
    """All dyadic cubes of levels 0..L, coarsest first, lexicographic indices."""
    top = grid.depth if max_level is None else max_level
    for k in range(top + 1):
        m = 1 << k
        if grid.dimension == 1:
            for i in range(m):
                yield DyadicCube(k, (i,))
        else:
            for i in range(m):
                for j in range(m):
                    yield DyadicCube(k, (i, j))


def cube_count(grid: Grid) -> int:
    return sum(1 << (grid.dimension * k) for k in range(grid.depth + 1))


def average(f: GridFunction, cube: DyadicCube, r: float) -> float:
    """r-average of f over a cube: (mean of |f|^r over the cube's cells)^(1/r).

    r = inf gives the sup of |f| over the cube. Exact cell-sum quadrature;
    |f| is used throughout, so the result is sign-safe and nonnegative.
    """
    block = np.abs(f.values[cube.cell_slices(f.grid)])
    if math.isinf(r):
        return float(np.max(block))
    if r <= 0:
        raise ValueError(f"average order must be positive, got {r}")
    if r == 1.0:
        return float(np.mean(block))
    m = float(np.max(block))
    if m == 0.0:
        return 0.0
    # normalize by the block max so large r cannot overflow
    return m * float(np.mean((block / m) ** r)) ** (1.0 / r)


# ---------------------------------------------------------------------------
# level-wise pooling: the workhorse for every dyadic scan
# ---------------------------------------------------------------------------


def level_cell_means(values: np.ndarray, grid: Grid) -> list[np.ndarray]:
    """Per-level arrays of cube means of a cell array; entry k has shape (2^k,)^d."""
    arr = np.asarray(values, dtype=float).reshape(grid.shape)
    out = [arr]
    for _ in range(grid.depth):
        a = out[0]
        if grid.dimension == 1:
            m = a.shape[0] // 2
            a = a.reshape(m, 2).mean(axis=1)
        else:
            m = a.shape[0] // 2
            a = a.reshape(m, 2, m, 2).mean(axis=(1, 3))
        out.insert(0, a)
    return out


def repeat_to_cells(arr: np.ndarray, grid: Grid, level: int) -> np.ndarray:
    """Broadcast a level-k cube array back to cell resolution."""
    span = 1 << (grid.depth - level)
    out = np.repeat(arr, span, axis=0)
    if grid.dimension == 2:
        out = np.repeat(out, span, axis=1)
    return out


def chain_running_max(level_arrays: list[np.ndarray], grid: Grid) -> list[np.ndarray]:
    """For each level k, the cellwise max of ancestor values over levels >= k.

    Entry k (cell resolution) at cell x equals max over j >= k of
    level_arrays[j] evaluated at x's level-j ancestor. Entry 0 is the running
    max over the whole ancestor chain.
    """
    L = grid.depth
    chain = [None] * (L + 1)
    chain[L] = np.asarray(level_arrays[L], dtype=float)
    for k in range(L - 1, -1, -1):
        chain[k] = np.maximum(repeat_to_cells(level_arrays[k], grid, k), chain[k + 1])
    return chain


def pool_block_mean(cells: np.ndarray, grid: Grid, level: int) -> np.ndarray:
    """Mean of a cell array over each level-k cube; shape (2^k,)^d."""
    m = 1 << level
    span = 1 << (grid.depth - level)
    if grid.dimension == 1:
        return cells.reshape(m, span).mean(axis=1)
    return cells.reshape(m, span, m, span).mean(axis=(1, 3))


# ---------------------------------------------------------------------------
# shifted lattices and exact box quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Axis-parallel box, possibly not aligned with cell boundaries.

    Produced by shifted lattices; ``shift`` records the lattice (thirds of a
    side per axis) and ``level``/``index`` the position, with boxes at the
    domain boundary clipped to [0,1)^d.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    level: int
    index: tuple[int, ...]
    shift: tuple[int, ...]  # numerator over 3, per axis

    def volume(self) -> float:
        v = 1.0
        for a, b in zip(self.lo, self.hi):
            v *= b - a
        return v

    def contains_cell(self, grid: Grid, cell_index: tuple[int, ...]) -> bool:
        h = grid.cell_width
        return all(
            lo <= i * h and (i + 1) * h <= hi
            for lo, hi, i in zip(self.lo, self.hi, cell_index)
        )

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "index": list(self.index),
            "shift_thirds": list(self.shift),
            "bounds": [[a, b] for a, b in zip(self.lo, self.hi)],
        }


@dataclass(frozen=True)
class ShiftedLattice:
    """One of the 3^d lattices: dyadic cubes translated by shift/3 of a side."""

    grid: Grid
    shift: tuple[int, ...]  # entries in {0, 1, 2}, interpreted as thirds

    def axis_edges(self, level: int) -> np.ndarray:
        """Sorted breakpoints of the level-k tiling of [0,1] along one axis."""
        side = 2.0**-level
        m = 1 << level
        return [self._edges_for(side, m, s) for s in self.shift]

    @staticmethod
    def _edges_for(side: float, m: int, s: int) -> np.ndarray:
        if s == 0:
            return np.arange(m + 1) * side
        inner = (np.arange(m) + s / 3.0) * side
        return np.concatenate([[0.0], inner, [1.0]])

    def boxes(self, level: int) -> Iterator[Box]:
        axes = self.axis_edges(level)
        if self.grid.dimension == 1:
            e = axes[0]
            for i in range(len(e) - 1):
                yield Box((e[i],), (e[i + 1],), level, (i,), self.shift)
        else:
            ex, ey = axes
            for i in range(len(ex) - 1):
                for j in range(len(ey) - 1):
                    yield Box(
                        (ex[i], ey[j]), (ex[i + 1], ey[j + 1]), level, (i, j), self.shift
                    )

    def all_boxes(self) -> Iterator[Box]:
        for k in range(self.grid.depth + 1):
            yield from self.boxes(k)


def shifted_lattices(grid: Grid) -> list[ShiftedLattice]:
    """The 3^d translated lattices; the first one (shift 0) is the dyadic lattice."""
    shifts: list[tuple[int, ...]]
    if grid.dimension == 1:
        shifts = [(0,), (1,), (2,)]
    else:
        shifts = [(a, b) for a in (0, 1, 2) for b in (0, 1, 2)]
    return [ShiftedLattice(grid, s) for s in shifts]


class IntegralImage:
    """Exact antiderivative of a piecewise-constant cell array.

    Because the integrand is constant on cells, its integral over any
    axis-parallel box is a finite sum of full cells plus fractional boundary
    strips, all reproduced exactly by piecewise-linear interpolation of the
    cumulative sums below. Used for box averages on shifted lattices.
    """

    def __init__(self, values: np.ndarray, grid: Grid):
        self.grid = grid
        arr = np.asarray(values, dtype=float).reshape(grid.shape)
        self.cells = arr
        h = grid.cell_width
        if grid.dimension == 1:
            self.prefix = np.concatenate([[0.0], np.cumsum(arr) * h])
        else:
            p = np.zeros((arr.shape[0] + 1, arr.shape[1] + 1))
            p[1:, 1:] = np.cumsum(np.cumsum(arr, axis=0), axis=1) * h * h
            self.prefix = p
            self.rowcum = np.concatenate(
                [np.zeros((arr.shape[0], 1)), np.cumsum(arr, axis=1) * h], axis=1
            )
            self.colcum = np.concatenate(
                [np.zeros((1, arr.shape[1])), np.cumsum(arr, axis=0) * h], axis=0
            )

    def _locate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = self.grid.cells_per_axis
        h = self.grid.cell_width
        idx = np.clip(np.floor(np.asarray(x) / h).astype(int), 0, n - 1)
        frac = np.asarray(x) - idx * h
        return idx, frac

    def antiderivative_1d(self, x: np.ndarray) -> np.ndarray:
        idx, frac = self._locate(x)
        return self.prefix[idx] + self.cells[idx] * frac

    def box_integrals(self, edges_x: np.ndarray, edges_y: np.ndarray | None = None) -> np.ndarray:
        """Integrals over all boxes of an edge tiling at once.

        For d=1 returns diff of the antiderivative along ``edges_x``; for d=2
        returns the inclusion-exclusion differences of F(x, y) over the
        tensor grid of edges, one entry per box.
        """
        if self.grid.dimension == 1:
            return np.diff(self.antiderivative_1d(edges_x))
        g = self._eval_2d(edges_x, edges_y)
        return g[1:, 1:] - g[:-1, 1:] - g[1:, :-1] + g[:-1, :-1]

    def _eval_2d(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """F(x, y) = integral over [0,x) x [0,y) on the tensor grid xs x ys.

        Decomposition at a point with cell (ix, iy) and in-cell offsets
        (ax, ay): full-cell block, the two boundary strips, and the corner.
        """
        ix, ax = self._locate(xs)
        iy, ay = self._locate(ys)
        IX, IY = np.meshgrid(ix, iy, indexing="ij")
        AX, AY = np.meshgrid(ax, ay, indexing="ij")
        full = self.prefix[IX, IY]
        strip_x = AX * self.rowcum[IX, IY]  # [ix*h, x) x [0, iy*h)
        strip_y = AY * self.colcum[IX, IY]  # [0, ix*h) x [iy*h, y)
        corner = self.cells[IX, IY] * AX * AY
        return full + strip_x + strip_y + corner
