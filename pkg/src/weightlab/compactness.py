"""Discretized singular integrals, commutators, and compactness probes.

Kernels are collocated at cell midpoints with the diagonal zeroed (the
principal value skips the singular cell; the odd-kernel cancellation keeps
the resulting error at one cell volume). Compactness of a commutator is
never reported as a boolean: every finite matrix is compact, so the probes
emit singular-value tail ratios across refinement depths and leave the
trend to the caller.

Weighted probes are restricted to the Hilbert-space case: multiplication by
the weight is an isometry onto the unweighted space there, so the weighted
operator is similar to D A D^{-1} and singular values are meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grids import Grid, GridFunction
from .weights import Weight

__all__ = [
    "KernelSpec",
    "dini_modulus_from_samples",
    "OperatorMatrix",
    "SymbolFunction",
    "discretize",
    "commutator_matrix",
    "bmo_norm",
    "symbol_generator",
    "weighted_singular_values",
    "compactness_profile",
    "CompactnessProfile",
    "refinement_profiles",
]

_MAX_WEIGHT_RANGE = 1e12


@dataclass(frozen=True)
class DiniModulus:
    """Sampled modulus of continuity: increasing, subadditive, Dini-integrable.

    ``ts`` are sample abscissae in (0, 1] (0 is implicit with value 0);
    validation checks monotonicity, sampled subadditivity, and evaluates the
    Dini integral of omega(t)/t by trapezoid quadrature on the samples.
    """

    ts: np.ndarray
    values: np.ndarray
    dini_integral: float = field(init=False)

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        if ts.ndim != 1 or ts.shape != vs.shape or ts.size < 2:
            raise ValueError("modulus needs matching 1-d sample arrays, at least 2 points")
        if np.any(ts <= 0) or np.any(np.diff(ts) <= 0) or ts[-1] > 1.0 + 1e-12:
            raise ValueError("sample points must be increasing in (0, 1]")
        if np.any(vs < 0) or np.any(np.diff(vs) < -1e-12):
            raise ValueError("modulus must be nonnegative and increasing")
        for i in range(ts.size):
            for j in range(i, ts.size):
                tsum = ts[i] + ts[j]
                if tsum > ts[-1]:
                    break
                if self._interp(ts, vs, tsum) > vs[i] + vs[j] + 1e-9 * (1 + vs[j]):
                    raise ValueError(f"modulus not subadditive at t = {ts[i]} + {ts[j]}")
        # quadrature of omega(t)/t over the sampled range [ts[0], ts[-1]]
        integrand = vs / ts
        integral = float(np.sum(0.5 * np.diff(ts) * (integrand[1:] + integrand[:-1])))
        if not math.isfinite(integral):
            raise ValueError("Dini integral diverges on the sample")
        ts.setflags(write=False)
        vs.setflags(write=False)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "values", vs)
        object.__setattr__(self, "dini_integral", integral)

    @staticmethod
    def _interp(ts, vs, t):
        return float(np.interp(t, ts, vs))

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return np.interp(np.clip(t, 0.0, self.ts[-1]), np.concatenate([[0.0], self.ts]),
                         np.concatenate([[0.0], self.values]))


def dini_modulus_from_samples(ts: Sequence[float], values: Sequence[float]) -> DiniModulus:
    return DiniModulus(np.asarray(ts, float), np.asarray(values, float))


def holder_modulus(eta: float = 0.5, samples: int = 64) -> DiniModulus:
    """t^eta on (0, 1], the default Dini modulus (eta in (0, 1])."""
    ts = np.linspace(1.0 / samples, 1.0, samples)
    return DiniModulus(ts, ts**eta)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel of a singular integral operator on the unit domain.

    kind 'hilbert' (d=1): K(x, y) = 1/(x - y).
    kind 'rough': homogeneous of degree -d with an angular factor of mean
        zero; d=1 takes (omega_plus, omega_minus) with omega_plus +
        omega_minus = 0, d=2 a mean-zero trigonometric polynomial given by
        cos/sin coefficients for frequencies 1..m.
    kind 'dini': the odd base kernel modulated by 1 + omega(|x-y|)/(2
        omega(1)), a smooth perturbation whose kernel oscillation is
        controlled by the modulus.
    ``truncation_cells``: entries with |x - y| below this many cell widths
    are zeroed (1 keeps everything but the diagonal).
    """

    kind: str
    dimension: int = 1
    omega_pair: tuple[float, float] | None = None
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()
    modulus: DiniModulus | None = None
    truncation_cells: float = 1.0

    def __post_init__(self):
        if self.kind not in ("hilbert", "rough", "dini"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "hilbert" and self.dimension != 1:
            raise ValueError("the Hilbert kernel is one-dimensional")
        if self.dimension not in (1, 2):
            raise ValueError("kernel dimension must be 1 or 2")
        if self.kind == "rough":
            if self.dimension == 1:
                if self.omega_pair is None:
                    raise ValueError("rough d=1 kernel needs (omega_plus, omega_minus)")
                if abs(self.omega_pair[0] + self.omega_pair[1]) > 1e-14:
                    raise ValueError("angular factor must have mean zero: omega(+1) = -omega(-1)")
            else:
                if not (self.cos_coeffs or self.sin_coeffs):
                    raise ValueError("rough d=2 kernel needs trigonometric coefficients")
        if self.kind == "dini" and self.modulus is None:
            object.__setattr__(self, "modulus", holder_modulus())
        if self.truncation_cells < 1.0:
            raise ValueError("truncation radius below one cell would keep the singular cell")


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense collocation matrix of an operator on the grid's cells.

    Rows/columns follow flat C-order cell indexing; ``provenance`` records
    how the matrix was built.
    """

    grid: Grid
    matrix: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        n = self.grid.cell_count
        arr = np.asarray(self.matrix, dtype=float)
        if arr.shape != (n, n):
            raise ValueError(f"matrix shape {arr.shape} does not match cell count {n}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    def apply(self, f: GridFunction) -> GridFunction:
        out = self.matrix @ f.flat()
        return GridFunction(f.grid, out.reshape(f.grid.shape))


@dataclass(frozen=True, eq=False)
class SymbolFunction:
    """Pointwise multiplier with a class tag assigned by its generator.

    The tag is metadata only: 'smooth-bump' marks the compactly supported
    smooth class, 'jump-indicator' and 'log-singular' mark bounded-mean-
    oscillation symbols outside the vanishing-oscillation closure.
    """

    values: GridFunction
    tag: str


def discretize(kernel: KernelSpec, grid: Grid) -> OperatorMatrix:
    """Midpoint collocation: entry = K(x_i, x_j) * cell volume, zero diagonal."""
    if kernel.dimension != grid.dimension:
        raise ValueError("kernel and grid dimensions differ")
    radius = kernel.truncation_cells * grid.cell_width
    if radius >= 1.0:
        raise ValueError("truncation radius reaches the domain size")
    if grid.dimension == 1:
        x = grid.axis_centers()
        diff = x[:, None] - x[None, :]
        dist = np.abs(diff)
        with np.errstate(divide="ignore", invalid="ignore"):
            if kernel.kind == "hilbert":
                k = 1.0 / diff
            elif kernel.kind == "rough":
                k = np.where(diff > 0, kernel.omega_pair[0], kernel.omega_pair[1]) / dist
            else:
                amp = 1.0 + kernel.modulus(dist) / (2.0 * kernel.modulus(np.array(1.0)))
                k = amp / diff
        k = np.where(dist < radius - 1e-15, 0.0, k)
        np.fill_diagonal(k, 0.0)
        return OperatorMatrix(grid, k * grid.cell_volume, provenance=f"{kernel.kind} d=1")
    pts = grid.cell_centers().reshape(-1, 2)
    dx = pts[:, None, 0] - pts[None, :, 0]
    dy = pts[:, None, 1] - pts[None, :, 1]
    dist = np.hypot(dx, dy)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kernel.kind == "rough":
            angle = np.arctan2(dy, dx)
            ang = np.zeros_like(dist)
            for m, c in enumerate(kernel.cos_coeffs, start=1):
                ang += c * np.cos(m * angle)
            for m, c in enumerate(kernel.sin_coeffs, start=1):
                ang += c * np.sin(m * angle)
            k = ang / dist**2
        else:  # dini: modulated first Riesz-type angular factor
            amp = 1.0 + kernel.modulus(dist) / (2.0 * kernel.modulus(np.array(1.0)))
            k = amp * dx / dist**3
    k = np.where(dist < radius - 1e-15, 0.0, k)
    np.fill_diagonal(k, 0.0)
    return OperatorMatrix(grid, k * grid.cell_volume, provenance=f"{kernel.kind} d=2")


def commutator_matrix(b: SymbolFunction | GridFunction, a: OperatorMatrix) -> OperatorMatrix:
    """Commutator of multiplication by b with the operator: entries (b_i - b_j) A_ij."""
    values = b.values if isinstance(b, SymbolFunction) else b
    if values.grid != a.grid:
        raise ValueError("symbol and operator live on different grids")
    bf = values.flat()
    c = (bf[:, None] - bf[None, :]) * a.matrix
    return OperatorMatrix(a.grid, c, provenance=f"commutator of {a.provenance}")


def bmo_norm(b: GridFunction, lattice: str = "dyadic") -> tuple[float, object]:
    """Mean-oscillation proxy: sup over lattice cubes of mean |b - mean_Q b|.

    Dyadic by default; the shifted option widens to the 3^d lattices, which
    restores comparability under translations at cell resolution (dyadic
    oscillation alone can change by a bounded factor when b is shifted).
    """
    from .grids import (
        IntegralImage,
        level_cell_means,
        pool_block_mean,
        repeat_to_cells,
        shifted_lattices,
        DyadicCube,
    )

    grid = b.grid
    means = level_cell_means(b.values, grid)
    best = -math.inf
    best_cube = None
    for k in range(grid.depth + 1):
        centered = np.abs(b.values - repeat_to_cells(means[k], grid, k))
        osc = pool_block_mean(centered, grid, k)
        flat_arg = int(np.argmax(osc))
        m = float(osc.reshape(-1)[flat_arg])
        if m > best:
            best = m
            idx = np.unravel_index(flat_arg, osc.shape)
            best_cube = DyadicCube(k, tuple(int(i) for i in idx))
    if lattice == "dyadic":
        return best, best_cube
    if lattice != "shifted":
        raise ValueError(f"unknown lattice {lattice!r}")
    img = IntegralImage(b.values, grid)
    for lat in shifted_lattices(grid):
        if all(s == 0 for s in lat.shift):
            continue
        for k in range(grid.depth + 1):
            edges = lat.axis_edges(k)
            if grid.dimension == 1:
                ints = img.box_integrals(edges[0])
                vols = np.diff(edges[0])
                box_means = ints / vols
                for m, box in enumerate(lat.boxes(k)):
                    dev = IntegralImage(np.abs(b.values - box_means[m]), grid)
                    val = dev.box_integrals(edges[0][m : m + 2])[0] / vols[m]
                    if val > best:
                        best, best_cube = float(val), box
            else:
                ints = img.box_integrals(edges[0], edges[1])
                vx, vy = np.diff(edges[0]), np.diff(edges[1])
                vols = np.outer(vx, vy)
                box_means = ints / vols
                for box in lat.boxes(k):
                    i, j = box.index
                    dev = IntegralImage(np.abs(b.values - box_means[i, j]), grid)
                    val = (
                        dev.box_integrals(edges[0][i : i + 2], edges[1][j : j + 2])[0, 0]
                        / vols[i, j]
                    )
                    if val > best:
                        best, best_cube = float(val), box
    return best, best_cube


def symbol_generator(kind: str, grid: Grid, **params) -> SymbolFunction:
    """Produce a tagged test symbol.

    'bump': smooth compactly supported bump, center/width parameters
        (vanishing-oscillation class; widening the bump flattens it).
    'jump': indicator of a half-domain split at ``threshold`` (bounded but
        oscillation persists at every scale).
    'log': log distance to ``center`` (unbounded, oscillation stabilizes);
        cells at the singularity carry their exact cell average.
    'custom': wrap ``values`` with the given ``tag``.
    """
    if kind == "custom":
        return SymbolFunction(params["values"], params.get("tag", "custom"))
    if grid.dimension == 1:
        x = grid.axis_centers()
    else:
        x = grid.cell_centers()
    if kind == "bump":
        center = params.get("center", 0.5)
        width = params.get("width", 0.25)
        if grid.dimension == 1:
            u = (x - center) / width
        else:
            u = np.hypot(x[..., 0] - center, x[..., 1] - center) / width
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.where(np.abs(u) < 1.0, np.exp(-1.0 / np.maximum(1.0 - u * u, 1e-300)), 0.0)
        return SymbolFunction(GridFunction(grid, vals, nonnegative=True), "smooth-bump")
    if kind == "jump":
        threshold = params.get("threshold", 0.5)
        axis_coord = x if grid.dimension == 1 else x[..., 0]
        vals = (axis_coord < threshold).astype(float)
        return SymbolFunction(GridFunction(grid, vals, nonnegative=True), "jump-indicator")
    if kind == "log":
        center = params.get("center", 0.5)
        if grid.dimension == 1:
            vals = _log_abs_cell_averaged(grid, center)
        else:
            r = np.hypot(x[..., 0] - center, x[..., 1] - center)
            h = grid.cell_width
            vals = np.where(r < h / 2, math.log(h) - 1.0, np.log(np.maximum(r, 1e-300)))
        return SymbolFunction(GridFunction(grid, vals), "log-singular")
    raise ValueError(f"unknown symbol kind {kind!r}")


def _log_abs_cell_averaged(grid: Grid, center: float) -> np.ndarray:
    """Exact cell averages of log|x - center| (antiderivative t log t - t)."""
    n = grid.cells_per_axis
    edges = np.arange(n + 1) / n - center

    def anti(t):
        a = np.abs(t)
        return np.where(a == 0.0, 0.0, np.sign(t) * (a * np.log(np.where(a == 0, 1.0, a)) - a))

    return (anti(edges[1:]) - anti(edges[:-1])) * n


def weighted_singular_values(a: OperatorMatrix, w: Weight) -> np.ndarray:
    """Singular values of the operator acting on the weighted Hilbert space.

    Multiplication by w is an isometry onto the unweighted space, so the
    conjugated matrix D A D^{-1} (D = diag of cell weights) carries the
    weighted-space geometry. LAPACK's SVD is backward stable, well below
    the documented 1e-10 * sigma_1 budget. Weights with dynamic range above
    1e12 are rejected: the conjugation itself would then dominate the error.
    """
    if w.grid != a.grid:
        raise ValueError("weight and operator live on different grids")
    if w.dynamic_range() > _MAX_WEIGHT_RANGE:
        raise ValueError(
            f"weight dynamic range {w.dynamic_range():.3e} too large for a stable conjugation"
        )
    d = w.flat()
    conj = (d[:, None] * a.matrix) / d[None, :]
    return np.linalg.svd(conj, compute_uv=False)


@dataclass(frozen=True, eq=False)
class CompactnessProfile:
    """Singular-value decay record of one matrix: curve plus tail ratios."""

    depth: int
    sigma: np.ndarray
    tail_ratios: dict[int, float]

    def to_rows(self) -> list[tuple[int, int, float]]:
        return [(self.depth, k, ratio) for k, ratio in sorted(self.tail_ratios.items())]


def compactness_profile(
    a: OperatorMatrix, w: Weight | None = None, tails: Sequence[int] = (8, 16, 32)
) -> CompactnessProfile:
    """Tail ratios sigma_k / sigma_1 of the (weighted) singular value curve."""
    weight = w if w is not None else Weight.unit(a.grid)
    sigma = weighted_singular_values(a, weight)
    n = sigma.size
    top = float(sigma[0])
    ratios = {}
    for k in tails:
        if not 1 <= k <= n:
            raise ValueError(f"tail index {k} out of range for size {n}")
        ratios[int(k)] = float(sigma[k - 1] / top) if top > 0 else 0.0
    return CompactnessProfile(depth=a.grid.depth, sigma=sigma, tail_ratios=ratios)


def refinement_profiles(
    kernel: KernelSpec,
    symbol_kind: str,
    depths: Sequence[int],
    tails: Sequence[int] = (8, 16, 32),
    weight_builder=None,
    symbol_params: dict | None = None,
) -> list[CompactnessProfile]:
    """Commutator decay profiles across refinement depths (same symbol recipe).

    A decreasing per-k trend is consistent with compactness in the
    continuum; stabilization above a floor is the inconsistent signature.
    The thresholds for calling a contrast are the caller's business.
    """
    out = []
    for depth in depths:
        grid = Grid(kernel.dimension, depth)
        sym = symbol_generator(symbol_kind, grid, **(symbol_params or {}))
        comm = commutator_matrix(sym, discretize(kernel, grid))
        w = weight_builder(grid) if weight_builder is not None else None
        out.append(compactness_profile(comm, w, tails))
    return out
