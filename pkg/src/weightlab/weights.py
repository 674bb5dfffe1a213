"""Weights and their Muckenhoupt-type constants on the dyadic grid.

The convention throughout matches the weighted-space definition used by the
rest of the package: the weighted Lebesgue space consists of the f with f*w
integrable to the p-th power, and the weight constant is

    sup over cubes of (mean of w^p)^(1/p) * (mean of w^(-p'))^(1/p'),

not the classical-measure variant. Every constant reports an attaining cube
so the supremum claim can be re-checked independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .exponents import Exponent, as_exponent, conjugate, inv, is_inf, to_float
from .grids import (
    Box,
    DyadicCube,
    Grid,
    GridFunction,
    IntegralImage,
    chain_running_max,
    level_cell_means,
    pool_block_mean,
    shifted_lattices,
)

__all__ = [
    "Weight",
    "WeightConstants",
    "ap_constant",
    "ainf_constant",
    "limited_range_constant",
    "power_weight",
]

# largest base-10 dynamic range we allow before w^exponent leaves double range
_MAX_LOG10_RANGE = 290.0


class Weight(GridFunction):
    """Strictly positive grid function.

    ``inverse()`` memoizes and back-links, so taking the inverse twice
    returns the original object (and its exact cell values).
    """

    def __post_init__(self):
        super().__post_init__()
        if np.min(self.values) <= 0:
            raise ValueError("weights must be strictly positive on every cell")
        object.__setattr__(self, "_inverse_cache", None)

    @staticmethod
    def from_function(f: GridFunction) -> "Weight":
        return Weight(f.grid, f.values)

    @staticmethod
    def unit(grid: Grid) -> "Weight":
        return Weight(grid, np.ones(grid.shape))

    def inverse(self) -> "Weight":
        cached = object.__getattribute__(self, "_inverse_cache")
        if cached is None:
            cached = Weight(self.grid, 1.0 / self.values)
            object.__setattr__(cached, "_inverse_cache", self)
            object.__setattr__(self, "_inverse_cache", cached)
        return cached

    def power(self, exponent: float | Fraction) -> "Weight":
        e = float(exponent)
        if e == 1.0:
            return self
        if e == -1.0:
            return self.inverse()
        return Weight(self.grid, self.values**e)

    def dynamic_range(self) -> float:
        return float(np.max(self.values) / np.min(self.values))

    def scale_normalized(self) -> tuple["Weight", float]:
        """Divide by a power of two near the median: exact in floating point."""
        med = float(np.median(self.values))
        scale = 2.0 ** round(math.log2(med)) if med > 0 else 1.0
        if scale == 1.0:
            return self, 1.0
        return Weight(self.grid, self.values / scale), scale


@dataclass(frozen=True)
class WeightConstants:
    """Bundle of the weight constants at one exponent, with attaining cubes."""

    p: float
    ap: float
    ainf: float
    ap_worst: DyadicCube | Box
    ainf_worst: DyadicCube
    limited: float | None = None
    limited_range: tuple[float, float] | None = None
    limited_worst: DyadicCube | Box | None = None

    def to_json(self) -> dict:
        out = {
            "p": self.p,
            "ap": self.ap,
            "ainf": self.ainf,
            "worst_cubes": {
                "ap": self.ap_worst.to_json(),
                "ainf": self.ainf_worst.to_json(),
            },
        }
        if self.limited is not None:
            out["limited"] = self.limited
            out["limited_range"] = [v if math.isfinite(v) else "inf" for v in self.limited_range]
            out["worst_cubes"]["limited"] = self.limited_worst.to_json()
        return out


def _check_range(w: Weight, exponents: Iterable[float]) -> None:
    lo, hi = float(np.min(w.values)), float(np.max(w.values))
    for e in exponents:
        worst = max(abs(e * math.log10(hi)), abs(e * math.log10(lo)))
        if worst > _MAX_LOG10_RANGE:
            raise OverflowError(
                f"weight dynamic range {hi / lo:.3e} makes w^{e:g} non-representable"
            )


def _dyadic_supremum(
    grid: Grid, factors: list[tuple[np.ndarray, float]]
) -> tuple[float, DyadicCube]:
    """Max over dyadic cubes of prod_i (cube mean of integrand_i)^(q_i).

    Ties keep the lowest level, then the lexicographically first index.
    """
    pooled = [level_cell_means(arr, grid) for arr, _ in factors]
    best = -math.inf
    best_cube = None
    for k in range(grid.depth + 1):
        value = np.ones_like(pooled[0][k])
        for (arr, q), levels in zip(factors, pooled):
            value = value * levels[k] ** q
        flat_arg = int(np.argmax(value))
        m = float(value.reshape(-1)[flat_arg])
        if m > best:
            best = m
            idx = np.unravel_index(flat_arg, value.shape)
            best_cube = DyadicCube(k, tuple(int(i) for i in idx))
    return best, best_cube


def _shifted_supremum(
    grid: Grid, factors: list[tuple[np.ndarray, float]]
) -> tuple[float, DyadicCube | Box]:
    """Max over all 3^d shifted lattices (shift 0 first, so it never loses ties)."""
    best, best_cube = _dyadic_supremum(grid, factors)
    images = [IntegralImage(arr, grid) for arr, _ in factors]
    for lattice in shifted_lattices(grid):
        if all(s == 0 for s in lattice.shift):
            continue
        for k in range(grid.depth + 1):
            edges = lattice.axis_edges(k)
            if grid.dimension == 1:
                vols = np.diff(edges[0])
                value = np.ones_like(vols)
                for img, (_, q) in zip(images, factors):
                    value = value * (img.box_integrals(edges[0]) / vols) ** q
            else:
                vols = np.outer(np.diff(edges[0]), np.diff(edges[1]))
                value = np.ones_like(vols)
                for img, (_, q) in zip(images, factors):
                    value = value * (img.box_integrals(edges[0], edges[1]) / vols) ** q
            flat_arg = int(np.argmax(value))
            m = float(value.reshape(-1)[flat_arg])
            if m > best:
                best = m
                idx = np.unravel_index(flat_arg, value.shape)
                boxes = {b.index: b for b in lattice.boxes(k)}
                best_cube = boxes[tuple(int(i) for i in idx)]
    return best, best_cube


def _lattice_supremum(grid, factors, lattice: str):
    if lattice == "dyadic":
        return _dyadic_supremum(grid, factors)
    if lattice == "shifted":
        return _shifted_supremum(grid, factors)
    raise ValueError(f"unknown lattice {lattice!r}; use 'dyadic' or 'shifted'")


def ap_constant(
    w: Weight, p: Exponent, lattice: str = "dyadic"
) -> tuple[float, DyadicCube | Box]:
    """Muckenhoupt constant sup_Q <w^p>^(1/p) <w^(-p')>^(1/p') and a worst cube."""
    p = as_exponent(p)
    if is_inf(p) or p <= 1:
        raise ValueError(f"need 1 < p < inf, got {p}")
    pc = conjugate(p)
    wn, _ = w.scale_normalized()
    _check_range(wn, [to_float(p), to_float(pc)])
    pf, pcf = to_float(p), to_float(pc)
    factors = [(wn.values**pf, 1.0 / pf), (wn.values**-pcf, 1.0 / pcf)]
    return _lattice_supremum(w.grid, factors, lattice)


def ainf_constant(w: Weight) -> tuple[float, DyadicCube]:
    """Fujii-Wilson constant: sup over dyadic Q of (1/w(Q)) * int_Q M(w 1_Q).

    M is the dyadic maximal operator. For x in Q only the subcubes of Q
    containing x matter (any strict ancestor R of Q sees the average
    w(Q)/|R| < <w>_Q, already attained inside), so the scan reduces to
    running ancestor-chain maxima, one pooled pass per level.
    """
    grid = w.grid
    wn, _ = w.scale_normalized()
    means = level_cell_means(wn.values, grid)
    chain = chain_running_max(means, grid)
    best = -math.inf
    best_cube = None
    for k in range(grid.depth + 1):
        ratio = pool_block_mean(chain[k], grid, k) / means[k]
        flat_arg = int(np.argmax(ratio))
        m = float(ratio.reshape(-1)[flat_arg])
        if m > best:
            best = m
            idx = np.unravel_index(flat_arg, ratio.shape)
            best_cube = DyadicCube(k, tuple(int(i) for i in idx))
    return best, best_cube


def limited_range_constant(
    w: Weight,
    p: Exponent,
    r: Exponent,
    s: Exponent,
    lattice: str = "dyadic",
) -> tuple[float, DyadicCube | Box]:
    """Limited-range constant sup_Q <w>_{e1,Q} <w^(-1)>_{e2,Q}.

    The averaging orders are e1 = 1/(1/p - 1/s) and e2 = 1/(1/r - 1/p);
    with r = 1 and s = inf this reduces exactly to :func:`ap_constant`.
    """
    p, r, s = as_exponent(p), as_exponent(r), as_exponent(s)
    if not (inv(s) < inv(p) < inv(r)):
        raise ValueError(f"need r < p < s, got r={r}, p={p}, s={s}")
    if inv(r) > 1:
        raise ValueError("r must be at least 1")
    e1 = 1 / (inv(p) - inv(s))
    e2 = 1 / (inv(r) - inv(p))
    wn, _ = w.scale_normalized()
    _check_range(wn, [float(e1), float(e2)])
    e1f, e2f = float(e1), float(e2)
    factors = [(wn.values**e1f, 1.0 / e1f), (wn.values**-e2f, 1.0 / e2f)]
    return _lattice_supremum(w.grid, factors, lattice)


def weight_constants(
    w: Weight,
    p: Exponent,
    r: Exponent | None = None,
    s: Exponent | None = None,
    lattice: str = "dyadic",
) -> WeightConstants:
    """All constants for one weight at one exponent, as reported by the CLI."""
    ap, ap_worst = ap_constant(w, p, lattice)
    ainf, ainf_worst = ainf_constant(w)
    limited = limited_worst = limited_range = None
    if r is not None and s is not None:
        limited, limited_worst = limited_range_constant(w, p, r, s, lattice)
        limited_range = (to_float(as_exponent(r)), to_float(as_exponent(s)))
    return WeightConstants(
        p=to_float(as_exponent(p)),
        ap=ap,
        ainf=ainf,
        ap_worst=ap_worst,
        ainf_worst=ainf_worst,
        limited=limited,
        limited_range=limited_range,
        limited_worst=limited_worst,
    )


def power_weight(grid: Grid, alpha: float, center: float | tuple[float, float] = 0.0) -> Weight:
    """|x - center|^alpha as a weight, singular cells replaced by cell averages.

    d=1 uses the closed-form cell average of |x-c|^alpha on every cell (the
    antiderivative of t^alpha), so there is no sampling bias anywhere. d=2
    samples cell centers except on cells whose closure contains the center,
    where the average of the radial power over the square is computed by
    polar-sector quadrature. ``center`` must be a grid point.
    """
    if alpha <= -grid.dimension:
        raise ValueError(f"alpha = {alpha} is not integrable in dimension {grid.dimension}")
    n = grid.cells_per_axis
    if grid.dimension == 1:
        c = float(center) if not isinstance(center, tuple) else float(center[0])
        _require_grid_point(c, n)
        edges = np.arange(n + 1) / n
        a = edges[:-1] - c
        b = edges[1:] - c
        vals = _interval_mean_abs_power(a, b, alpha)
        if alpha == 0.0:
            vals = np.ones(n)
        return Weight(grid, vals)
    cx, cy = (float(center[0]), float(center[1])) if isinstance(center, tuple) else (float(center), float(center))
    _require_grid_point(cx, n)
    _require_grid_point(cy, n)
    centers = grid.axis_centers()
    dx = centers[:, None] - cx
    dy = centers[None, :] - cy
    rad = np.hypot(dx, dy)
    vals = rad**alpha if alpha != 0.0 else np.ones_like(rad)
    h = grid.cell_width
    corner_mean = _corner_square_mean(alpha) if alpha != 0.0 else 1.0
    for i in range(n):
        for j in range(n):
            lo_x, hi_x = i * h - cx, (i + 1) * h - cx
            lo_y, hi_y = j * h - cy, (j + 1) * h - cy
            if lo_x <= 0.0 <= hi_x and lo_y <= 0.0 <= hi_y:
                # center sits at a corner of this cell
                vals[i, j] = corner_mean * h**alpha
    return Weight(grid, vals)


def _require_grid_point(c: float, n: int) -> None:
    if not (0.0 <= c <= 1.0) or abs(c * n - round(c * n)) > 1e-12:
        raise ValueError(f"center {c} is not a grid point")


def _interval_mean_abs_power(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    """Exact mean of |t|^alpha over [a, b) per entry, alpha > -1."""
    e = alpha + 1.0

    def anti(t):
        return np.sign(t) * np.abs(t) ** e / e

    return (anti(b) - anti(a)) / (b - a)


def _corner_square_mean(alpha: float, order: int = 64) -> float:
    """Mean of (x^2+y^2)^(alpha/2) over the unit square with the pole at a corner.

    Polar sectors: 2/(alpha+2) * int_0^{pi/4} sec(t)^{alpha+2} dt by symmetry,
    evaluated with Gauss-Legendre quadrature (the integrand is smooth).
    """
    nodes, wts = np.polynomial.legendre.leggauss(order)
    t = (nodes + 1.0) * (math.pi / 8.0)
    scale = math.pi / 8.0
    vals = np.cos(t) ** -(alpha + 2.0)
    return 2.0 / (alpha + 2.0) * float(np.sum(wts * vals)) * scale
