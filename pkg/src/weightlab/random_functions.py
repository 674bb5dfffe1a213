"""Seeded random grid functions and weights for experiments and tests.

Weights are cellwise exp(N(0, sigma)): log-normal cells exercise large
Muckenhoupt constants while staying strictly positive. Test functions are
standard normal per cell; nonnegative variants take absolute values.
"""

from __future__ import annotations

import numpy as np

from .grids import Grid, GridFunction
from .weights import Weight


def random_weight(grid: Grid, rng: np.random.Generator, sigma: float = 1.0) -> Weight:
    return Weight(grid, np.exp(sigma * rng.standard_normal(grid.shape)))


def random_function(grid: Grid, rng: np.random.Generator) -> GridFunction:
    return GridFunction(grid, rng.standard_normal(grid.shape))


def random_nonnegative(grid: Grid, rng: np.random.Generator) -> GridFunction:
    return GridFunction(grid, np.abs(rng.standard_normal(grid.shape)), nonnegative=True)


def random_exponent_function(
    grid: Grid, rng: np.random.Generator, low: float = 1.5, high: float = 4.0
) -> GridFunction:
    """Cellwise exponent function uniform in [low, high] for variable spaces."""
    return GridFunction(grid, rng.uniform(low, high, size=grid.shape))
