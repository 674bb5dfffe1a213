"""Norm oracles and space algebra for the two concrete space families.

Supported kinds: weighted Lebesgue spaces (constant exponent, exact rational
bookkeeping) and weighted variable-exponent Lebesgue spaces (cellwise
exponent, Luxembourg norm by bisection). The algebra below (associate,
concavification, rescaling, pointwise products) acts on the symbolic space
descriptors; abstract lattices beyond these families are not representable.

The associate of a variable-exponent space is taken with the pointwise
conjugate exponent. That is the standard norm-equivalent (not isometric)
choice, so identities that are exact for the constant-exponent kind hold
only up to a factor of at most 2 for the variable kind; tests account for
that slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .exponents import INF, Exponent, as_exponent, conjugate, inv, is_inf, to_float
from .grids import Grid, GridFunction
from .weights import Weight

__all__ = [
    "WeightedLebesgue",
    "VariableLebesgue",
    "SpaceSpec",
    "space_norm",
    "modular",
    "associate_spec",
    "concavify_spec",
    "rescale_spec",
    "SpecAlgebraResult",
    "TraceStep",
    "replay",
    "product_spec",
    "product_norm",
    "product_factorization",
    "convexity_check",
    "ConvexityReport",
    "specs_equal",
]

LUXEMBOURG_REL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WeightedLebesgue:
    """L^p with weight w, in the convention that f*w is p-integrable."""

    p: Fraction | float  # exact rational, or inf
    weight: Weight

    def __post_init__(self):
        p = as_exponent(self.p)
        object.__setattr__(self, "p", p)
        if not is_inf(p) and p <= 0:
            raise ValueError(f"exponent must be positive, got {p}")

    @property
    def grid(self) -> Grid:
        return self.weight.grid

    @property
    def kind(self) -> str:
        return "weighted"

    @property
    def r_star(self) -> float:
        return to_float(self.p)

    @property
    def s_star(self) -> float:
        return to_float(self.p)

    @property
    def quasi(self) -> bool:
        return not is_inf(self.p) and self.p < 1

    def describe(self) -> dict:
        from .exponents import rational_json

        return {"kind": "weighted", "p": rational_json(self.p)}


@dataclass(frozen=True, eq=False)
class VariableLebesgue:
    """L^{p(.)} with weight w; exponent varies per cell."""

    exponent: GridFunction
    weight: Weight

    def __post_init__(self):
        if self.exponent.grid != self.weight.grid:
            raise ValueError("exponent function and weight live on different grids")
        if np.min(self.exponent.values) <= 0:
            raise ValueError("exponent function must be positive")

    @property
    def grid(self) -> Grid:
        return self.weight.grid

    @property
    def kind(self) -> str:
        return "variable"

    @property
    def r_star(self) -> float:
        return float(np.min(self.exponent.values))

    @property
    def s_star(self) -> float:
        return float(np.max(self.exponent.values))

    @property
    def quasi(self) -> bool:
        return self.r_star < 1

    def describe(self) -> dict:
        return {"kind": "variable", "p_min": self.r_star, "p_max": self.s_star}


SpaceSpec = Union[WeightedLebesgue, VariableLebesgue]


def specs_equal(a: SpaceSpec, b: SpaceSpec, rtol: float = 1e-10) -> bool:
    if a.kind != b.kind or a.grid != b.grid:
        return False
    if not np.allclose(a.weight.values, b.weight.values, rtol=rtol, atol=0.0):
        return False
    if a.kind == "weighted":
        return a.p == b.p
    return np.allclose(a.exponent.values, b.exponent.values, rtol=rtol, atol=0.0)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def _weighted_values(spec: SpaceSpec, f: GridFunction) -> np.ndarray:
    if f.grid != spec.grid:
        raise ValueError("function and space live on different grids")
    if not np.all(np.isfinite(f.values)):
        raise ValueError("non-finite function values")
    return np.abs(f.values) * spec.weight.values


def space_norm(spec: SpaceSpec, f: GridFunction) -> float:
    """Norm of f in the space: exact power sum, or Luxembourg by bisection."""
    g = _weighted_values(spec, f)
    if spec.kind == "weighted":
        return _constant_norm(g, spec.p, spec.grid.cell_volume)
    return _luxembourg_norm(g, spec.exponent.values, spec.grid.cell_volume)


def _constant_norm(g: np.ndarray, p: Fraction | float, vol: float) -> float:
    m = float(np.max(g))
    if m == 0.0:
        return 0.0
    if is_inf(p):
        return m
    pf = float(p)
    # factor out the max so large exponents cannot overflow
    return m * float(np.sum((g / m) ** pf) * vol) ** (1.0 / pf)


def modular(spec: VariableLebesgue, f: GridFunction, scale: float = 1.0) -> float:
    """Sum of |f w / scale|^{p(x)} times cell volume."""
    g = _weighted_values(spec, f)
    return _modular(g / scale, spec.exponent.values, spec.grid.cell_volume)


def _modular(g: np.ndarray, p: np.ndarray, vol: float) -> float:
    with np.errstate(over="ignore"):
        return float(np.sum(g**p) * vol)


def _luxembourg_norm(g: np.ndarray, p: np.ndarray, vol: float) -> float:
    """inf of scales at which the modular drops to 1; monotone bisection.

    The modular is strictly decreasing in the scale wherever g is nonzero,
    so bisection converges unconditionally. Upper bracket: at scale max(g)
    every term is <= 1 and the cell volumes sum to at most 1. Lower bracket:
    seeded with the smallest constant-exponent norm, expanded geometrically
    if the modular there is still at most 1.
    """
    hi = float(np.max(g))
    if hi == 0.0:
        return 0.0
    lo = min(_constant_norm(g, float(np.min(p)), vol), hi)
    while _modular(g / lo, p, vol) <= 1.0:
        lo /= 4.0
        if lo < hi * 1e-300:
            return lo
    while hi - lo > LUXEMBOURG_REL_TOL * hi:
        mid = 0.5 * (lo + hi)
        if _modular(g / mid, p, vol) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# associate space and concavification
# ---------------------------------------------------------------------------


def associate_spec(spec: SpaceSpec) -> SpaceSpec:
    """Associate space: conjugate exponent, inverted weight.

    Memoized with a backreference, so the double associate returns the
    original spec object (norms and all), matching the equal-norms
    biduality of these families at descriptor level.
    """
    cached = getattr(spec, "_associate_cache", None)
    if cached is not None:
        return cached
    if spec.kind == "weighted":
        if is_inf(spec.p) or spec.p <= 1:
            raise ValueError(f"associate needs exponent in (1, inf), got {spec.p}")
        out = WeightedLebesgue(conjugate(spec.p), spec.weight.inverse())
    else:
        pvals = spec.exponent.values
        if np.min(pvals) <= 1.0:
            raise ValueError("associate needs the exponent function to exceed 1 everywhere")
        out = VariableLebesgue(
            GridFunction(spec.grid, pvals / (pvals - 1.0)), spec.weight.inverse()
        )
    object.__setattr__(out, "_associate_cache", spec)
    object.__setattr__(spec, "_associate_cache", out)
    return out


def concavify_spec(spec: SpaceSpec, r: Exponent) -> SpaceSpec:
    """r-concavification: exponent divided by r, weight raised to r.

    The result is quasi-normed when the new exponent dips below 1 (check
    the ``quasi`` property); no error is raised for that.
    """
    r = as_exponent(r)
    if is_inf(r) or r <= 0:
        raise ValueError(f"concavification order must be positive and finite, got {r}")
    if r == 1:
        return spec
    if spec.kind == "weighted":
        new_p = INF if is_inf(spec.p) else spec.p / r
        return WeightedLebesgue(new_p, spec.weight.power(r))
    return VariableLebesgue(
        GridFunction(spec.grid, spec.exponent.values / float(r)), spec.weight.power(r)
    )


# ---------------------------------------------------------------------------
# (r, s)-rescaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceStep:
    op: str
    params: tuple


@dataclass(frozen=True)
class SpecAlgebraResult:
    spec: SpaceSpec
    trace: tuple[TraceStep, ...]
    chain_verified: bool
    note: str = ""


def apply_step(spec: SpaceSpec, step: TraceStep) -> SpaceSpec:
    if step.op == "concavify":
        return concavify_spec(spec, step.params[0])
    if step.op == "associate":
        return associate_spec(spec)
    if step.op == "rescale_closed_form":
        return _rescale_closed_form(spec, *step.params)
    raise ValueError(f"unknown trace step {step.op!r}")


def replay(spec: SpaceSpec, trace: tuple[TraceStep, ...]) -> SpaceSpec:
    for step in trace:
        spec = apply_step(spec, step)
    return spec


def _rescale_closed_form(spec: SpaceSpec, r, s) -> SpaceSpec:
    """Closed form of the rescaled space: affine exponent map, weight power.

    1/p_new = (1/p - 1/s) / (1/r - 1/s), weight exponent 1/(1/r - 1/s).
    """
    ir, is_ = inv(r), inv(s)
    e = 1 / (ir - is_)
    if spec.kind == "weighted":
        u = (inv(spec.p) - is_) / (ir - is_)
        new_p = INF if u == 0 else 1 / u
        return WeightedLebesgue(new_p, spec.weight.power(e))
    pv = spec.exponent.values
    u = (1.0 / pv - float(is_)) / float(ir - is_)
    return VariableLebesgue(GridFunction(spec.grid, 1.0 / u), spec.weight.power(e))


def rescale_spec(spec: SpaceSpec, r: Exponent, s: Exponent) -> SpecAlgebraResult:
    """Rescaled space along (r, s), with the definitional chain cross-checked.

    Preconditions: 1 <= r < s <= inf and the space r-convex and s-concave
    (r at most the convexity index, s at least the concavity index). The
    closed form is always computed; the definitional chain (concavify by r,
    associate, concavify by (s/r)', associate) is evaluated and asserted to
    coincide whenever its intermediate spaces stay inside the two families,
    i.e. when r < essinf p and esssup p < s strictly.
    """
    r, s = as_exponent(r), as_exponent(s)
    ir, is_ = inv(r), inv(s)
    if not (0 <= is_ < ir <= 1):
        raise ValueError(f"need 1 <= r < s <= inf, got r={r}, s={s}")
    if float(r) > spec.r_star * (1 + 1e-12):
        raise ValueError(f"space is not {r}-convex (convexity index {spec.r_star})")
    if to_float(s) < spec.s_star * (1 - 1e-12):
        raise ValueError(f"space is not {s}-concave (concavity index {spec.s_star})")

    closed = _rescale_closed_form(spec, r, s)
    chain_ok = False
    note = ""
    if float(r) < spec.r_star and spec.s_star < to_float(s):
        middle = conjugate(s / r) if not is_inf(s) else Fraction(1)
        steps = [TraceStep("concavify", (r,)), TraceStep("associate", ())]
        if middle != 1:
            steps.append(TraceStep("concavify", (middle,)))
        steps.append(TraceStep("associate", ()))
        chain = replay(spec, tuple(steps))
        if not specs_equal(chain, closed, rtol=1e-9):
            raise AssertionError(
                "definitional chain and closed form disagree for the rescaled space"
            )
        chain_ok = True
        trace = tuple(steps)
    else:
        note = "chain skipped: an intermediate space would leave the representable families"
        trace = (TraceStep("rescale_closed_form", (r, s)),)
    return SpecAlgebraResult(spec=closed, trace=trace, chain_verified=chain_ok, note=note)


# ---------------------------------------------------------------------------
# pointwise products
# ---------------------------------------------------------------------------


def product_spec(spec0: SpaceSpec, spec1: SpaceSpec, theta: Exponent) -> SpaceSpec:
    """Closed form of the product space with powers (1-theta, theta).

    Exponent: 1/p = (1-theta)/p0 + theta/p1 (per cell if either side
    varies); weight: w0^(1-theta) * w1^theta.
    """
    theta = as_exponent(theta)
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0,1), got {theta}")
    if spec0.grid != spec1.grid:
        raise ValueError("product of spaces over different grids")
    tf = float(theta)
    wvals = spec0.weight.values ** (1.0 - tf) * spec1.weight.values**tf
    weight = Weight(spec0.grid, wvals)
    if spec0.kind == "weighted" and spec1.kind == "weighted":
        u = (1 - theta) * inv(spec0.p) + theta * inv(spec1.p)
        return WeightedLebesgue(INF if u == 0 else 1 / u, weight)
    p0 = _exponent_cells(spec0)
    p1 = _exponent_cells(spec1)
    u = (1.0 - tf) / p0 + tf / p1
    return VariableLebesgue(GridFunction(spec0.grid, 1.0 / u), weight)


def _exponent_cells(spec: SpaceSpec) -> np.ndarray:
    if spec.kind == "weighted":
        return np.full(spec.grid.shape, to_float(spec.p))
    return spec.exponent.values


def product_factorization(
    spec0: SpaceSpec, spec1: SpaceSpec, theta: Exponent, h: GridFunction
) -> tuple[GridFunction, GridFunction]:
    """The optimal split |h| = f^(1-theta) g^theta with norm(f)=norm(g)=norm(h).

    Valid for the constant-exponent kind, where the product norm infimum is
    attained: both factors are powers of |h| w_theta rebalanced by the
    respective weights.
    """
    theta = as_exponent(theta)
    prod = product_spec(spec0, spec1, theta)
    nh = space_norm(prod, h)
    if nh == 0.0:
        zero = GridFunction(h.grid, np.zeros(h.grid.shape), nonnegative=True)
        return zero, zero
    base = np.abs(h.values) * prod.weight.values / nh
    p_theta = _exponent_cells(prod)
    f0 = nh * base ** (p_theta / _exponent_cells(spec0)) / spec0.weight.values
    f1 = nh * base ** (p_theta / _exponent_cells(spec1)) / spec1.weight.values
    return (
        GridFunction(h.grid, f0, nonnegative=True),
        GridFunction(h.grid, f1, nonnegative=True),
    )


def product_norm(
    spec0: SpaceSpec, spec1: SpaceSpec, theta: Exponent, h: GridFunction
) -> float:
    """Norm of h in the product space (closed form).

    For constant-exponent inputs the explicit optimal factorization is
    evaluated and must reproduce the closed form to 1e-10 relative, which
    realizes the product-norm infimum exactly at Lebesgue scale. For the
    variable kind the closed form is returned as the norm-equivalent value.
    """
    theta = as_exponent(theta)
    prod = product_spec(spec0, spec1, theta)
    value = space_norm(prod, h)
    if spec0.kind == "weighted" and spec1.kind == "weighted" and value > 0:
        f0, f1 = product_factorization(spec0, spec1, theta, h)
        tf = float(theta)
        via_pair = space_norm(spec0, f0) ** (1.0 - tf) * space_norm(spec1, f1) ** tf
        if not math.isclose(via_pair, value, rel_tol=1e-10):
            raise AssertionError(
                f"optimal factorization gives {via_pair}, closed form gives {value}"
            )
    return value


# ---------------------------------------------------------------------------
# convexity / concavity sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexityReport:
    """Sampled evidence (never a proof): worst slacks of the two inequalities.

    Slack is (allowed - observed) / scale per sample; negative slack beyond
    tolerance is a counterexample. ``holds`` flags mean only that no
    counterexample was found among the samples.
    """

    r: float
    s: float
    samples: int
    r_convex_worst_slack: float
    s_concave_worst_slack: float
    r_convex_counterexamples: int
    s_concave_counterexamples: int

    @property
    def r_convex_holds(self) -> bool:
        return self.r_convex_counterexamples == 0

    @property
    def s_concave_holds(self) -> bool:
        return self.s_concave_counterexamples == 0


def convexity_check(
    spec: SpaceSpec,
    r: float,
    s: float,
    sample_count: int = 100,
    seed: int = 0,
    tolerance: float = 1e-12,
) -> ConvexityReport:
    """Test the r-convexity and s-concavity inequalities on random pairs.

    The pair pool mixes dense random pairs with disjointly supported ones;
    disjoint supports are where concavity failures show up first.
    """
    if r > s:
        raise ValueError("need r <= s")
    rng = np.random.default_rng(seed)
    grid = spec.grid
    worst_r, worst_s = math.inf, math.inf
    bad_r = bad_s = 0
    for i in range(sample_count):
        fv = rng.standard_normal(grid.shape)
        gv = rng.standard_normal(grid.shape)
        if i % 2 == 1:
            mask = rng.random(grid.shape) < 0.5
            fv = np.where(mask, fv, 0.0)
            gv = np.where(mask, 0.0, gv)
        f = GridFunction(grid, fv)
        g = GridFunction(grid, gv)
        nf, ng = space_norm(spec, f), space_norm(spec, g)
        if nf == 0.0 and ng == 0.0:
            continue
        sum_r = GridFunction(grid, (np.abs(fv) ** r + np.abs(gv) ** r) ** (1.0 / r))
        lhs = space_norm(spec, sum_r)
        rhs = (nf**r + ng**r) ** (1.0 / r)
        scale = max(lhs, rhs)
        slack = (rhs - lhs) / scale
        worst_r = min(worst_r, slack)
        if slack < -tolerance:
            bad_r += 1
        if not math.isinf(s):
            sum_s = GridFunction(grid, (np.abs(fv) ** s + np.abs(gv) ** s) ** (1.0 / s))
            lhs2 = (nf**s + ng**s) ** (1.0 / s)
            rhs2 = space_norm(spec, sum_s)
            scale2 = max(lhs2, rhs2)
            slack2 = (rhs2 - lhs2) / scale2
            worst_s = min(worst_s, slack2)
            if slack2 < -tolerance:
                bad_s += 1
    return ConvexityReport(
        r=float(r),
        s=float(s),
        samples=sample_count,
        r_convex_worst_slack=worst_r,
        s_concave_worst_slack=worst_s,
        r_convex_counterexamples=bad_r,
        s_concave_counterexamples=bad_s,
    )
