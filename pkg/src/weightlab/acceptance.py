"""The acceptance suite: one callable per criterion, shared by CLI and tests.

Each criterion returns a :class:`CriterionResult` with a pass flag and a
detail string recording the observed numbers (worst errors, logged
constants), so a failing run says what it saw. Seeds are fixed; runtime
limits are part of the criteria that state them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .compactness import (
    KernelSpec,
    commutator_matrix,
    discretize,
    symbol_generator,
    weighted_singular_values,
)
from .exponents import INF
from .extrapolation import (
    buckley_bound,
    limited_range_plan,
    lr_rescale_t,
    lr_theta_p,
    rdf_weight,
    reverse_holder_check,
    smallest_sufficient_cd,
)
from .grids import Grid, GridFunction
from .maximal import cz_sparse_family, maximal, sparse_operator, verify_sparse
from .random_functions import random_function, random_nonnegative, random_weight
from .spaces import (
    VariableLebesgue,
    WeightedLebesgue,
    associate_spec,
    modular,
    product_norm,
    replay,
    rescale_spec,
    space_norm,
)
from .weights import Weight, ainf_constant, ap_constant, limited_range_constant


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    detail: str
    runtime: float


def _result(name: str, passed: bool, detail: str, start: float) -> CriterionResult:
    return CriterionResult(name, passed, detail, time.perf_counter() - start)


def criterion_1_weight_axioms() -> CriterionResult:
    """Unit weight exact; duality and scale invariance to 1e-10; under 30 s."""
    start = time.perf_counter()
    grid = Grid(1, 10)
    rng = np.random.default_rng(101)
    ps = [Fraction(3, 2), Fraction(2), Fraction(4)]
    unit = Weight.unit(grid)
    ok = all(ap_constant(unit, p)[0] == 1.0 for p in ps)
    worst_dual = worst_scale = 0.0
    for _ in range(50):
        w = random_weight(grid, rng, sigma=1.0)
        for p in ps:
            ap, _ = ap_constant(w, p)
            dual, _ = ap_constant(w.inverse(), 1 / (1 - 1 / p))
            scaled, _ = ap_constant(Weight(grid, w.values * 3.7), p)
            worst_dual = max(worst_dual, abs(ap - dual))
            worst_scale = max(worst_scale, abs(ap - scaled))
    elapsed = time.perf_counter() - start
    passed = ok and worst_dual <= 1e-10 and worst_scale <= 1e-10 and elapsed < 30.0
    detail = (
        f"unit exact: {ok}; worst duality gap {worst_dual:.3e}; "
        f"worst scaling gap {worst_scale:.3e}; {elapsed:.1f}s"
    )
    return _result("weight-constant-axioms", passed, detail, start)


def criterion_2_hand_constants() -> CriterionResult:
    """Two-cell weight (2, 1): constant 1.25 at p=2 and 7/6 in the sup form."""
    start = time.perf_counter()
    grid = Grid(1, 1)
    w = Weight(grid, np.array([2.0, 1.0]))
    ap, ap_cube = ap_constant(w, 2)
    ainf, _ = ainf_constant(w)
    err_ap = abs(ap - 1.25)
    err_ainf = abs(ainf - 7.0 / 6.0)
    passed = err_ap <= 1e-12 and err_ainf <= 1e-12 and ap_cube.level == 0
    detail = f"ap err {err_ap:.2e}, ainf err {err_ainf:.2e}, worst cube level {ap_cube.level}"
    return _result("hand-derived-constants", passed, detail, start)


def criterion_3_limited_range_reduction() -> CriterionResult:
    """Full-range parameters reduce the limited-range constant to the plain one."""
    start = time.perf_counter()
    grid = Grid(1, 10)
    rng = np.random.default_rng(101)
    ps = [Fraction(3, 2), Fraction(2), Fraction(4)]
    worst = 0.0
    for _ in range(50):
        w = random_weight(grid, rng, sigma=1.0)
        for p in ps:
            full, _ = ap_constant(w, p)
            lim, _ = limited_range_constant(w, p, 1, INF)
            worst = max(worst, abs(full - lim))
    passed = worst <= 1e-12
    return _result("limited-range-reduction", passed, f"worst gap {worst:.3e}", start)


def criterion_4_sparse_domination() -> CriterionResult:
    """Stopping families verify sparse and dominate the maximal function."""
    start = time.perf_counter()
    grid = Grid(1, 10)
    rng = np.random.default_rng(104)
    all_valid = True
    worst_slack = -math.inf
    for _ in range(100):
        f = random_nonnegative(grid, rng)
        family = cz_sparse_family(f, 2.0)
        if not verify_sparse(family).ok:
            all_valid = False
        gap = maximal(f).values - 2.0 * sparse_operator(family, f).values
        worst_slack = max(worst_slack, float(np.max(gap)))
    elapsed = time.perf_counter() - start
    passed = all_valid and worst_slack <= 1e-12 and elapsed < 60.0
    detail = f"all families valid: {all_valid}; worst domination slack {worst_slack:.3e}; {elapsed:.1f}s"
    return _result("sparse-domination", passed, detail, start)


def criterion_5_rdf_weight() -> CriterionResult:
    """Iteration weights majorize their seed, satisfy the pointwise bound,
    and pass reverse Hoelder at the logged sufficient dimensional constant."""
    start = time.perf_counter()
    grid = Grid(1, 10)
    rng = np.random.default_rng(105)
    bound = buckley_bound(2, 1.0)  # maximal operator on the unweighted L^2 scale
    r = 2.0
    dominates = a1_holds = rh_holds = True
    worst_cd = 0.0
    for _ in range(100):
        f = random_nonnegative(grid, rng)
        built = rdf_weight(f, r, bound, depth=40)
        if not np.all(built.values.values >= built.seed.values):
            dominates = False
        mw = maximal(built.values).values
        if not np.all(mw <= 2.0 * bound * built.values.values + built.tail_bound):
            a1_holds = False
        w = built.as_weight()
        cd, ainf = smallest_sufficient_cd(w)
        worst_cd = max(worst_cd, cd)
        rp = cd * ainf
        if not reverse_holder_check(w, rp / (rp - 1.0)).passed:
            rh_holds = False
    passed = dominates and a1_holds and rh_holds and math.isfinite(worst_cd)
    detail = (
        f"seed majorized: {dominates}; pointwise bound: {a1_holds}; "
        f"reverse Hoelder at reported c_d: {rh_holds}; largest sufficient c_d {worst_cd:.3f} "
        f"(B={bound:g}, K=40)"
    )
    return _result("rdf-weight-properties", passed, detail, start)


def criterion_6_rescale_identity() -> CriterionResult:
    """Definitional chain vs closed form: exponent-exact, norms to 1e-8."""
    start = time.perf_counter()
    grid = Grid(1, 8)
    rng = np.random.default_rng(106)
    worst = 0.0
    chains = 0
    for _ in range(20):
        a, c, b = np.sort(rng.choice(np.arange(0, 13), size=3, replace=False))
        p = Fraction(12, int(c))
        r = Fraction(12, int(b))
        s = INF if a == 0 else Fraction(12, int(a))
        w = random_weight(grid, rng, sigma=0.5)
        spec = WeightedLebesgue(p, w)
        result = rescale_spec(spec, r, s)
        if not result.chain_verified:
            continue
        chains += 1
        chain_spec = replay(spec, result.trace)
        for _ in range(100):
            f = random_function(grid, rng)
            n1 = space_norm(result.spec, f)
            n2 = space_norm(chain_spec, f)
            if n1 > 0:
                worst = max(worst, abs(n1 - n2) / n1)
    passed = chains == 20 and worst <= 1e-8
    detail = f"{chains}/20 tuples chain-verified; worst relative norm gap {worst:.3e}"
    return _result("rescale-identity", passed, detail, start)


def criterion_7_factorization() -> CriterionResult:
    """Product factorizations recombine to the original space at norm level."""
    start = time.perf_counter()
    grid = Grid(1, 8)
    rng = np.random.default_rng(107)
    w = random_weight(grid, rng, sigma=0.5)
    x = WeightedLebesgue(Fraction(2), w)
    r, s = Fraction(4, 3), Fraction(4)
    rescaled = rescale_spec(x, r, s).spec
    theta = 1 - (1 / r - 1 / s)  # = 1/2; Lebesgue leg exponent s*theta = 2
    leg = WeightedLebesgue(s * theta, Weight.unit(grid))
    worst_a = 0.0
    for _ in range(100):
        h = random_function(grid, rng)
        target = space_norm(x, h)
        got = product_norm(rescaled, leg, theta, h)
        if target > 0:
            worst_a = max(worst_a, abs(got - target) / target)
    p = Fraction(3)
    xp = WeightedLebesgue(p, w)
    xq = associate_spec(xp)
    l2 = WeightedLebesgue(Fraction(2), Weight.unit(grid))
    worst_b = 0.0
    for _ in range(100):
        h = random_function(grid, rng)
        target = space_norm(l2, h)
        got = product_norm(xp, xq, Fraction(1, 2), h)
        if target > 0:
            worst_b = max(worst_b, abs(got - target) / target)
    passed = worst_a <= 1e-8 and worst_b <= 1e-8
    detail = f"rescaled-product gap {worst_a:.3e}; dual-pair gap {worst_b:.3e}"
    return _result("product-factorization", passed, detail, start)


def criterion_8_luxembourg() -> CriterionResult:
    """Luxembourg norm: constant-exponent collapse, two-cell root, modular at 1."""
    start = time.perf_counter()
    grid = Grid(1, 8)
    rng = np.random.default_rng(108)
    worst_const = 0.0
    for _ in range(20):
        p = float(rng.uniform(1.2, 5.0))
        w = random_weight(grid, rng, sigma=0.5)
        var = VariableLebesgue(GridFunction.constant(grid, p), w)
        const = WeightedLebesgue(Fraction(p).limit_denominator(10**8), w)
        f = random_function(grid, rng)
        a, b = space_norm(var, f), space_norm(const, f)
        if b > 0:
            worst_const = max(worst_const, abs(a - b) / b)
    two_cell = Grid(1, 1)
    spec = VariableLebesgue(
        GridFunction(two_cell, np.array([2.0, 4.0])), Weight.unit(two_cell)
    )
    root = space_norm(spec, GridFunction.constant(two_cell, 1.0))
    root_err = abs(root - 1.0)
    worst_mod = 0.0
    wvar = random_weight(grid, rng, sigma=0.5)
    pvar = GridFunction(grid, rng.uniform(1.5, 4.0, size=grid.shape))
    var = VariableLebesgue(pvar, wvar)
    for _ in range(100):
        f = random_function(grid, rng)
        n = space_norm(var, f)
        if n > 0:
            worst_mod = max(worst_mod, abs(modular(var, f, scale=n) - 1.0))
    passed = worst_const <= 1e-10 and root_err <= 1e-8 and worst_mod <= 1e-8
    detail = (
        f"constant-exponent gap {worst_const:.3e}; two-cell error {root_err:.3e}; "
        f"worst modular defect {worst_mod:.3e}"
    )
    return _result("luxembourg-oracle", passed, detail, start)


def criterion_9_exponent_calculus() -> CriterionResult:
    """Hand examples exact; 1000 random tuples satisfy the derived bounds;
    midpoint plan is self-dual."""
    start = time.perf_counter()
    t = lr_rescale_t(1, 2, 3, 6)
    theta, p = lr_theta_p(1, 2, 3, INF)
    exact = t == Fraction(10, 3) and theta == Fraction(5, 6) and p == Fraction(5, 2)
    rng = np.random.default_rng(109)
    tuple_ok = True
    for _ in range(1000):
        a, b, c, d = np.sort(rng.choice(np.arange(0, 25), size=4, replace=False))
        s = INF if a == 0 else Fraction(24, int(a))
        st, rt, r = Fraction(24, int(b)), Fraction(24, int(c)), Fraction(24, int(d))
        t_i = lr_rescale_t(r, rt, st, s)
        theta_i, p_i = lr_theta_p(r, rt, st, s)
        if not (t_i >= st and 0 < theta_i < 1 and p_i > 1):
            tuple_ok = False
            break
    plan = limited_range_plan(2, 4, 2, 4, Fraction(8, 3))
    leg = plan.legs[0]
    midpoint_ok = (
        leg.q == Fraction(8, 3) and leg.midpoint == Fraction(8, 3) and plan.alpha == 0
    )
    passed = exact and tuple_ok and midpoint_ok
    detail = (
        f"hand examples exact: {exact}; 1000 tuples admissible: {tuple_ok}; "
        f"self-dual midpoint: {midpoint_ok}"
    )
    return _result("exponent-calculus", passed, detail, start)


def criterion_10_commutator_rank() -> CriterionResult:
    """Coordinate symbol with the 1/(x-y) kernel: rank-one-plus-identity
    structure, second singular value 1/(n-1) of the first."""
    start = time.perf_counter()
    grid = Grid(1, 8)
    n = grid.cell_count
    op = discretize(KernelSpec("hilbert", 1), grid)
    coordinate = GridFunction(grid, grid.axis_centers())
    comm = commutator_matrix(coordinate, op)
    sigma = weighted_singular_values(comm, Weight.unit(grid))
    ratio = float(sigma[1] / sigma[0])
    err = abs(ratio - 1.0 / (n - 1))
    const = commutator_matrix(GridFunction.constant(grid, 3.0), op)
    zero_exact = bool(np.all(const.matrix == 0.0))
    passed = err <= 1e-9 and zero_exact
    detail = f"sigma2/sigma1 = {ratio:.6e} (err {err:.2e} vs 1/{n - 1}); constant symbol zero: {zero_exact}"
    return _result("commutator-rank-structure", passed, detail, start)


def criterion_11_compactness_contrast() -> CriterionResult:
    """Smooth-bump commutator tails decay across depth; jump tails stabilize."""
    start = time.perf_counter()
    k = 32
    ratios: dict[str, list[float]] = {"bump": [], "jump": []}
    for depth in (8, 9, 10):
        grid = Grid(1, depth)
        op = discretize(KernelSpec("hilbert", 1), grid)
        for kind in ("bump", "jump"):
            sym = symbol_generator(kind, grid)
            sigma = weighted_singular_values(
                commutator_matrix(sym, op), Weight.unit(grid)
            )
            ratios[kind].append(float(sigma[k - 1] / sigma[0]))
    bump, jump = ratios["bump"], ratios["jump"]
    contrast = bump[-1] < jump[-1]
    bump_decreasing = bump[0] > bump[1] > bump[2]
    jump_stable = max(jump) / min(jump) <= 1.2
    elapsed = time.perf_counter() - start
    passed = contrast and bump_decreasing and jump_stable and elapsed < 300.0
    detail = (
        f"bump sigma{k} ratios {['%.3e' % v for v in bump]}; "
        f"jump {['%.3e' % v for v in jump]}; contrast {contrast}, "
        f"bump decreasing {bump_decreasing}, jump within 20%: {jump_stable}; {elapsed:.1f}s"
    )
    return _result("compactness-contrast", passed, detail, start)


ALL_CRITERIA = [
    criterion_1_weight_axioms,
    criterion_2_hand_constants,
    criterion_3_limited_range_reduction,
    criterion_4_sparse_domination,
    criterion_5_rdf_weight,
    criterion_6_rescale_identity,
    criterion_7_factorization,
    criterion_8_luxembourg,
    criterion_9_exponent_calculus,
    criterion_10_commutator_rank,
    criterion_11_compactness_contrast,
]


def run_all() -> list[CriterionResult]:
    return [fn() for fn in ALL_CRITERIA]
