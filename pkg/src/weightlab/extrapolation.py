"""Exact exponent calculus for rescaling and limited-range extrapolation,
the Rubio de Francia weight iteration, and reverse-Hoelder verification.

Every exponent computation here runs in exact rational arithmetic with a
symbolic infinity (see :mod:`weightlab.exponents`): the rescaling formulas
nest several reciprocal levels deep and floating error would mask the exact
identities the tests assert. Replaying any plan is therefore bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exponents import (
    Exponent,
    as_exponent,
    conjugate,
    from_inv,
    inv,
    is_inf,
    rational_json,
    to_float,
)
from .grids import GridFunction
from .maximal import maximal
from .weights import Weight, ainf_constant

__all__ = [
    "rescaled_exponents",
    "RdFWeight",
    "rdf_weight",
    "reverse_holder_check",
    "ReverseHolderResult",
    "smallest_sufficient_cd",
    "buckley_bound",
    "maximal_norm_estimate",
    "self_improvement_r0",
    "choose_rs_for_L2",
    "lr_rescale_t",
    "lr_theta_p",
    "lr_factorization_identity",
    "ExtrapolationPlan",
    "PlanLeg",
    "limited_range_plan",
    "default_cd",
]

#: default dimensional constants for the sharp reverse-Hoelder exponent; the
#: literature does not pin a value, so these are config defaults and
#: :func:`smallest_sufficient_cd` reports what a given weight actually needs.
DEFAULT_CD = {1: 4.0, 2: 16.0}


def default_cd(dimension: int) -> float:
    return DEFAULT_CD[dimension]


def rescaled_exponents(p: Exponent, r: Exponent, s: Exponent) -> tuple[Fraction | float, Fraction]:
    """Exponent and weight power of the (r, s)-rescaled weighted space.

    1/p_new = (1/p - 1/s)/(1/r - 1/s) maps the reciprocal interval
    (1/s, 1/r) affinely onto (0, 1); the weight power is 1/(1/r - 1/s).
    """
    p, r, s = as_exponent(p), as_exponent(r), as_exponent(s)
    ip, ir, is_ = inv(p), inv(r), inv(s)
    if not (is_ < ip < ir):
        raise ValueError(f"need r < p < s, got r={r}, p={p}, s={s}")
    if ir > 1:
        raise ValueError("r must be at least 1")
    u = (ip - is_) / (ir - is_)
    return from_inv(u), 1 / (ir - is_)


# ---------------------------------------------------------------------------
# Rubio de Francia iteration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RdFWeight:
    """Truncated iteration weight: sum of M^k(|f|^(1/r)) / (2B)^k, k = 0..K.

    Pointwise w >= |f|^(1/r) (the k=0 term; the remaining terms are
    nonnegative, and adding nonnegative floats never decreases the partial
    sum). ``tail_bound`` = max(|f|^(1/r)) * 2^-K controls the leftover in
    the pointwise bound M w <= 2 B w + tail.
    """

    values: GridFunction
    seed: GridFunction  # |f|^(1/r)
    r: float
    bound: float
    depth: int
    tail_bound: float
    norm_ratio: float | None = None  # norm(w) / norm(f)^{1/r} when an oracle was given
    bound_below_empirical: bool = False

    def as_weight(self) -> Weight:
        return Weight(self.values.grid, self.values.values)


def rdf_weight(
    f: GridFunction,
    r: float,
    bound: float,
    depth: int = 40,
    space_norm=None,
    empirical_lower: float | None = None,
) -> RdFWeight:
    """Build the iteration weight for f with operator-norm bound B and K terms.

    ``bound`` must be a genuine upper bound for the maximal operator norm on
    the intended space for the full chain of properties to hold; if an
    ``empirical_lower`` bound larger than ``bound`` is supplied, the result
    is flagged rather than rejected. With ``space_norm`` given, the ratio
    norm(w)/norm(|f|^(1/r)) is recorded (the construction keeps it <= 2
    whenever ``bound`` really dominates the operator norm).
    """
    if bound < 1.0:
        raise ValueError(f"the maximal operator has norm >= 1, got bound {bound}")
    if depth < 1:
        raise ValueError("need at least one iteration")
    if r <= 0:
        raise ValueError("r must be positive")
    grid = f.grid
    seed_vals = np.abs(f.values) ** (1.0 / r)
    seed = GridFunction(grid, seed_vals, nonnegative=True)
    total = seed_vals.copy()
    g = seed_vals
    coeff = 1.0
    for _ in range(depth):
        g = maximal(GridFunction(grid, g, nonnegative=True)).values
        coeff /= 2.0 * bound
        total = total + coeff * g
    w = GridFunction(grid, total, nonnegative=True)
    tail = float(np.max(seed_vals)) * 2.0**-depth
    ratio = None
    if space_norm is not None:
        denom = space_norm(seed)
        ratio = space_norm(w) / denom if denom > 0 else None
    flagged = empirical_lower is not None and bound < empirical_lower
    return RdFWeight(
        values=w,
        seed=seed,
        r=float(r),
        bound=float(bound),
        depth=depth,
        tail_bound=tail,
        norm_ratio=ratio,
        bound_below_empirical=flagged,
    )


# ---------------------------------------------------------------------------
# reverse Hoelder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReverseHolderResult:
    passed: bool
    worst_cube: object
    worst_ratio: float
    r: float


def reverse_holder_check(
    w: Weight, r: float, lattice: str = "dyadic"
) -> ReverseHolderResult:
    """Exhaustively check <w>_{r,Q} <= 2 <w>_{1,Q} over all lattice cubes."""
    if r <= 1.0:
        raise ValueError("reverse Hoelder order must exceed 1")
    from .weights import _lattice_supremum

    wn, _ = w.scale_normalized()
    factors = [(wn.values**r, 1.0 / r), (wn.values, -1.0)]
    ratio, cube = _lattice_supremum(w.grid, factors, lattice)
    return ReverseHolderResult(passed=ratio <= 2.0, worst_cube=cube, worst_ratio=ratio, r=r)


def smallest_sufficient_cd(
    w: Weight,
    lattice: str = "dyadic",
    resolution: float = 1e-3,
    c_max: float = 1024.0,
) -> tuple[float, float]:
    """Smallest c >= 1 for which the order r with r' = c * A_inf(w) passes.

    Returns (c, A_inf(w)). Raising c shrinks r toward 1, which lowers every
    r-average, so the pass predicate is monotone and bisection applies.
    """
    ainf, _ = ainf_constant(w)

    def passes(c: float) -> bool:
        rp = c * ainf
        if rp <= 1.0:
            return False
        r = rp / (rp - 1.0)
        return reverse_holder_check(w, r, lattice).passed

    lo, hi = 1.0, 1.0
    while not passes(hi):
        hi *= 2.0
        if hi > c_max:
            return math.inf, ainf
    if passes(lo):
        return lo, ainf
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return hi, ainf


def maximal_norm_estimate(space, strategy=None, lattice: str = "dyadic"):
    """Empirical lower bound for the maximal operator norm on a space.

    For the weighted Lebesgue kind a theoretical upper bound is attached
    automatically (the classical bound from the weight constant); sampling
    alone never produces an upper bound, so other kinds carry none.
    """
    from .maximal import SampleStrategy, maximal, operator_norm_lower_bound
    from .spaces import space_norm
    from .weights import ap_constant

    upper = provenance = None
    if getattr(space, "kind", None) == "weighted" and not is_inf(space.p) and space.p > 1:
        ap, _ = ap_constant(space.weight, space.p, lattice)
        upper = buckley_bound(space.p, ap)
        provenance = f"buckley bound at p={space.p}, [w]_p={ap:.6g}"
    return operator_norm_lower_bound(
        lambda f: maximal(f, lattice),
        lambda f: space_norm(space, f),
        space.grid,
        strategy or SampleStrategy(),
        upper=upper,
        upper_provenance=provenance,
    )


def buckley_bound(p: Exponent, ap: float, dimensional_constant: float = 8.0) -> float:
    """Upper bound C_d * p' * ap^(p') for the maximal operator norm.

    The default C_d = 8 (one dimension) is deliberately generous, not sharp.
    """
    p = as_exponent(p)
    if is_inf(p) or p <= 1:
        raise ValueError("need 1 < p < inf")
    if ap < 1.0:
        raise ValueError("weight constants are never below 1")
    pc = to_float(conjugate(p))
    return dimensional_constant * pc * ap**pc


# ---------------------------------------------------------------------------
# self-improvement exponent selection
# ---------------------------------------------------------------------------


def self_improvement_r0(bound: Exponent, r_star: Exponent, c_d: Exponent) -> Fraction:
    """Largest r0 in (1, r*] with r0' >= 2 c_d B, as an exact rational.

    r0 = min(r*, 1 + 1/(2 c_d B - 1)); large bounds push r0 toward 1.
    """
    B, r_star, c_d = as_exponent(bound), as_exponent(r_star), as_exponent(c_d)
    if B < 1 or c_d < 1:
        raise ValueError("need B >= 1 and c_d >= 1")
    if r_star <= 1:
        raise ValueError("need r* > 1")
    candidate = 1 + 1 / (2 * c_d * B - 1)
    return min(r_star, candidate)


def choose_rs_for_L2(r0: Exponent, s0: Exponent) -> tuple[Fraction, Fraction, Fraction]:
    """Pick (r, s) with r <= r0, s >= s0, s = r', so the factorization's
    Lebesgue leg lands exactly on exponent 2; returns (r, s, theta).

    1/r = max(1/r0, 1 - 1/s0) and theta = 1 - (1/r - 1/s) = 2/r'.
    """
    r0, s0 = as_exponent(r0), as_exponent(s0)
    if r0 <= 1 or is_inf(s0):
        raise ValueError("need r0 > 1 and s0 < inf")
    ir = max(inv(r0), 1 - inv(s0))
    r = 1 / ir
    s = conjugate(r)
    theta = 1 - (inv(r) - inv(s))
    if not (1 < r <= r0 and s >= s0 and 0 < theta < 1):
        raise AssertionError(f"exponent selection failed: r={r}, s={s}, theta={theta}")
    lebesgue_p = 1 + s * (1 - inv(r))  # = 1 + s/r'
    assert lebesgue_p == 2
    return r, s, theta


# ---------------------------------------------------------------------------
# limited-range exponent relations
# ---------------------------------------------------------------------------


def _check_lr_ordering(r, rt, st, s) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    ir, irt, ist, is_ = inv(r), inv(rt), inv(st), inv(s)
    if not (is_ < ist < irt < ir <= 1):
        raise ValueError(f"need 1 <= r < r~ < s~ < s <= inf, got {r}, {rt}, {st}, {s}")
    return ir, irt, ist, is_


def lr_rescale_t(r: Exponent, rt: Exponent, st: Exponent, s: Exponent) -> Fraction:
    """Concavity order t for the inner rescaled space of the limited-range
    factorization: 1/t = (1/r * 1/s~ - 1/r~ * 1/s)/(1/r - 1/s); t >= s~."""
    r, rt, st, s = map(as_exponent, (r, rt, st, s))
    ir, irt, ist, is_ = _check_lr_ordering(r, rt, st, s)
    it = (ir * ist - irt * is_) / (ir - is_)
    t = 1 / it
    assert t >= st, f"derived t = {t} below s~ = {st}"
    return t


def lr_theta_p(
    r: Exponent, rt: Exponent, st: Exponent, s: Exponent
) -> tuple[Fraction, Fraction]:
    """Interpolation parameter and Lebesgue exponent of the limited-range
    factorization: X splits into the 1/r-power of its (r~, t)-rescaling and
    an unweighted Lebesgue leg with these (theta, p)."""
    r, rt, st, s = map(as_exponent, (r, rt, st, s))
    ir, irt, ist, is_ = _check_lr_ordering(r, rt, st, s)
    theta = 1 - (irt - ist) / (ir - is_)
    p = (ist - is_ + ir - irt) / (ir * (ist - is_) + (ir - irt) * is_)
    if not (0 < theta < 1):
        raise AssertionError(f"theta = {theta} outside (0,1)")
    if not (1 < p):
        raise AssertionError(f"p = {p} not above 1")
    return theta, p


def lr_factorization_identity(
    q: Exponent, r: Exponent, rt: Exponent, st: Exponent, s: Exponent
) -> dict:
    """Exponent-level check that the limited-range factorization recombines
    to the original space, for a weighted Lebesgue probe with exponent q.

    Works entirely on (exponent, weight power) pairs: the probe space has
    weight power 1, the rescaled-leg weight power follows the closed form,
    the Lebesgue leg carries power 0, and the product must return exponent q
    with weight power exactly 1. Returns the assembled exponents.
    """
    q, r, rt, st, s = map(as_exponent, (q, r, rt, st, s))
    if not (inv(st) <= inv(q) <= inv(rt)):
        raise ValueError(f"probe exponent q = {q} outside [r~, s~]")
    t = lr_rescale_t(r, rt, st, s)
    theta, p = lr_theta_p(r, rt, st, s)
    # inner rescaled space: exponent q1, weight power e1
    u1 = (inv(q) - inv(t)) / (inv(rt) - inv(t))
    e1 = 1 / (inv(rt) - inv(t))
    # 1/r-concavification multiplies both reciprocal exponent and power by 1/r
    u_leg = u1 * inv(r)
    e_leg = e1 * inv(r)
    # product with the unweighted Lebesgue leg
    u_back = (1 - theta) * u_leg + theta * inv(p)
    e_back = (1 - theta) * e_leg
    ok = u_back == inv(q) and e_back == 1
    if not ok:
        raise AssertionError(
            f"factorization failed to recombine: exponent 1/{from_inv(u_back)}, weight power {e_back}"
        )
    return {
        "t": t,
        "theta": theta,
        "p": p,
        "inner_exponent": from_inv(u1),
        "inner_weight_power": e1,
        "recombined_exponent": from_inv(u_back),
        "recombined_weight_power": e_back,
    }


# ---------------------------------------------------------------------------
# limited-range, off-diagonal plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanLeg:
    """Per-leg exponent data of a limited-range plan (j = 1, 2)."""

    r: Fraction | float
    s: Fraction | float
    p: Fraction | float
    q: Fraction | float  # dual exponent 1/q = 1/s + 1/r - 1/p
    midpoint: Fraction  # 1/midpoint = (1/r + 1/s)/2
    r_tilde: Fraction | None = None
    s_tilde: Fraction | None = None
    t: Fraction | None = None

    def to_json(self) -> dict:
        out = {
            "r": rational_json(self.r),
            "s": rational_json(self.s),
            "p": rational_json(self.p),
            "q": rational_json(self.q),
            "midpoint": rational_json(self.midpoint),
        }
        if self.r_tilde is not None:
            out["r_tilde"] = rational_json(self.r_tilde)
            out["s_tilde"] = rational_json(self.s_tilde)
            out["t"] = rational_json(self.t)
        return out


@dataclass(frozen=True)
class ExtrapolationPlan:
    """All exponents of a limited-range, off-diagonal extrapolation run.

    Exact rationals throughout; beta exceeds 1 under the standing orderings
    and the accompanying product identity therefore carries a negative
    power. It is recorded and verified at exponent level only; norm-level
    meaning of the negative-power product is tracked as unresolved.
    """

    alpha: Fraction
    legs: tuple[PlanLeg, PlanLeg]
    theta: Fraction | None = None
    beta: Fraction | None = None
    gamma: Fraction | None = None
    epsilon: Fraction | None = None
    identity_checked: bool = False

    def to_json(self) -> dict:
        out = {
            "alpha": rational_json(self.alpha),
            "legs": [leg.to_json() for leg in self.legs],
            "identity_checked": self.identity_checked,
        }
        for name in ("theta", "beta", "gamma", "epsilon"):
            value = getattr(self, name)
            if value is not None:
                out[name] = rational_json(value)
        return out


def limited_range_plan(
    r1: Exponent,
    s1: Exponent,
    r2: Exponent,
    s2: Exponent,
    p1: Exponent,
    epsilon: Exponent | None = None,
) -> ExtrapolationPlan:
    """Assemble the exponent plan for a limited-range, off-diagonal run.

    Validates the offset condition 1/r1 - 1/r2 = 1/s1 - 1/s2 = alpha and
    membership of (p1, p2) in the admissible rectangle, then computes the
    dual-leg exponents, the midpoint reduction targets, and, when an
    ``epsilon`` margin is supplied, the tilde exponents with their t, theta,
    beta, gamma and the exponent-level recombination identity on both legs.
    """
    r1, s1, r2, s2, p1 = map(as_exponent, (r1, s1, r2, s2, p1))
    ir1, is1, ir2, is2 = inv(r1), inv(s1), inv(r2), inv(s2)
    if not (is1 < ir1 <= 1 and is2 < ir2 <= 1):
        raise ValueError("need 1 <= r_j < s_j <= inf on both legs")
    alpha = ir1 - ir2
    if is1 - is2 != alpha:
        raise ValueError(
            f"offset mismatch: 1/r1 - 1/r2 = {ir1 - ir2} but 1/s1 - 1/s2 = {is1 - is2}"
        )
    ip1 = inv(p1)
    ip2 = ip1 - alpha
    if not (is1 <= ip1 <= ir1):
        raise ValueError(f"p1 = {p1} violates 1/p1 in [1/s1, 1/r1]")
    if not (is2 <= ip2 <= ir2):
        raise ValueError(f"p2 = {from_inv(ip2)} violates 1/p2 in [1/s2, 1/r2]")

    def make_leg(ir, is_, ip, eps) -> PlanLeg:
        iq = is_ + ir - ip
        mid = (ir + is_) / 2
        leg = {
            "r": from_inv(ir),
            "s": from_inv(is_),
            "p": from_inv(ip),
            "q": from_inv(iq),
            "midpoint": 1 / mid,
        }
        if eps is not None:
            irt, ist = ir - eps, is_ + eps
            if not (is_ < ist < irt < ir):
                raise ValueError(f"epsilon = {eps} too large for leg ({from_inv(ir)}, {from_inv(is_)})")
            leg.update(
                r_tilde=1 / irt,
                s_tilde=1 / ist,
                t=lr_rescale_t(from_inv(ir), 1 / irt, 1 / ist, from_inv(is_)),
            )
        return PlanLeg(**leg)

    eps = as_exponent(epsilon) if epsilon is not None else None
    legs = (make_leg(ir1, is1, ip1, eps), make_leg(ir2, is2, ip2, eps))

    theta = beta = gamma = None
    identity_checked = False
    if eps is not None:
        irt1, ist1 = ir1 - eps, is1 + eps
        theta1, _ = lr_theta_p(r1, 1 / irt1, 1 / ist1, s1)
        theta2, _ = lr_theta_p(r2, 1 / (ir2 - eps), 1 / (is2 + eps), s2)
        assert theta1 == theta2, "interpolation parameter must agree across legs"
        theta = theta1
        beta = (ir1 - is1) / (irt1 - ist1)
        gamma = (irt1 - ir1) / ((irt1 - ir1) + (is1 - ist1))
        _verify_extended_product(ir1, is1, irt1, ist1, ip1, beta, gamma)
        _verify_extended_product(ir2, is2, ir2 - eps, is2 + eps, ip2, beta, gamma)
        mid_q1 = lr_factorization_identity(
            from_inv((ir1 + is1) / 2), r1, 1 / irt1, 1 / ist1, s1
        )
        identity_checked = mid_q1["recombined_weight_power"] == 1
    return ExtrapolationPlan(
        alpha=alpha,
        legs=legs,
        theta=theta,
        beta=beta,
        gamma=gamma,
        epsilon=eps,
        identity_checked=identity_checked,
    )


def _verify_extended_product(ir, is_, irt, ist, ip, beta, gamma) -> None:
    """Exponent-level identity: the (r~, s~)-rescaled space equals the formal
    product of the (r, s)-rescaled space to the power beta with a Lebesgue
    factor to the power 1 - beta (negative under the standing orderings).

    Checked on the reciprocal-exponent and weight-power scale, where the
    formal product rule is linear and exact regardless of sign.
    """
    # rescaled exponents of a probe with reciprocal exponent ip, weight power 1
    u_rs = (ip - is_) / (ir - is_)
    e_rs = 1 / (ir - is_)
    u_tilde = (ip - ist) / (irt - ist)
    e_tilde = 1 / (irt - ist)
    u_formal = beta * u_rs + (1 - beta) * (1 - gamma)
    e_formal = beta * e_rs
    if u_formal != u_tilde or e_formal != e_tilde:
        raise AssertionError(
            "extended-exponent product identity failed: "
            f"exponent {u_formal} vs {u_tilde}, power {e_formal} vs {e_tilde}"
        )
