"""Exact exponent calculus, iteration weights, reverse Hoelder, and plans."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weightlab.exponents import INF, inv, rational_from_json, rational_json
from weightlab.extrapolation import (
    buckley_bound,
    choose_rs_for_L2,
    limited_range_plan,
    lr_factorization_identity,
    lr_rescale_t,
    lr_theta_p,
    rdf_weight,
    rescaled_exponents,
    reverse_holder_check,
    self_improvement_r0,
    smallest_sufficient_cd,
)
from weightlab.grids import Grid, GridFunction
from weightlab.maximal import maximal
from weightlab.random_functions import random_nonnegative, random_weight
from weightlab.spaces import WeightedLebesgue, space_norm
from weightlab.weights import Weight, power_weight


def test_rescaled_exponents_examples():
    p, e = rescaled_exponents(2, 1, INF)
    assert p == 2 and e == 1
    p, e = rescaled_exponents(2, Fraction(4, 3), 4)
    assert p == 2 and e == 2
    with pytest.raises(ValueError):
        rescaled_exponents(5, 1, 4)


def test_rescaled_exponents_affine_endpoints():
    r, s = Fraction(4, 3), Fraction(6)
    for k in (10, 100, 1000):
        near_r = r + Fraction(1, k)
        u = (inv(near_r) - inv(s)) / (inv(r) - inv(s))
        assert 0 < 1 - u < Fraction(1, k)  # approaches 1 from below
        near_s = s - Fraction(1, k)
        u2 = (inv(near_s) - inv(s)) / (inv(r) - inv(s))
        assert 0 < u2 < Fraction(1, 2 * k) + Fraction(1, 10)


def test_rdf_constant_function_geometric_sum():
    grid = Grid(1, 4)
    ones = GridFunction.constant(grid, 1.0)
    B, K = 2.0, 10
    built = rdf_weight(ones, 1.0, B, K)
    expected = sum((2 * B) ** -k for k in range(K + 1))
    assert np.allclose(built.values.values, expected, rtol=1e-14)
    zero = rdf_weight(GridFunction.constant(grid, 0.0), 2.0, B, K)
    assert np.all(zero.values.values == 0.0)


def test_rdf_pointwise_properties():
    grid = Grid(1, 8)
    rng = np.random.default_rng(41)
    B = buckley_bound(2, 1.0)
    for _ in range(20):
        f = random_nonnegative(grid, rng)
        built = rdf_weight(f, 2.0, B, depth=30)
        assert np.all(built.values.values >= built.seed.values)
        mw = maximal(built.values).values
        assert np.all(mw <= 2 * B * built.values.values + built.tail_bound)
        assert built.tail_bound == np.max(built.seed.values) * 2.0**-30


def test_rdf_norm_ratio_with_oracle():
    grid = Grid(1, 6)
    rng = np.random.default_rng(42)
    space = WeightedLebesgue(Fraction(2), Weight.unit(grid))
    B = buckley_bound(2, 1.0)
    f = random_nonnegative(grid, rng)
    built = rdf_weight(f, 2.0, B, depth=30, space_norm=lambda g: space_norm(space, g))
    assert built.norm_ratio is not None and built.norm_ratio <= 2.0
    flagged = rdf_weight(f, 2.0, 1.0, depth=5, empirical_lower=1.5)
    assert flagged.bound_below_empirical
    with pytest.raises(ValueError):
        rdf_weight(f, 2.0, 0.5, depth=5)


def test_reverse_holder_unit_weight():
    grid = Grid(1, 5)
    result = reverse_holder_check(Weight.unit(grid), 4.0)
    assert result.passed and result.worst_ratio == pytest.approx(1.0, abs=1e-14)


def test_reverse_holder_power_weight_fails_near_singularity():
    grid = Grid(1, 10)
    w = power_weight(grid, 3.0, 0.0)
    result = reverse_holder_check(w, 4.0)
    assert not result.passed
    # the failing cube hugs the singular corner: the origin cell lies inside
    assert result.worst_cube.index[0] == 0
    assert result.worst_ratio > 2.0


def test_smallest_sufficient_cd_on_mild_weight():
    grid = Grid(1, 6)
    w = random_weight(grid, np.random.default_rng(43), sigma=0.4)
    cd, ainf = smallest_sufficient_cd(w)
    assert math.isfinite(cd) and ainf >= 1.0
    rp = cd * ainf
    assert reverse_holder_check(w, rp / (rp - 1.0)).passed


def test_empirical_norm_never_exceeds_buckley():
    from weightlab.extrapolation import maximal_norm_estimate
    from weightlab.maximal import SampleStrategy

    grid = Grid(1, 6)
    rng = np.random.default_rng(45)
    strategy = SampleStrategy(seed=5, random_count=8, adversarial_steps=2)
    for i in range(50):
        w = random_weight(grid, rng, sigma=0.8)
        p = (Fraction(3, 2), Fraction(2), Fraction(4))[i % 3]
        est = maximal_norm_estimate(WeightedLebesgue(p, w), strategy)
        assert est.upper is not None and "buckley" in est.upper_provenance
        assert 1.0 - 1e-12 <= est.lower <= est.upper


def test_buckley_examples():
    assert buckley_bound(2, 1.0) == 16.0
    assert buckley_bound(2, 1.0, dimensional_constant=8.0) == 16.0
    assert buckley_bound(2, 1.5) <= buckley_bound(2, 2.0)
    with pytest.raises(ValueError):
        buckley_bound(1, 1.0)
    with pytest.raises(ValueError):
        buckley_bound(2, 0.5)


def test_self_improvement_examples():
    assert self_improvement_r0(1, 2, 1) == Fraction(2)
    assert self_improvement_r0(1000, 2, 1) == 1 + Fraction(1, 1999)
    r0 = self_improvement_r0(Fraction(7, 2), Fraction(3, 2), 4)
    assert 1 < r0 <= Fraction(3, 2)
    # the defining guarantee: conjugate of r0 dominates 2 c_d B
    conj = r0 / (r0 - 1)
    assert conj >= 2 * 4 * Fraction(7, 2)


def test_choose_rs_examples():
    r, s, theta = choose_rs_for_L2(Fraction(6, 5), 5)
    assert (r, s, theta) == (Fraction(6, 5), Fraction(6), Fraction(1, 3))
    r, s, theta = choose_rs_for_L2(2, 4)
    assert (r, s, theta) == (Fraction(4, 3), Fraction(4), Fraction(1, 2))


@settings(max_examples=200, deadline=None)
@given(st.integers(11, 99), st.integers(11, 99))
def test_choose_rs_always_lands_on_two(a, b):
    r0 = 1 + Fraction(a, 100)
    s0 = r0 + Fraction(b, 50)
    r, s, theta = choose_rs_for_L2(r0, s0)
    assert r <= r0 and s >= s0 and 0 < theta < 1
    assert 1 + s * (1 - 1 / r) == 2


def test_lr_rescale_t_examples():
    assert lr_rescale_t(1, 2, 3, 6) == Fraction(10, 3)
    assert lr_rescale_t(1, 2, 3, INF) == Fraction(3)
    with pytest.raises(ValueError):
        lr_rescale_t(2, 2, 3, 6)


def test_lr_theta_p_examples():
    theta, p = lr_theta_p(1, 2, 3, INF)
    assert theta == Fraction(5, 6) and p == Fraction(5, 2)
    # theta shrinks to 0 as the inner pair approaches the outer pair
    prev = Fraction(1)
    for k in (4, 16, 64):
        theta_k, _ = lr_theta_p(2, 2 + Fraction(1, k), 6 - Fraction(1, k), 6)
        assert theta_k < prev
        prev = theta_k
    assert prev < Fraction(1, 20)


@settings(max_examples=300, deadline=None)
@given(st.sets(st.integers(0, 24), min_size=4, max_size=4))
def test_lr_tuple_properties(quad):
    a, b, c, d = sorted(quad)
    s = INF if a == 0 else Fraction(24, a)
    st_, rt, r = Fraction(24, b), Fraction(24, c), Fraction(24, d)
    t = lr_rescale_t(r, rt, st_, s)
    theta, p = lr_theta_p(r, rt, st_, s)
    assert t >= st_
    assert 0 < theta < 1 and p > 1
    assert t == p / theta  # the Lebesgue leg power matches the concavity order


def test_lr_factorization_identity_random_probes():
    rng = np.random.default_rng(44)
    for _ in range(100):
        a, b, c, d = np.sort(rng.choice(np.arange(0, 25), size=4, replace=False))
        s = INF if a == 0 else Fraction(24, int(a))
        st_, rt, r = Fraction(24, int(b)), Fraction(24, int(c)), Fraction(24, int(d))
        # probe exponent strictly between the inner pair
        q = 2 / (inv(rt) + inv(st_))
        info = lr_factorization_identity(q, r, rt, st_, s)
        assert info["recombined_exponent"] == q
        assert info["recombined_weight_power"] == 1


def test_limited_range_plan_full_range_degeneracy():
    plan = limited_range_plan(1, INF, 1, INF, Fraction(5, 2))
    leg = plan.legs[0]
    assert leg.q == Fraction(5, 3)  # the conjugate exponent
    assert leg.midpoint == Fraction(2)
    assert plan.alpha == 0
    # the tilde machinery reproduces the full-range selection
    r, s, theta = choose_rs_for_L2(Fraction(6, 5), 6)
    theta_lr, p_lr = lr_theta_p(1, r, s, INF)
    assert theta_lr == theta and p_lr == 2


def test_limited_range_plan_midpoint_self_dual():
    plan = limited_range_plan(2, 4, 2, 4, Fraction(8, 3))
    leg = plan.legs[0]
    assert leg.q == Fraction(8, 3) and leg.midpoint == Fraction(8, 3)


def test_limited_range_plan_with_epsilon():
    plan = limited_range_plan(1, INF, 1, INF, 2, epsilon=Fraction(1, 6))
    assert plan.beta == Fraction(3, 2)
    assert plan.gamma == Fraction(1, 2)
    assert plan.identity_checked
    leg = plan.legs[0]
    assert leg.r_tilde == Fraction(6, 5) and leg.s_tilde == Fraction(6)


def test_limited_range_plan_validation():
    with pytest.raises(ValueError, match="offset mismatch"):
        limited_range_plan(2, 4, 3, 5, 3)
    with pytest.raises(ValueError, match="p1"):
        limited_range_plan(2, 4, 2, 4, 8)
    with pytest.raises(ValueError, match="epsilon"):
        limited_range_plan(2, 4, 2, 4, 3, epsilon=Fraction(1, 2))


def test_plan_off_diagonal_offset():
    # alpha = 1/2 - 1/3 = 1/6 on both ends
    plan = limited_range_plan(2, 4, 3, 12, Fraction(3))
    assert plan.alpha == Fraction(1, 6)
    assert plan.legs[1].p == Fraction(6)


def test_plan_serialization_round_trip():
    plan = limited_range_plan(1, INF, 1, INF, 2, epsilon=Fraction(1, 6))
    blob = plan.to_json()
    assert rational_from_json(blob["alpha"]) == 0
    assert rational_from_json(blob["beta"]) == Fraction(3, 2)
    assert rational_from_json(blob["legs"][0]["s"]) == INF
    assert rational_from_json(rational_json(Fraction(10, 3))) == Fraction(10, 3)
