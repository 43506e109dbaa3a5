import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advect_bc_lab.scheme_core import (
    CFLWarning,
    SchemeCoefficients,
    amplification_factor,
    apply_interior,
    apply_stencil,
    build_lax_wendroff,
    build_o3,
    build_upwind,
    check_amplification,
    check_consistency,
)

C = Fraction(5, 6)
BUILDERS = [build_upwind, build_lax_wendroff, build_o3]
CFL_GRID = [0.1 * i for i in range(1, 10)]


def lw_exact(c):
    return (c / 2 + c * c / 2, 1 - c * c, -c / 2 + c * c / 2)


def o3_exact(c):
    return (
        -c * (1 - c * c) / 6,
        c * (1 + c) * (2 - c) / 2,
        (1 - c * c) * (2 - c) / 2,
        -c * (1 - c) * (2 - c) / 6,
    )


def test_lax_wendroff_weights_at_five_sixths():
    expected = (Fraction(55, 72), Fraction(11, 36), Fraction(-5, 72))
    assert lw_exact(C) == expected
    s = build_lax_wendroff(5 / 6)
    assert (s.r, s.p, s.claimed_order) == (1, 1, 2)
    np.testing.assert_allclose(s.weights, [float(x) for x in expected], rtol=1e-15, atol=1e-16)


def test_lax_wendroff_unit_cfl_is_shift():
    assert build_lax_wendroff(1.0).weights == (1.0, 0.0, 0.0)


def test_o3_weights_at_five_sixths():
    expected = (Fraction(-55, 1296), Fraction(385, 432), Fraction(77, 432), Fraction(-35, 1296))
    assert o3_exact(C) == expected
    s = build_o3(5 / 6)
    assert (s.r, s.p, s.claimed_order) == (2, 1, 3)
    np.testing.assert_allclose(s.weights, [float(x) for x in expected], rtol=1e-15, atol=1e-16)


def test_o3_unit_cfl_end_weights_vanish():
    s = build_o3(1.0)
    assert s.weight(1) == 0.0
    assert s.weight(-2) == 0.0
    assert not s.normalized


def test_upwind_weights():
    s = build_upwind(5 / 6)
    assert s.weights == pytest.approx((5 / 6, 1 / 6), abs=1e-16)
    assert build_upwind(1.0).weights == (1.0, 0.0)


@pytest.mark.parametrize("builder", BUILDERS)
@pytest.mark.parametrize("cfl", [5 / 6, 0.3, 0.95])
def test_weights_sum_to_one(builder, cfl):
    assert abs(sum(builder(cfl).weights) - 1.0) <= 1e-14


@pytest.mark.parametrize("builder", BUILDERS)
def test_nonpositive_cfl_rejected(builder):
    with pytest.raises(ValueError):
        builder(0.0)
    with pytest.raises(ValueError):
        builder(-0.5)


def test_cfl_above_one_warns_and_flags():
    with pytest.warns(CFLWarning):
        s = build_lax_wendroff(1.1)
    assert s.cfl_warning
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert not build_lax_wendroff(0.9).cfl_warning


def test_weight_count_validated():
    with pytest.raises(ValueError):
        SchemeCoefficients(r=1, p=1, weights=(0.5, 0.5), cfl=0.5, claimed_order=1)


def test_consistency_orders():
    assert check_consistency(build_lax_wendroff(5 / 6), 4).achieved_order == 2
    assert check_consistency(build_o3(5 / 6), 5).achieved_order == 3
    assert check_consistency(build_upwind(0.5), 3).achieved_order == 1


def test_lax_wendroff_third_moment_residual():
    # sum l^3 a_l = a_1 - a_{-1} = -5/6, against (-5/6)^3
    a = lw_exact(C)
    third = a[2] - a[0]
    assert third == Fraction(-5, 6)
    expected = abs(third - (-C) ** 3)
    assert expected == Fraction(55, 216)
    report = check_consistency(build_lax_wendroff(5 / 6), 3)
    assert report.residuals[3] == pytest.approx(float(expected), rel=1e-13)


def test_upwind_second_moment_fails():
    report = check_consistency(build_upwind(0.5), 2)
    # sum l^2 a_l = 0.5 versus 0.25
    assert report.residuals[2] == pytest.approx(0.25, abs=1e-15)
    assert report.achieved_order == 1


@pytest.mark.parametrize("builder", BUILDERS)
@pytest.mark.parametrize("cfl", CFL_GRID)
def test_achieved_order_matches_claim(builder, cfl):
    s = builder(cfl)
    assert check_consistency(s, s.claimed_order + 2, tol=1e-12).achieved_order == s.claimed_order


def _lw_modulus(c, theta):
    return np.sqrt(1 - 4 * c**2 * (1 - c**2) * np.sin(theta / 2) ** 4)


def test_lw_amplification_closed_form():
    s = build_lax_wendroff(5 / 6)
    theta = np.linspace(0, 2 * np.pi, 257)
    np.testing.assert_allclose(np.abs(amplification_factor(s, theta)), _lw_modulus(5 / 6, theta), atol=1e-14)
    rep = check_amplification(s)
    assert rep.satisfied
    assert rep.sup_modulus == pytest.approx(1.0, abs=1e-14)


def test_lw_unit_cfl_modulus_constant():
    s = build_lax_wendroff(1.0)
    theta = np.linspace(0, 2 * np.pi, 101)
    np.testing.assert_allclose(np.abs(amplification_factor(s, theta)), 1.0, atol=1e-15)


def test_lw_unstable_cfl():
    with pytest.warns(CFLWarning):
        s = build_lax_wendroff(1.1)
    rep = check_amplification(s)
    assert not rep.satisfied
    assert rep.sup_modulus == pytest.approx(math.sqrt(1 + 4 * 1.21 * 0.21), rel=1e-12)
    assert rep.argmax_theta == pytest.approx(math.pi, abs=1e-6)


@pytest.mark.parametrize("builder", BUILDERS)
def test_amplification_at_zero_is_weight_sum(builder):
    s = builder(0.4)
    assert complex(amplification_factor(s, 0.0)) == pytest.approx(sum(s.weights), abs=1e-15)
    assert check_amplification(s, samples=64).sup_modulus >= abs(sum(s.weights)) - 1e-15


def test_amplification_sample_floor():
    with pytest.raises(ValueError):
        check_amplification(build_upwind(0.5), samples=10)


def test_apply_interior_constant_window():
    s = build_o3(0.7)
    assert apply_interior(s, [3.25] * 4) == pytest.approx(3.25, rel=1e-15)


def test_apply_interior_geometric_fixed_point():
    # powers of kappa = -11 around j = 0: (kappa^-1, kappa^0, kappa^1)
    s = build_lax_wendroff(5 / 6)
    a = lw_exact(C)
    assert a[0] * Fraction(-1, 11) + a[1] + a[2] * (-11) == 1
    assert apply_interior(s, [-1 / 11, 1.0, -11.0]) == pytest.approx(1.0, abs=1e-14)


def test_apply_interior_length_checked():
    with pytest.raises(ValueError):
        apply_interior(build_lax_wendroff(0.5), [1.0, 2.0])


@pytest.mark.parametrize("builder", BUILDERS)
@pytest.mark.parametrize("cfl", [0.25, 5 / 6])
def test_polynomial_exactness(builder, cfl):
    s = builder(cfl)
    for m in range(s.claimed_order + 1):
        for j in range(-5, 6):
            window = [float(i) ** m for i in range(j - s.r, j + s.p + 1)]
            expected = (j - cfl) ** m
            got = apply_interior(s, window)
            assert got == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_apply_stencil_matches_pointwise():
    s = build_o3(0.6)
    rng = np.random.default_rng(3)
    values = rng.normal(size=20)
    swept = apply_stencil(s, values)
    pointwise = [apply_interior(s, values[i : i + 4]) for i in range(17)]
    np.testing.assert_allclose(swept, pointwise, rtol=1e-14, atol=1e-15)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(
    w1=st.lists(finite, min_size=4, max_size=4),
    w2=st.lists(finite, min_size=4, max_size=4),
    alpha=finite,
    beta=finite,
)
def test_apply_interior_linear(w1, w2, alpha, beta):
    s = build_o3(5 / 6)
    combo = [alpha * x + beta * y for x, y in zip(w1, w2)]
    lhs = apply_interior(s, combo)
    rhs = alpha * apply_interior(s, w1) + beta * apply_interior(s, w2)
    scale = 1 + sum(abs(alpha * x) + abs(beta * y) for x, y in zip(w1, w2))
    assert abs(lhs - rhs) <= 1e-13 * scale
