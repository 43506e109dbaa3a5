import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from advect_bc_lab.boundary import (
    InflowSpec,
    OutflowSpec,
    backward_difference,
    check_compatibility,
    fill_inflow_ghosts,
    fill_outflow_ghosts,
    ilw_alpha,
)
from advect_bc_lab.oracles import OracleError, make_oracle, polynomial


# -- oracles ---------------------------------------------------------------

@pytest.mark.parametrize("name", ["sin", "cos", "neg_sin", "poly:[1, -2, 0.5, 3]", "const:2.5"])
def test_oracle_derivatives_match_finite_differences(name):
    f = make_oracle(name, scale=1.5, shift=0.3)
    x, h = 0.7, 1e-5
    for k in range(4):
        fd = (f.derivative_at(k, x + h) - f.derivative_at(k, x - h)) / (2 * h)
        assert fd == pytest.approx(f.derivative_at(k + 1, x), abs=1e-8)
    assert f.derivative_at(0, x) == f.value_at(x)


@pytest.mark.parametrize("name", ["sin", "cos", "neg_sin", "poly:[1, -2, 0.5]", "const:-4"])
def test_oracle_antiderivative_by_quadrature(name):
    f = make_oracle(name, scale=-0.5, shift=1.0)
    lo, hi = -0.4, 1.3
    ref = quad(f.value_at, lo, hi, epsabs=1e-14)[0]
    assert f.antiderivative_at(hi) - f.antiderivative_at(lo) == pytest.approx(ref, abs=1e-13)


def test_oracle_arrays():
    f = make_oracle("poly:[0, 0, 1]")
    np.testing.assert_allclose(f.value_at(np.array([1.0, 2.0])), [1.0, 4.0])
    c = make_oracle("const:3")
    assert c.value_at(np.zeros(3)).shape == (3,)
    assert c.derivative_at(1, 2.0) == 0.0


def test_oracle_errors():
    for bad in ["sinn", "poly:[1,", "poly:[]", "const:x", ""]:
        with pytest.raises(OracleError):
            make_oracle(bad)
    f = make_oracle("sin")
    with pytest.raises(OracleError):
        f.derivative_at(f.max_derivative_order + 1, 0.0)


def test_stretched_gives_compatible_boundary_datum():
    f = make_oracle("sin")
    g = f.stretched(-1.0)
    t = np.linspace(0, 3, 7)
    np.testing.assert_allclose(g.value_at(t), -np.sin(t), atol=1e-15)
    np.testing.assert_allclose(g.derivative_at(1, t), -np.cos(t), atol=1e-15)
    assert g.antiderivative_at(1.0) - g.antiderivative_at(0.0) == pytest.approx(math.cos(1.0) - 1.0)


# -- ilw weights -----------------------------------------------------------

def test_alpha_examples():
    for ell in range(-4, 1):
        assert ilw_alpha("cell_average", 0, ell) == 1
    assert ilw_alpha("cell_average", 1, 0) == pytest.approx(0.5)
    assert ilw_alpha("cell_average", 2, 0) == pytest.approx(1 / 3)
    assert ilw_alpha("cell_center", 1, 0) == pytest.approx(0.5)
    assert ilw_alpha("cell_center", 1, -1) == pytest.approx(1.5)


@pytest.mark.parametrize("kappa", range(5))
@pytest.mark.parametrize("ell", range(-3, 1))
def test_alpha_cell_average_by_quadrature(kappa, ell):
    # mean over cell ell (unit width) of (-y)^kappa
    ref = quad(lambda y: (-y) ** kappa, ell - 1, ell)[0]
    assert ilw_alpha("cell_average", kappa, ell) == pytest.approx(ref, rel=1e-13, abs=1e-14)


# -- inflow ghosts ---------------------------------------------------------

def _spec(g, K, family="cell_average", a=1.0):
    return InflowSpec(family=family, truncation=K, datum=g, velocity=a)


def test_inflow_lw_formula():
    g = make_oracle("neg_sin")
    t, dx = 0.9, 0.01
    (u0,) = fill_inflow_ghosts(_spec(g, 1), t, dx, 1)
    assert u0 == pytest.approx(-math.sin(t) - dx / 2 * math.cos(t), abs=1e-15)


def test_inflow_o3_formulas():
    g = make_oracle("neg_sin")
    t, dx = 2.3, 0.02
    um1, u0 = fill_inflow_ghosts(_spec(g, 2), t, dx, 2)
    s, c = math.sin(t), math.cos(t)
    assert u0 == pytest.approx(-s - dx / 2 * c + dx**2 / 6 * s, abs=1e-15)
    assert um1 == pytest.approx(-s - 3 * dx / 2 * c + 7 * dx**2 / 6 * s, abs=1e-15)


def test_inflow_constant():
    g = make_oracle("const:1.75")
    for K in range(4):
        np.testing.assert_allclose(fill_inflow_ghosts(_spec(g, K), 0.3, 0.1, 3), 1.75, rtol=1e-15)


def test_inflow_truncation_limited_by_oracle():
    g = make_oracle("sin")
    with pytest.raises(ValueError):
        _spec(g, g.max_derivative_order + 1)


@pytest.mark.parametrize("K", range(4))
@pytest.mark.parametrize("a", [1.0, 2.5])
def test_inflow_equals_taylor_cell_average(K, a):
    g = make_oracle("sin", scale=0.7, shift=-0.2)
    t, dx, r = 1.1, 0.3, 3
    ghosts = fill_inflow_ghosts(_spec(g, K, a=a), t, dx, r)
    derivs = [g.derivative_at(k, t) for k in range(K + 1)]

    def taylor(x):
        s = -x / a
        return sum(d * s**k / math.factorial(k) for k, d in enumerate(derivs))

    for i, ell in enumerate(range(1 - r, 1)):
        ref = quad(taylor, (ell - 1) * dx, ell * dx)[0] / dx
        assert ghosts[i] == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_inflow_converges_to_datum():
    g = make_oracle("cos")
    t = 0.4
    for dx in [1e-2, 1e-4, 1e-6]:
        ghosts = fill_inflow_ghosts(_spec(g, 2), t, dx, 2)
        assert np.max(np.abs(ghosts - math.cos(t))) <= 3 * dx


def test_cell_center_family_is_midpoint_taylor():
    g = make_oracle("sin")
    t, dx, a, K = 0.6, 0.05, 1.0, 3
    ghosts = fill_inflow_ghosts(_spec(g, K, family="cell_center", a=a), t, dx, 2)
    for i, ell in enumerate([-1, 0]):
        xm = (ell - 0.5) * dx
        ref = sum(g.derivative_at(k, t) * (-xm / a) ** k / math.factorial(k) for k in range(K + 1))
        assert ghosts[i] == pytest.approx(ref, abs=1e-15)


# -- outflow ghosts --------------------------------------------------------

def test_outflow_examples():
    assert fill_outflow_ghosts(OutflowSpec(2), [1.0, 3.0], 1)[0] == 5.0
    assert fill_outflow_ghosts(OutflowSpec(1), [7.0, 3.0], 1)[0] == 3.0
    assert fill_outflow_ghosts(OutflowSpec(3), [0.0, 0.0, 1.0], 1)[0] == 3.0
    np.testing.assert_array_equal(fill_outflow_ghosts(OutflowSpec(0), [4.0], 2), [0.0, 0.0])


def test_outflow_tail_length_checked():
    with pytest.raises(ValueError):
        fill_outflow_ghosts(OutflowSpec(3), [1.0, 2.0], 1)


@settings(max_examples=60, deadline=None)
@given(
    k_b=st.integers(1, 5),
    p=st.integers(1, 4),
    tail=st.lists(st.floats(-100, 100, allow_nan=False), min_size=5, max_size=8),
)
def test_outflow_difference_vanishes(k_b, p, tail):
    ghosts = fill_outflow_ghosts(OutflowSpec(k_b), tail, p)
    full = np.concatenate([tail, ghosts])
    d = backward_difference(full, k_b)[-p:]
    scale = max(1.0, max(abs(x) for x in tail))
    assert np.max(np.abs(d)) <= 1e-13 * scale * 2**k_b * 10 ** min(p, 3)


@settings(max_examples=60, deadline=None)
@given(
    k_b=st.integers(1, 5),
    p=st.integers(1, 3),
    coeffs=st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=5),
)
def test_outflow_exact_on_polynomials(k_b, p, coeffs):
    coeffs = coeffs[:k_b]  # degree < k_b
    q = np.polynomial.Polynomial(coeffs)
    j = np.arange(-k_b + 1, 1)
    ghosts = fill_outflow_ghosts(OutflowSpec(k_b), q(j), p)
    expected = q(np.arange(1, p + 1))
    scale = 1 + np.sum(np.abs(coeffs)) * (k_b + p) ** len(coeffs)
    np.testing.assert_allclose(ghosts, expected, atol=1e-11 * scale)


# -- compatibility ---------------------------------------------------------

def test_compatibility_sine_pair():
    assert check_compatibility(make_oracle("sin"), make_oracle("neg_sin"), 1.0, 3) == 3


def test_compatibility_fails_at_zero_order():
    assert check_compatibility(make_oracle("const:1"), make_oracle("const:0"), 1.0, 3) == -1


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_compatibility_linear_pair(a):
    f = polynomial([0.0, 1.0])
    g = polynomial([0.0, -a])
    assert check_compatibility(f, g, a, 6) == 6


def test_compatibility_partial():
    # f = x + x^2 against g from f(-t) only matches to first order with a = 1
    f = polynomial([0.0, 1.0, 1.0])
    g = polynomial([0.0, -1.0, 0.0])
    assert check_compatibility(f, g, 1.0, 4) == 1
