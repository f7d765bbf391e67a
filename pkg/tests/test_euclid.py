import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpsob.euclid import (Dimensions, bubble_kernel_products, bubble_profile, dilation_profile, euclid_norms,
                             kernel_gram, pde_residuals, sharp_constant, supported_dimensions)
from sharpsob.quadrature import gauss_legendre, half_line_rule, panel_rule, sphere_area, sphere_rule

PAIRS = [(d.n, d.k) for d in supported_dimensions()]


def closed_form_K0(n, k):
    """Independent value of the sharp constant for ‖u‖_{2♯} ≤ K ‖Δ^{k/2}u‖_2."""
    with mp.workdps(30):
        prod = mp.mpf(1)
        for l in range(-k, k):
            prod *= n + 2 * l
        val = (mp.gamma(n) / mp.gamma(mp.mpf(n) / 2)) ** (mp.mpf(k) / n) / mp.sqrt(mp.pi ** k * prod)
        return float(val)


@pytest.mark.parametrize("n,k", PAIRS)
def test_sharp_constant_matches_closed_form(n, k):
    assert math.isclose(sharp_constant(Dimensions(n, k)), closed_form_K0(n, k), rel_tol=1e-9)


def test_rho_three_one():
    assert math.isclose(Dimensions(3, 1).rho, 1.0 / 3.0, rel_tol=1e-15)
    assert Dimensions(5, 2).two_sharp == 10.0


def test_dimensions_need_n_above_2k():
    with pytest.raises(ValueError):
        Dimensions(4, 2)


@pytest.mark.parametrize("n,k", [(3, 1), (5, 2), (7, 3)])
def test_bubble_pde_by_finite_differences(n, k):
    """Δ^k B = B^{2♯-1} checked with high-precision numerical differentiation."""
    d = Dimensions(n, k)
    rho, s = mp.mpf(d.rho), mp.mpf(d.decay)
    with mp.workdps(40):
        def lap(f):
            return lambda r: -mp.diff(f, r, 2) - (n - 1) / r * mp.diff(f, r)
        f = lambda r: (1 + rho * r * r) ** (-s)
        g = f
        for _ in range(k):
            g = lap(g)
        for r in (mp.mpf("0.3"), mp.mpf(2), mp.mpf(7)):
            want = f(r) ** (mp.mpf(d.two_sharp) - 1)
            assert abs(g(r) / want - 1) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(3, 1), (4, 1), (5, 2), (6, 2), (7, 3)]),
       st.floats(min_value=1e-3, max_value=1e3))
def test_pde_residual_anywhere(pair, r):
    res = pde_residuals(Dimensions(*pair), np.array([r]))
    assert res.max_residual_B <= 1e-8
    assert max(res.max_residual_Z) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.05, max_value=20.0))
def test_norms_scale_invariant(mu):
    d = Dimensions(5, 2)
    a, b = euclid_norms(d), euclid_norms(d, mu=mu)
    assert math.isclose(a.hk_norm_B, b.hk_norm_B, rel_tol=1e-9)
    assert math.isclose(a.l2sharp_norm_B, b.l2sharp_norm_B, rel_tol=1e-9)


def test_dilation_is_scale_derivative():
    d = Dimensions(3, 1)
    r = np.array([0.2, 1.0, 4.0])
    h = 1e-6
    fd = -(bubble_profile(d, 1 + h)(r) - bubble_profile(d, 1 - h)(r)) / (2 * h)
    assert np.allclose(dilation_profile(d)(r), fd, rtol=1e-8)


def test_gram_and_products_small():
    d = Dimensions(4, 1)
    g = kernel_gram(d)
    assert np.max(np.abs(g - np.diag(np.diag(g)))) <= 1e-6 * np.min(np.diag(g))
    assert np.max(bubble_kernel_products(d)) <= 1e-6


@given(st.integers(min_value=1, max_value=9))
def test_sphere_area_recursion(d):
    # |S^d| = 2π/(d-1) |S^{d-2}|
    if d >= 2:
        lower = sphere_area(d - 2) if d > 2 else 2.0
        assert math.isclose(sphere_area(d), 2 * math.pi / (d - 1) * lower, rel_tol=1e-14)


@given(st.integers(min_value=0, max_value=15))
def test_gauss_legendre_exact_on_polynomials(p):
    x, w = gauss_legendre(0.0, 2.0, 8)
    assert math.isclose(float(np.sum(w * x ** p)), 2.0 ** (p + 1) / (p + 1), rel_tol=1e-13)


def test_half_line_rule_power_tail():
    r, w = half_line_rule(200)
    assert math.isclose(float(np.sum(w / (1 + r * r) ** 2)), math.pi / 4, rel_tol=1e-13)


def test_panel_rule_rejects_unsorted():
    with pytest.raises(ValueError):
        panel_rule([0.0, 1.0, 0.5], 4)
    x, w = panel_rule([0.0, 0.5, 2.0], 6)
    assert math.isclose(float(np.sum(w * x ** 3)), 4.0, rel_tol=1e-13)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_sphere_rule_integrates_coordinates(d):
    x, w = sphere_rule(d, 8)
    assert math.isclose(float(np.sum(w)), sphere_area(d), rel_tol=1e-12)
    # ∫ x_1² = |S^d|/(d+1)
    assert math.isclose(float(np.sum(w * x[:, 0] ** 2)), sphere_area(d) / (d + 1), rel_tol=1e-12)
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0)
