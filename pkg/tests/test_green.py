import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from sharpsob.green import (GreenError, SpectralGreen, XKernel, YKernel, ZonalExpansion, check_exponents,
                            convolution_value, euclid_green_constant, giraud_convolution_audit,
                            green_apply, green_integral, green_profile, zonal_expand)
from sharpsob.manifold import ModelManifold


def test_euclid_constant_three_one():
    # (Δ+α)^{-1} kernel in R^3 behaves like 1/(4π|x|) near the diagonal
    assert math.isclose(euclid_green_constant(3, 1), 1 / (4 * math.pi), rel_tol=1e-14)


@pytest.mark.parametrize("alpha", [3.0, 20.0])
def test_s3_resolvent_closed_form(alpha):
    """On S^3, (Δ+α)^{-1} has kernel sinh(ω(π-d))/(4π sinh(ωπ) sin d) with ω² = α-1."""
    g = SpectralGreen(ModelManifold.sphere(3), alpha, 1)
    w = math.sqrt(alpha - 1)
    d = np.array([0.05, 0.7, 2.0, 3.0])
    want = np.sinh(w * (math.pi - d)) / (4 * math.pi * math.sinh(w * math.pi) * np.sin(d))
    assert np.allclose(green_profile(g, d), want, rtol=1e-11)


@pytest.mark.parametrize("n,k", [(3, 1), (5, 2)])
def test_closed_form_matches_spectral_sum(n, k):
    g = SpectralGreen(ModelManifold.sphere(n), 100.0, k)
    d = np.array([0.3, 1.0, 2.5])
    a, b = green_profile(g, d), green_profile(g, d, method="spectral")
    assert np.allclose(a, b, rtol=1e-6)


@pytest.mark.parametrize("n,k,alpha", [(3, 1, 1e2), (3, 1, 1e4), (5, 2, 1e3)])
def test_integral_is_inverse_power(n, k, alpha):
    g = SpectralGreen(ModelManifold.sphere(n), alpha, k)
    assert abs(green_integral(g) * alpha ** k - 1) <= 1e-8


def test_near_diagonal_euclidean_behaviour():
    n, k = 5, 2
    g = SpectralGreen(ModelManifold.sphere(n), 100.0, k)
    d = 1e-4
    assert math.isclose(float(green_profile(g, np.array([d]))[0]) * d ** (n - 2 * k),
                        euclid_green_constant(n, k), rel_tol=1e-2)


def test_spectral_series_not_absolutely_convergent():
    assert math.isinf(SpectralGreen(ModelManifold.sphere(3), 10.0, 1).tail_bound(100))


def test_green_needs_sphere():
    with pytest.raises(GreenError):
        SpectralGreen(ModelManifold.torus(3), 10.0, 1)


coef = st.lists(st.floats(min_value=-1, max_value=1), min_size=3, max_size=7)


@settings(max_examples=15, deadline=None)
@given(coef, st.floats(min_value=1.0, max_value=200.0))
def test_green_apply_inverts_shifted_power(c, alpha):
    m = ModelManifold.sphere(5)
    f = zonal_expand(m, lambda r: np.polynomial.polynomial.polyval(np.cos(r), c), degree=10)
    g = SpectralGreen(m, alpha, 2)
    u = green_apply(g, f)
    back = u.scaled((u.eigenvalues() + alpha) ** 2)
    assert np.allclose(back.coeffs, f.coeffs, atol=1e-12 * (1 + np.max(np.abs(f.coeffs))))
    # coercivity transfer ‖(Δ+α)^{-k} f‖_{H^k} ≤ ‖f‖_{H^{-k}}
    assert u.hk_norm(2) <= f.hminus_norm(2, alpha) * (1 + 1e-12)


def test_zonal_expansion_reproduces_legendre():
    m = ModelManifold.sphere(2)
    ex = zonal_expand(m, lambda r: 1.5 * np.cos(r) ** 2 - 0.5, degree=6)
    want = np.zeros(7)
    want[2] = 1.0  # Gegenbauer λ = 1/2 is Legendre
    assert np.allclose(ex.coeffs, want, atol=1e-13)


def test_exponent_checks():
    with pytest.raises(GreenError):
        check_exponents(3, "gir1", 2.0, 2.0, 1.5)
    with pytest.raises(GreenError):
        check_exponents(3, "gir2", 2.0, 2.5)
    with pytest.raises(GreenError):
        check_exponents(3, "gir3", 2.0, 2.0)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_convolution_against_nested_adaptive_quadrature():
    """Z(D) on S^3 against scipy's adaptive quadrature in polar coordinates about x."""
    n, alpha, mu, eps, D = 3, 1.0, 0.3, 0.25, 1.0
    X = XKernel("gir1", 1.0, eps, alpha, mu, 0.0)
    Y = YKernel(2.5, eps, alpha, n)
    got = convolution_value(n, X, Y, D, q=12)

    def y_at(r, th):
        c = math.cos(r) * math.cos(D) + math.sin(r) * math.sin(D) * math.cos(th)
        return float(Y(np.array([math.acos(max(-1.0, min(1.0, c)))]))[0])

    def shell(r):
        return quad(lambda th: y_at(r, th) * math.sin(th), 0, math.pi, epsrel=1e-8, limit=100)[0]

    total = sum(quad(lambda r: float(X(np.array([r]))[0]) * math.sin(r) ** 2 * shell(r), a, b,
                     epsrel=1e-7, limit=100)[0]
                for a, b in ((0, mu), (mu, D), (D, math.pi)))
    # the azimuthal circle S^1 contributes 2π
    assert math.isclose(got, 2 * math.pi * total, rel_tol=1e-4)


def test_giraud_constants_bounded():
    a = giraud_convolution_audit(3, "gir1", 2.0, 2.0, 0.25, 100.0, 0.01, 0.5)
    assert np.all(np.isfinite(a.ratios)) and a.inner_constant < 100 and a.outer_constant < 100


def test_expansion_norms_consistent():
    m = ModelManifold.sphere(3)
    ex = ZonalExpansion(m, m.pole(), np.array([1.0, 0.5]))
    # on S^3 the degree-one zonal basis function is C_1^{(1)}(cos r) = 2 cos r, so the
    # field is 1 + cos r with ‖·‖² = |S^3|(1 + 1/4), |S^3| = 2π²
    assert math.isclose(ex.l2_norm() ** 2, 2 * math.pi ** 2 * 1.25, rel_tol=1e-12)
