import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpsob import rescaled as rs
from sharpsob.euclid import Dimensions
from sharpsob.manifold import GeodesicOps, ModelManifold, integrate, inner_product


def params(n=3, k=1, alpha=100.0, amu2=1e-2):
    return rs.ConcentrationParams.from_ratio(ModelManifold.sphere(n), Dimensions(n, k), alpha, amu2)


def test_admissibility_enforced():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    with pytest.raises(ValueError):
        rs.ConcentrationParams.from_ratio(m, d, 100.0, 2.0)
    with pytest.raises(ValueError):
        rs.ConcentrationParams.at_pole(m, d, 0.01, 0.5)


@pytest.mark.parametrize("n,k", [(3, 1), (5, 2)])
def test_residual_matches_high_precision_differences(n, k):
    p = params(n, k)
    radii = [0.3 * p.mu, 3 * p.mu, 0.5 / math.sqrt(p.alpha), 1.5 / math.sqrt(p.alpha), 1.7, 2.2]
    jet, fd = rs.residual_fd_check(p, radii)
    scale = np.maximum(np.abs(fd), 1e-12 * np.max(np.abs(fd)))
    assert np.all(np.abs(jet - fd) <= 1e-7 * scale)


def test_cutoff_shape():
    p = params()
    a = p.core_radius
    th = rs.theta_eval(p, GeodesicOps(p.manifold).exp_map(p.manifold.pole(), np.array([[0.5 * a, 0, 0],
                                                                                       [3 * a, 0, 0]])))
    assert math.isclose(th[0], 1.0, rel_tol=1e-14)
    # past 2/√α the cut-off is the pure exponential e^{-(√α d - 1)/2}
    assert math.isclose(th[1], math.exp(-1.0), rel_tol=1e-12)


def test_kernel_fields_are_parameter_derivatives():
    p = params(alpha=1e3)
    ops = GeodesicOps(p.manifold)
    x = ops.exp_map(p.manifold.pole(), np.array([[0.5 * p.mu, 0.2 * p.mu, 0.0], [2 * p.mu, -p.mu, p.mu],
                                                 [0.02, 0.01, 0.0]]))
    z0 = rs.rescaled_eval(p, 0, x)
    assert np.allclose(z0, rs.scale_derivative_fd(p, x), rtol=1e-7, atol=1e-9 * np.max(np.abs(z0)))
    for j in (1, 2):
        zj = rs.rescaled_eval(p, j, x)
        fd = rs.center_derivative_fd(p, j, x, step=1e-4 * p.mu)
        assert np.allclose(zj, fd, rtol=1e-6, atol=1e-8 * np.max(np.abs(zj)))


def test_translation_kernels_mutually_orthogonal():
    p = params()
    f = rs.kernel_fields(p)
    assert abs(integrate(p.manifold, f[1])) < 1e-12
    assert rs.hk_inner(p, f[1], f[2]) == 0.0
    assert abs(inner_product(p.manifold, f[0], f[0])) > 0


@settings(max_examples=30)
@given(st.floats(min_value=0.0, max_value=50.0), st.floats(min_value=0.05, max_value=0.95))
def test_psi_eps_against_psi_beyond_one(t, eps):
    # for t ≥ 1, e^{-(1-ε)t} ≥ e^{-t/2} exactly when ε ≥ 1/2
    a, b = float(rs.Psi_eps(t, eps)), float(rs.Psi(t))
    if t < 1:
        assert a == b == 1.0
    elif eps >= 0.5:
        assert a >= b
    else:
        assert a <= b * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=1e-4, max_value=1e-2))
def test_residual_bounds_hold_with_uniform_constant(amu2):
    p = params(alpha=1e3, amu2=amu2)
    a = rs.residual_audit(p, "B", hminus=False)
    assert a.inner_ratio < 5.0 and a.outer_ratio < 50.0


def test_weight_branch_monotone():
    d = Dimensions(5, 2)
    t = np.geomspace(1e-3, 1e2, 50)
    e = rs.eta(d, t)
    assert np.all(e > 0)
