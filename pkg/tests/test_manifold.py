import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpsob.jets import Jet
from sharpsob.manifold import (GeodesicOps, ModelManifold, RadialField, chart_transfer_check, compact_bump,
                               constant_field, grid_field, hk_norm, integrate, seminorm_sq)
from sharpsob.quadrature import sphere_area
from sharpsob.radial import RadialJet


def cos_field(m, l=1):
    prof = RadialJet(lambda r, k: Jet.variable(r, k).cos(), taylor_radius=0.1, antipode_radius=0.1)
    return RadialField(m, m.pole(), prof)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_volume_and_constant_integral(n):
    m = ModelManifold.sphere(n)
    assert math.isclose(m.volume, sphere_area(n), rel_tol=1e-14)
    assert math.isclose(integrate(m, constant_field(m, 2.0)), 2 * sphere_area(n), rel_tol=1e-12)


def test_torus_volume_and_grid_integral():
    m = ModelManifold.torus(2)
    assert math.isclose(m.volume, 4 * math.pi ** 2, rel_tol=1e-14)
    g = grid_field(m, lambda x: np.cos(x[:, 0]) ** 2, resolution=16)
    assert math.isclose(integrate(m, g), 2 * math.pi ** 2, rel_tol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_first_harmonic_seminorms(n):
    # f = cos r has Δf = n f, so ‖∇f‖² = n ‖f‖² and ‖Δf‖² = n² ‖f‖², ‖f‖² = |S^n|/(n+1)
    m = ModelManifold.sphere(n)
    f = cos_field(m)
    l2 = sphere_area(n) / (n + 1)
    assert math.isclose(seminorm_sq(m, f, 0), l2, rel_tol=1e-11)
    assert math.isclose(seminorm_sq(m, f, 1), n * l2, rel_tol=1e-10)
    assert math.isclose(seminorm_sq(m, f, 2), n * n * l2, rel_tol=1e-10)
    assert math.isclose(hk_norm(m, f, 2) ** 2, (1 + n + n * n) * l2, rel_tol=1e-10)


unit = st.floats(min_value=-1.0, max_value=1.0)


@settings(max_examples=40)
@given(st.tuples(unit, unit, unit), st.floats(min_value=0.01, max_value=3.0))
def test_sphere_exp_log_inverse(v, t):
    m = ModelManifold.sphere(3)
    ops = GeodesicOps(m)
    v = np.array(v)
    if np.linalg.norm(v) < 1e-3:
        return
    v = v / np.linalg.norm(v) * t
    z = ops.exp_map(m.pole(), np.array([0.3, -0.2, 0.1]))
    x = ops.exp_map(z, v)
    assert math.isclose(float(ops.distance(z, x)), t, rel_tol=1e-10, abs_tol=1e-12)
    assert np.allclose(ops.log_map(z, x), v, atol=1e-10)


@settings(max_examples=40)
@given(st.tuples(unit, unit), st.floats(min_value=0.01, max_value=3.0))
def test_torus_exp_log_inverse(v, t):
    m = ModelManifold.torus(2)
    ops = GeodesicOps(m)
    v = np.array(v)
    if np.linalg.norm(v) < 1e-3:
        return
    v = v / np.linalg.norm(v) * t
    z = np.array([1.0, 6.0])
    x = ops.exp_map(z, v)
    assert np.allclose(ops.log_map(z, x), v, atol=1e-12)


def test_log_at_antipode_rejected():
    m = ModelManifold.sphere(2)
    with pytest.raises(ValueError):
        GeodesicOps(m).log_map(m.pole(), -m.pole())


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e-2), st.sampled_from([1, 2]))
def test_chart_transfer_small_support(support, order):
    # metric distortion in normal coordinates is O(r²)
    m = ModelManifold.sphere(3)
    t = chart_transfer_check(m, compact_bump(support), support, order)
    assert abs(t.ratio - 1.0) <= 2 * support ** 2


def test_chart_transfer_needs_support_inside_cutoff():
    m = ModelManifold.sphere(3)
    with pytest.raises(ValueError):
        chart_transfer_check(m, compact_bump(3.0), 3.0, 1)


def test_invalid_manifolds():
    with pytest.raises(ValueError):
        ModelManifold("cylinder", 3)
    with pytest.raises(ValueError):
        ModelManifold.torus(2, periods=(1.0,))
