import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpsob.blowup import (LinearizedProblem, NodalField, fit_bubble, fixed_point_construct,
                             lambda_bound_audit, linear_solve_projected, reduced_multiplier_scan,
                             scalar_nonlinearity, solve_critical)
from sharpsob.euclid import Dimensions
from sharpsob.manifold import ModelManifold
from sharpsob.rescaled import ConcentrationParams
from sharpsob.sem import RadialSEM


@pytest.fixture(scope="module")
def fixed_point_31():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    return fixed_point_construct(ConcentrationParams.from_ratio(m, d, 100.0, 1e-3))


@settings(max_examples=50)
@given(st.floats(min_value=0.0, max_value=50.0), st.floats(min_value=-50.0, max_value=50.0),
       st.sampled_from([(3, 1), (5, 2), (7, 3)]))
def test_nonlinearity_bound(b, a, pair):
    d = Dimensions(*pair)
    v = scalar_nonlinearity(d, b, a)
    p = d.power
    # G is a difference of three terms; allow for its rounding error
    rounding = 8 * np.finfo(float).eps * ((b + abs(a)) ** p + b ** p + p * b ** (p - 1) * abs(a))
    assert abs(float(v.value)) <= float(v.bound) * (1 + 1e-9) + rounding


@pytest.mark.parametrize("n,sector", [(3, 0), (3, 1), (5, 0)])
def test_sem_power_roundtrip(n, sector):
    s = RadialSEM.uniform(n, 8, 10, sector)
    rng = np.random.default_rng(1)
    f = rng.standard_normal(s.size)
    u = s.inverse_power(f, 7.0, 2)
    assert np.allclose(s.shifted_power(u, 7.0, 2), f, atol=1e-9 * np.max(np.abs(f)))


def test_sem_mass_integrates_cosine():
    s = RadialSEM.uniform(3, 8, 10, 0)
    # ∫_{S^3} cos² r = 2π²/4
    val = s.integrate_power(np.cos(s.nodes), 2.0)
    assert math.isclose(val, math.pi ** 2 / 2, rel_tol=1e-10)


def test_manufactured_solution_recovered():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    p = ConcentrationParams.from_ratio(m, d, 1e3, 1e-3)
    prob = LinearizedProblem(p, 12, (0,))
    r = prob.space(0).nodes
    psi = prob.project(np.exp(-(r / (3 * p.mu)) ** 2))
    phi, lam = linear_solve_projected(prob, prob.apply(psi))
    assert np.max(np.abs(phi - psi)) <= 1e-8 * np.max(np.abs(psi))
    assert abs(lam[0]) <= 1e-8 * np.max(np.abs(psi))
    assert abs(prob.kernel_products(phi)) <= 1e-10 * np.linalg.norm(phi)


def test_fixed_point_contracts(fixed_point_31):
    fp = fixed_point_31
    assert max(fp.ratios) <= 0.5
    assert fp.residual_hminus <= 1e-8
    assert fp.hk_norm_phi < fp.hk_norm_w
    rep = lambda_bound_audit(fp.problem, fp.phi, fp.lam)
    assert np.all(rep.ratios < 10)


def test_fixed_point_threshold():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    with pytest.raises(ValueError):
        fixed_point_construct(ConcentrationParams.from_ratio(m, d, 100.0, 0.5))


@pytest.mark.parametrize("n,k", [(3, 1), (5, 2)])
def test_constant_branch(n, k):
    m, d = ModelManifold.sphere(n), Dimensions(n, k)
    sol = solve_critical(m, d, 50.0)
    c = 50.0 ** ((n - 2 * k) / 4)
    assert math.isclose(float(sol.values[0]), c, rel_tol=1e-14)
    assert sol.residual_sup <= 1e-14
    assert math.isclose(sol.energy, c * math.sqrt(m.volume), rel_tol=1e-14)


def test_fit_recovers_parameters_of_perturbed_bubble(fixed_point_31):
    fp = fixed_point_31
    p = fp.params
    m, d = p.manifold, p.dims
    u = NodalField(fp.problem.space(0), fp.problem.w_nodal() + fp.phi)
    fit = fit_bubble(m, u, p.alpha, d, start_mu=1.1 * p.mu)
    # φ is H^k-orthogonal to Z̃_j, so W itself is a critical point of the fit
    assert abs(fit.mu / p.mu - 1) <= 1e-6
    assert fit.center_offset <= 1e-8
    assert np.max(np.abs(fit.defects)) <= 1e-4
    assert not fit.boundary_hit


def test_reduced_multiplier_keeps_sign():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    scan = reduced_multiplier_scan(m, d, 100.0, (1e-5, 1e-4, 1e-3))
    # λ_0 shrinks with the scale but never crosses zero: no single-bubble critical point here
    assert scan.sign_changes == 0
    assert np.all(np.diff(scan.multiplier) > 0)
