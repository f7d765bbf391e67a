import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpsob.audit import (AuditError, coercivity_identity, constant_field_b0, default_dictionary, empirical_B0,
                            lower_order_rate_audit, quotient, sharpness_probe)
from sharpsob.euclid import Dimensions, sharp_constant
from sharpsob.green import ZonalExpansion
from sharpsob.manifold import ModelManifold, constant_field


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.1, max_value=10.0), st.floats(min_value=0.1, max_value=10.0),
       st.sampled_from([(3, 1), (5, 2)]))
def test_constant_field_quotient(c, lam, pair):
    d = Dimensions(*pair)
    m = ModelManifold.sphere(d.n)
    q = quotient(m, d, constant_field(m, c), lam)
    # I_Λ(c) = Λ Vol^{2k/n}, independent of c
    assert math.isclose(q.value, lam * m.volume ** (2 * d.k / d.n), rel_tol=1e-12)


def test_quotient_rejects_bad_input():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    with pytest.raises(AuditError):
        quotient(m, d, constant_field(m), 0.0)
    with pytest.raises(AuditError):
        quotient(m, d, constant_field(m, 0.0), 1.0)


def test_sharpness_raw_and_extrapolated():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    probe = sharpness_probe(m, d)
    assert probe.raw_error <= 0.05
    assert probe.extrapolated_error <= 0.01
    assert math.isclose(probe.target, sharp_constant(d) ** -2, rel_tol=1e-15)
    # the quotient along the bubble family decreases towards K_0^{-2}
    assert np.all(np.diff(probe.values) < 0)


def test_sharpness_needs_geometric_scales():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    with pytest.raises(AuditError):
        sharpness_probe(m, d, alpha_mu2=(1e-2, 1e-3, 5e-5))


def test_b0_lower_bound_and_inequality():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    rep = empirical_B0(m, d)
    assert rep.value >= constant_field_b0(m, d) - 1e-12
    assert rep.inequality_holds(d)
    assert len(rep.contributions) == len(default_dictionary(m, d))


@pytest.mark.parametrize("k,alpha", [(1, 3.0), (2, 30.0), (3, 7.0)])
def test_coercivity_two_routes(k, alpha):
    m = ModelManifold.sphere(2 * k + 1)
    ex = ZonalExpansion(m, m.pole(), np.array([1.0, 0.3, -0.2, 0.1]))
    assert coercivity_identity(m, k, alpha, ex.field()).relative_gap <= 1e-10


def test_rate_audit_three_one():
    m, d = ModelManifold.sphere(3), Dimensions(3, 1)
    rep = lower_order_rate_audit(m, d, (1e2, 1e3, 1e4), (1e-3, 1e-4, 1e-5))
    assert rep.lower_bound > 1.0
    assert rep.defects_decreasing("energy_defect")
    assert rep.defects_decreasing("lebesgue_defect")
    assert rep.ball_band <= 10.0
