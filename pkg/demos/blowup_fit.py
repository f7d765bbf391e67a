"""Bubble plus fixed-point correction: fit the bubble back and audit the remainder."""

import numpy as np

from sharpsob.blowup import NodalField, fit_bubble, fixed_point_construct, remainder_audit
from sharpsob.euclid import Dimensions
from sharpsob.manifold import ModelManifold
from sharpsob.rescaled import ConcentrationParams

m, d = ModelManifold.sphere(3), Dimensions(3, 1)
p = ConcentrationParams.from_ratio(m, d, 1e3, 1e-3)
fp = fixed_point_construct(p)
print("contraction ratios", np.round(fp.ratios, 3), "multiplier", fp.lam)
u = NodalField(fp.problem.space(0), fp.problem.w_nodal() + fp.phi)
fit = fit_bubble(m, u, p.alpha, d, start_mu=1.2 * p.mu)
print("fitted mu / true mu - 1 =", fit.mu / p.mu - 1, " defects", fit.defects[:2])
ra = remainder_audit(m, u, fit, d)
print("remainder ratios inner", ra.inner, "outer", ra.outer)
