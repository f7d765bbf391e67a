"""Sharp constant and bubble residuals for every supported (n, k)."""

import numpy as np

from sharpsob.euclid import euclid_norms, pde_residuals, supported_dimensions

grid = np.geomspace(1e-3, 1e3, 400)
print(f"{'n':>2} {'k':>2} {'rho':>12} {'K0':>20} {'PDE residual':>14}")
for d in supported_dimensions():
    norms = euclid_norms(d)
    res = pde_residuals(d, grid)
    print(f"{d.n:2d} {d.k:2d} {d.rho:12.8f} {norms.K0_from_quotient:20.16f} {res.max_residual_B:14.2e}")
