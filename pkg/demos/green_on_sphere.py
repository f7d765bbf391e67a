"""Green function of (Δ+α)^k on S^n: near-diagonal Euclidean behaviour and mass."""

import numpy as np

from sharpsob.green import SpectralGreen, euclid_green_constant, green_integral, green_profile
from sharpsob.manifold import ModelManifold

n, k, alpha = 5, 2, 400.0
g = SpectralGreen(ModelManifold.sphere(n), alpha, k)
d = np.geomspace(1e-4, 3.0, 12)
vals = green_profile(g, d)
for dist, v in zip(d, vals):
    print(f"d = {dist:9.2e}  G = {v:12.5e}  G d^(n-2k)/c = {v * dist ** (n - 2 * k) / euclid_green_constant(n, k):8.5f}")
print("alpha^k * integral of G =", green_integral(g) * alpha ** k)
