"""Numerical audits of sharp Sobolev inequalities for (Δ+α)^k on model manifolds.

Modules
    euclid    Euclidean bubble, kernel basis and sharp constant
    manifold  sphere and flat torus, geodesics, radial fields and norms
    rescaled  cut-off bubbles W and Z̃_j, weights, residual audits
    green     Green function of (Δ+α)^k on the sphere, Giraud convolutions
    blowup    linearized problem, fixed point, Newton solve, bubble fit
    audit     Sobolev quotients, sharpness, B₀ lower bounds, rate audits
    cli       batch driver
"""

from .euclid import Dimensions, bubble_profile, euclid_norms, sharp_constant
from .manifold import ModelManifold

__all__ = ["Dimensions", "ModelManifold", "bubble_profile", "euclid_norms", "sharp_constant"]
__version__ = "0.1.0"
