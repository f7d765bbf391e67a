"""Euclidean bubble, its linearized kernel, and the sharp-constant identities.

The bubble is B(r) = (1 + ρ r²)^{-(n-2k)/2}, normalized so that
Δ^k B = B^{2♯-1} with Δ = -div ∇ and B(0) = 1.  The kernel of the
linearized equation is spanned by the dilation generator
Z_0 = y·∇B + (n-2k)/2 B and the translations Z_j = ∂_j B.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, prod

import numpy as np

from .jets import Jet
from .quadrature import half_line_rule, sphere_area, sphere_rule
from .radial import EUCLID, RadialJet, laplacian_power

MAX_N = 9
MAX_K = 3


@dataclass(frozen=True)
class Dimensions:
    n: int
    k: int

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and isinstance(self.k, (int, np.integer))):
            raise TypeError("n and k must be integers")
        if self.k < 1 or self.n <= 2 * self.k:
            raise ValueError(f"need n > 2k >= 2, got n={self.n}, k={self.k}")
        if self.n > MAX_N or self.k > MAX_K:
            raise ValueError(f"unsupported pair (n={self.n}, k={self.k}); need n <= {MAX_N}, k <= {MAX_K}")

    @property
    def two_sharp(self) -> float:
        return 2.0 * self.n / (self.n - 2 * self.k)

    def two_sharp_l(self, l: int) -> float:
        if 2 * l >= self.n:
            raise ValueError("need n > 2l")
        return 2.0 * self.n / (self.n - 2 * l)

    @property
    def two_sharp_exact(self) -> Fraction:
        return Fraction(2 * self.n, self.n - 2 * self.k)

    @property
    def power(self) -> float:
        """Exponent 2♯ - 1 of the critical nonlinearity."""
        return self.two_sharp - 1.0

    @property
    def decay(self) -> float:
        """(n - 2k)/2, the scaling weight of the bubble."""
        return 0.5 * (self.n - 2 * self.k)

    @property
    def rho(self) -> float:
        return rho_nk(self)

    @property
    def K0(self) -> float:
        return sharp_constant(self)

    def __str__(self):
        return f"(n={self.n}, k={self.k})"


def supported_dimensions():
    return [Dimensions(n, k) for k in range(1, MAX_K + 1) for n in range(2 * k + 1, MAX_N + 1)]


def rho_nk(dims: Dimensions) -> float:
    n, k = dims.n, dims.k
    if n <= 2 * k:
        raise ValueError("need n > 2k")
    p = prod(n + 2 * l for l in range(-k, k))
    return float(p) ** (-1.0 / k)


# profiles -------------------------------------------------------------------

def bubble_profile(dims: Dimensions, mu: float = 1.0) -> RadialJet:
    """B_μ(r) = μ^{-(n-2k)/2} B(r/μ) = (μ / (μ² + ρ r²))^{(n-2k)/2}."""
    rho, s = dims.rho, dims.decay

    def jet_fn(r, order):
        x = Jet.variable(r, order) * (1.0 / mu)
        return ((x * x) * rho + 1.0) ** (-s) * mu ** (-s)

    return RadialJet(jet_fn, name="B" if mu == 1.0 else f"B_{mu:g}",
                     taylor_radius=_taylor_radius(dims, mu))


def _taylor_radius(dims: Dimensions, mu: float) -> float:
    # the nearest complex singularity of B_μ sits at |r| = μ/√ρ
    return 0.1 * mu / np.sqrt(dims.rho)


def bubble_jet(dims: Dimensions, r, order: int | None = None) -> Jet:
    if order is None:
        order = 2 * dims.k + 1
    return bubble_profile(dims).jet(r, order)


def dilation_profile(dims: Dimensions, mu: float = 1.0) -> RadialJet:
    """Profile of Z_0 = r B'(r) + (n-2k)/2 B(r) (concentrated at scale μ)."""
    b = bubble_profile(dims, mu)
    s = dims.decay

    def jet_fn(r, order):
        bj = b.jet(r, order + 1)
        return Jet.variable(r, order) * bj.derivative() + bj.truncate(order) * s

    return RadialJet(jet_fn, name="Z0", taylor_radius=b.taylor_radius)


def translation_profile(dims: Dimensions, mu: float = 1.0) -> RadialJet:
    """Radial factor B'(r) of Z_j = B'(r) y_j/|y| (first spherical harmonic)."""
    b = bubble_profile(dims, mu)
    return RadialJet(lambda r, order: b.jet(r, order + 1).derivative(), name="Zj",
                     taylor_radius=b.taylor_radius)


@dataclass(frozen=True)
class KernelMember:
    profile: RadialJet
    sector: int  # 0 for radial, 1 for profile × y_j/|y|
    direction: int | None = None  # j for the translation members


@dataclass(frozen=True)
class KernelBasis:
    dims: Dimensions
    members: tuple = field(default_factory=tuple)

    @classmethod
    def build(cls, dims: Dimensions) -> "KernelBasis":
        members = [KernelMember(dilation_profile(dims), 0)]
        zj = translation_profile(dims)
        members += [KernelMember(zj, 1, j) for j in range(dims.n)]
        return cls(dims, tuple(members))


def kernel_eval(basis: KernelBasis, j: int, y) -> float:
    if not 0 <= j <= basis.dims.n:
        raise IndexError(f"kernel index {j} outside 0..{basis.dims.n}")
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != basis.dims.n:
        raise ValueError(f"points must have {basis.dims.n} coordinates")
    r = np.linalg.norm(y, axis=-1)
    m = basis.members[j]
    val = m.profile(r)
    if m.sector == 0:
        return val
    with np.errstate(invalid="ignore", divide="ignore"):
        ang = np.where(r > 0, y[..., m.direction] / np.where(r > 0, r, 1.0), 0.0)
    return val * ang


def polyharmonic_radial_apply(dims: Dimensions, f: RadialJet, m: int, sector: int = 0) -> RadialJet:
    if m < 0:
        raise ValueError("m must be non-negative")
    return laplacian_power(f, dims.n, m, EUCLID, sector)


# integrals ------------------------------------------------------------------

def _radial_integral(values, r, w, n):
    return sphere_area(n - 1) * np.sum(values * w * r ** (n - 1))


def hk_seminorm_sq(dims: Dimensions, f: RadialJet, l: int, r, w, sector: int = 0,
                   angular: float | None = None) -> float:
    """∫_{R^n} |Δ^{l/2} (f(r)Y)|² with Y = 1 (sector 0) or y_j/|y| (sector 1)."""
    from .radial import gradient_energy_density

    dens = gradient_energy_density(f, dims.n, l, r, EUCLID, sector)
    scale = 1.0 if sector == 0 else 1.0 / dims.n
    if angular is not None:
        scale = angular
    return scale * _radial_integral(dens, r, w, dims.n)


def lebesgue_norm_pow(dims: Dimensions, f: RadialJet, q: float, r, w) -> float:
    return _radial_integral(np.abs(f(r)) ** q, r, w, dims.n)


@dataclass(frozen=True)
class EuclidNorms:
    hk_norm_B: float
    l2sharp_norm_B: float
    K0_from_hk: float
    K0_from_quotient: float
    nodes: int
    resolution_delta: float


def _norms_at(dims: Dimensions, nodes: int, mu: float = 1.0):
    r, w = half_line_rule(nodes, mu / np.sqrt(dims.rho))
    b = bubble_profile(dims, mu)
    hk2 = hk_seminorm_sq(dims, b, dims.k, r, w)
    ls = lebesgue_norm_pow(dims, b, dims.two_sharp, r, w)
    return np.sqrt(hk2), ls ** (1.0 / dims.two_sharp)


def euclid_norms(dims: Dimensions, nodes: int = 400, tol: float = 1e-9, mu: float = 1.0) -> EuclidNorms:
    """Ḣ^k and L^{2♯} norms of B by mapped Gauss-Legendre quadrature.

    The quadrature is repeated at half the node count; if the two results
    differ by more than ``tol`` the rule has not converged and ValueError is
    raised.
    """
    hk, ls = _norms_at(dims, nodes, mu)
    hk_h, ls_h = _norms_at(dims, max(nodes // 2, 8), mu)
    delta = max(abs(hk - hk_h) / hk, abs(ls - ls_h) / ls)
    if delta > tol:
        raise ValueError(f"radial quadrature not converged (relative change {delta:.3e})")
    n, k = dims.n, dims.k
    return EuclidNorms(
        hk_norm_B=hk,
        l2sharp_norm_B=ls,
        K0_from_hk=hk ** (-2.0 * k / n),
        K0_from_quotient=ls / hk,
        nodes=nodes,
        resolution_delta=delta,
    )


@lru_cache(maxsize=None)
def sharp_constant(dims: Dimensions) -> float:
    return euclid_norms(dims).K0_from_quotient


@dataclass(frozen=True)
class PdeResiduals:
    max_residual_B: float
    max_residual_Z: tuple


def pde_residuals(dims: Dimensions, grid) -> PdeResiduals:
    """Sup over the grid of the bubble and linearized-kernel equation residuals."""
    r = np.asarray(grid, dtype=float)
    if np.any(r <= 0):
        raise ValueError("grid radii must be positive")
    k, p = dims.k, dims.power
    b = bubble_profile(dims)
    bv = b(r)
    res_b = np.max(np.abs(polyharmonic_radial_apply(dims, b, k)(r) - bv ** p))
    pot = p * bv ** (p - 1.0)
    basis = KernelBasis.build(dims)
    res_z = []
    for m in basis.members:
        lz = polyharmonic_radial_apply(dims, m.profile, k, m.sector)(r)
        res_z.append(float(np.max(np.abs(lz - pot * m.profile(r)))))
    return PdeResiduals(float(res_b), tuple(res_z))


def _angular_tables(n: int):
    """∫ Y_i Y_j and ∫ ∇Y_i·∇Y_j over S^{n-1} for Y_0 = 1, Y_j = ω_j."""
    pts, w = sphere_rule(n - 1, 8)
    ys = np.concatenate([np.ones((pts.shape[0], 1)), pts], axis=1)
    mass = np.einsum("p,pi,pj->ij", w, ys, ys)
    grads = np.zeros((pts.shape[0], n + 1, n))
    eye = np.eye(n)
    grads[:, 1:, :] = eye[None, :, :] - pts[:, :, None] * pts[:, None, :]
    stiff = np.einsum("p,pia,pja->ij", w, grads, grads)
    return mass, stiff


def hk_inner_matrix(dims: Dimensions, items, nodes: int = 400, scale: float | None = None):
    """Ḣ^k Gram matrix of functions f_i(r)·Y_i, items given as (profile, sector, direction)."""
    n, k = dims.n, dims.k
    if scale is None:
        scale = 1.0 / np.sqrt(dims.rho)
    r, w = half_line_rule(nodes, scale)
    mass, stiff = _angular_tables(n)
    idx = [0 if sec == 0 else 1 + d for (_, sec, d) in items]
    g = []
    for prof, sec, _ in items:
        h = laplacian_power(prof, n, k // 2, EUCLID, sec)
        d = h.derivatives(r, 1)
        g.append(d)
    size = len(items)
    out = np.zeros((size, size))
    for a in range(size):
        for b in range(a, size):
            if k % 2 == 0:
                rad = np.sum(g[a][0] * g[b][0] * w * r ** (n - 1))
                val = rad * mass[idx[a], idx[b]]
            else:
                rad1 = np.sum(g[a][1] * g[b][1] * w * r ** (n - 1))
                rad0 = np.sum(g[a][0] * g[b][0] * w * r ** (n - 3))
                val = rad1 * mass[idx[a], idx[b]] + rad0 * stiff[idx[a], idx[b]]
            out[a, b] = out[b, a] = val
    return out


def kernel_gram(dims: Dimensions, nodes: int = 400) -> np.ndarray:
    basis = KernelBasis.build(dims)
    items = [(m.profile, m.sector, m.direction) for m in basis.members]
    return hk_inner_matrix(dims, items, nodes)


def bubble_kernel_products(dims: Dimensions, nodes: int = 400) -> np.ndarray:
    """Normalized |⟨B, Z_j⟩_{Ḣ^k}| / (‖B‖ ‖Z_j‖) for j = 0..n."""
    basis = KernelBasis.build(dims)
    items = [(bubble_profile(dims), 0, None)] + [(m.profile, m.sector, m.direction) for m in basis.members]
    g = hk_inner_matrix(dims, items, nodes)
    d = np.sqrt(np.diag(g))
    return np.abs(g[0, 1:]) / (d[0] * d[1:])


def binomial_weights(k: int, alpha: float):
    return [comb(k, l) * alpha ** (k - l) for l in range(k + 1)]
