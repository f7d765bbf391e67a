"""Radial spectral elements on the round sphere.

Fields of the form f(r) Y(ω), with r the distance to a center and Y a
spherical harmonic of degree ``sector`` on the tangent sphere, are expanded
in continuous piecewise polynomials of degree p on a graded mesh of [0, π]
(nodal basis at Gauss-Lobatto-Legendre points).  The weak forms

    M_ij = ∫ φ_i φ_j  dV,     S_ij = ∫ (φ_i' φ_j' + c φ_i φ_j / sin² r) dV,

with c = m(m+n-2) and dV = ω_{n-1} sin^{n-1} r dr (times the angular mean of
Y²), are banded and symmetric positive (semi)definite.  The discrete Laplacian
is D = M^{-1} S, so (Δ+α)^{-k} becomes ((S+αM)^{-1} M)^k and the H^k inner
product becomes Σ_l u·M D^l v.  For sector ≥ 1 the profile vanishes at both
poles and those two nodes are removed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import pi, sqrt

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded, eigh
from scipy.special import roots_jacobi, roots_legendre

from .quadrature import sphere_area


@lru_cache(maxsize=16)
def gll_nodes(p: int):
    """Gauss-Lobatto-Legendre nodes on [-1, 1] (p+1 of them)."""
    if p < 1:
        raise ValueError("degree must be at least 1")
    inner = roots_jacobi(p - 1, 1.0, 1.0)[0] if p > 1 else np.zeros(0)
    return np.concatenate([[-1.0], inner, [1.0]])


def _bary_weights(x):
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lagrange_matrix(nodes, t, deriv: int = 0):
    """Values (or derivatives of order ``deriv``) at t of the Lagrange basis on ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    t = np.asarray(t, dtype=float)
    bw = _bary_weights(nodes)
    diff = t[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-15)
    diff = np.where(exact, 1.0, diff)
    terms = bw[None, :] / diff
    vals = terms / np.sum(terms, axis=1, keepdims=True)
    rows = np.any(exact, axis=1)
    vals[rows] = exact[rows].astype(float)
    if deriv == 0:
        return vals
    # derivatives through the differentiation matrix on the nodes, exact
    # on polynomials of the basis degree
    dm = _diff_matrix(nodes, bw)
    return vals @ np.linalg.matrix_power(dm, deriv)


def _diff_matrix(x, bw):
    n = x.size
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                d[i, j] = (bw[j] / bw[i]) / (x[i] - x[j])
        d[i, i] = -np.sum(d[i])
    return d


def graded_mesh(extent: float, finest: float, core: float | None = None, ratio: float = 1.6,
                h_core: float | None = None, h_max: float = pi / 16, marks=()):
    """Element breakpoints on [0, extent].

    Elements start at ``finest`` near r = 0 and grow geometrically; inside
    the core (r below 40·core) they are capped at ``h_core``, beyond it at
    ``h_max``.
    """
    core = extent if core is None else core
    h_core = 0.25 * core if h_core is None else h_core
    pts = [0.0, finest]
    x = finest
    while x < extent:
        cap = h_core if x < 40.0 * core else h_max
        x = x + min(x * (ratio - 1.0), cap)
        pts.append(min(x, extent))
    pts = np.unique(np.concatenate([pts, [m for m in marks if 0.0 < m < extent]]))
    keep = np.concatenate([[True], np.diff(pts) > 1e-12 * extent])
    pts = pts[keep]
    pts[-1] = extent
    return pts


@dataclass
class RadialSEM:
    n: int
    breakpoints: np.ndarray
    degree: int = 12
    sector: int = 0

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float)
        if self.breakpoints[0] != 0.0 or abs(self.breakpoints[-1] - pi) > 1e-12:
            raise ValueError("mesh must span [0, π]")
        if self.sector < 0:
            raise ValueError("sector must be non-negative")
        self._assemble()

    # construction ---------------------------------------------------------------

    @classmethod
    def for_scales(cls, n: int, mu: float, alpha: float, degree: int = 12, sector: int = 0,
                   marks=()) -> "RadialSEM":
        core = 1.0 / sqrt(alpha)
        extra = [core, 1.25 * core, 1.5 * core, 1.75 * core, 2.0 * core, pi / 2, 5 * pi / 8, 3 * pi / 4]
        bp = graded_mesh(pi, 0.25 * mu, core=core, h_core=0.5 * core, marks=tuple(extra) + tuple(marks))
        return cls(n, bp, degree, sector)

    @classmethod
    def for_params(cls, params, degree: int = 12, sector: int = 0) -> "RadialSEM":
        m = params.manifold
        if m.kind != "sphere":
            raise ValueError("the radial spectral-element space is built on the round sphere")
        return cls.for_scales(m.n, params.mu, params.alpha, degree, sector)

    @classmethod
    def uniform(cls, n: int, elements: int = 16, degree: int = 12, sector: int = 0) -> "RadialSEM":
        return cls(n, np.linspace(0.0, pi, elements + 1), degree, sector)

    def _assemble(self):
        p = self.degree
        ref = gll_nodes(p)
        ne = self.breakpoints.size - 1
        q = p + (self.n + 1) // 2 + 3
        tq, wq = roots_legendre(q)
        phi = lagrange_matrix(ref, tq)
        dphi = lagrange_matrix(ref, tq, 1)
        nglob = ne * p + 1
        nodes = np.empty(nglob)
        size = p + 1
        mass = np.zeros((size, nglob))      # upper banded storage
        stiff = np.zeros((size, nglob))
        c = self.sector * (self.sector + self.n - 2)
        ang = sphere_area(self.n - 1) * (1.0 if self.sector == 0 else 1.0 / self.n)
        quad_r, quad_w, quad_elem = [], [], []
        for e in range(ne):
            a, b = self.breakpoints[e], self.breakpoints[e + 1]
            h = 0.5 * (b - a)
            r = a + h * (tq + 1.0)
            nodes[e * p:e * p + size] = a + h * (ref + 1.0)
            w = wq * h * ang * np.sin(r) ** (self.n - 1)
            me = (phi * w[:, None]).T @ phi
            se = (dphi * w[:, None]).T @ dphi / h ** 2
            if c:
                se = se + (phi * (w / np.sin(r) ** 2)[:, None]).T @ phi * c
            base = e * p
            for i in range(size):
                for j in range(i, size):
                    mass[p + i - j, base + j] += me[i, j]
                    stiff[p + i - j, base + j] += se[i, j]
            quad_r.append(r)
            quad_w.append(wq * h)
            quad_elem.append(np.full(q, e))
        nodes[-1] = pi
        self._all_nodes = nodes
        self._ref = ref
        self._tq = tq
        self._phi_q = phi
        self._dphi_q = dphi
        self._quad_r = np.concatenate(quad_r)
        self._quad_w = np.concatenate(quad_w)
        self._quad_elem = np.concatenate(quad_elem)
        if self.sector:
            keep = slice(1, nglob - 1)
            mass = mass[:, keep]
            stiff = stiff[:, keep]
            self._offset = 1
        else:
            self._offset = 0
        self.mass_banded = mass
        self.stiff_banded = stiff
        self.nodes = nodes[self._offset:nglob - self._offset]
        self._mass_chol = cholesky_banded(mass)
        self._shift_chol = {}

    # sizes and basic products ------------------------------------------------------------

    @property
    def size(self) -> int:
        return self.nodes.size

    def _band_matvec(self, band, u):
        p = self.degree
        shape = (-1,) + (1,) * (u.ndim - 1)
        out = band[p].reshape(shape) * u
        for d in range(1, p + 1):
            diag = band[p - d, d:].reshape(shape)
            out[:-d] += diag * u[d:]
            out[d:] += diag * u[:-d]
        return out

    def mass_apply(self, u):
        return self._band_matvec(self.mass_banded, np.asarray(u, dtype=float))

    def stiff_apply(self, u):
        return self._band_matvec(self.stiff_banded, np.asarray(u, dtype=float))

    def mass_solve(self, b):
        return cho_solve_banded((self._mass_chol, False), b)

    def _shift_factor(self, alpha):
        key = float(alpha)
        if key not in self._shift_chol:
            self._shift_chol[key] = cholesky_banded(self.stiff_banded + key * self.mass_banded)
        return self._shift_chol[key]

    def shift_solve(self, b, alpha):
        """(S + αM)^{-1} b."""
        return cho_solve_banded((self._shift_factor(alpha), False), b)

    # operators -------------------------------------------------------------------------

    def laplacian(self, u):
        """D u = M^{-1} S u."""
        return self.mass_solve(self.stiff_apply(u))

    def shifted_power(self, u, alpha: float, k: int):
        """(D + α)^k u."""
        u = np.asarray(u, dtype=float)
        for _ in range(k):
            u = self.laplacian(u) + alpha * u
        return u

    def inverse_power(self, f, alpha: float, k: int):
        """(D + α)^{-k} f, i.e. the Galerkin solution of (Δ+α)^k u = f."""
        u = np.asarray(f, dtype=float)
        for _ in range(k):
            u = self.shift_solve(self.mass_apply(u), alpha)
        return u

    def inverse_matrix(self, alpha: float, k: int) -> np.ndarray:
        return self.inverse_power(np.eye(self.size), alpha, k)

    def hk_apply(self, v, k: int):
        """Σ_{l ≤ k} M D^l v (the H^k Gram operator)."""
        v = np.asarray(v, dtype=float)
        out = self.mass_apply(v)
        cur = v
        for _ in range(k):
            cur = self.laplacian(cur)
            out = out + self.mass_apply(cur)
        return out

    def hk_inner(self, u, v, k: int) -> float:
        """Σ_{l ≤ k} ∫ Δ^{l/2}u Δ^{l/2}v, each term split symmetrically so that
        at most ⌊k/2⌋ discrete Laplacians act on either factor."""
        total = 0.0
        du = np.asarray(u, dtype=float)
        dv = np.asarray(v, dtype=float)
        for l in range(k + 1):
            if l % 2 == 0:
                if l:
                    du, dv = self.laplacian(du), self.laplacian(dv)
                total += float(np.dot(du, self.mass_apply(dv)))
            else:
                total += float(np.dot(du, self.stiff_apply(dv)))
        return total

    def hk_norm(self, u, k: int) -> float:
        return sqrt(max(self.hk_inner(u, u, k), 0.0))

    def seminorm_sq(self, u, l: int) -> float:
        """∫|Δ^{l/2} u|² = u·M D^l u, evaluated symmetrically."""
        cur = np.asarray(u, dtype=float)
        for _ in range(l // 2):
            cur = self.laplacian(cur)
        band = self.stiff_apply if l % 2 else self.mass_apply
        return float(np.dot(cur, band(cur)))

    def hminus_norm(self, f, k: int) -> float:
        """⟨f, (Δ+1)^{-k} f⟩^{1/2}, the spectral H^{-k} proxy."""
        f = np.asarray(f, dtype=float)
        return sqrt(max(float(np.dot(f, self.mass_apply(self.inverse_power(f, 1.0, k)))), 0.0))

    def dense(self, band) -> np.ndarray:
        p = self.degree
        n = self.size
        out = np.zeros((n, n))
        for d in range(p + 1):
            diag = band[p - d, d:]
            idx = np.arange(n - d)
            out[idx, idx + d] = diag
            out[idx + d, idx] = diag
        return out

    @cached_property
    def mass_dense(self) -> np.ndarray:
        return self.dense(self.mass_banded)

    @cached_property
    def stiff_dense(self) -> np.ndarray:
        return self.dense(self.stiff_banded)

    def eigenvalues(self, count: int = 10) -> np.ndarray:
        vals = eigh(self.stiff_dense, self.mass_dense, eigvals_only=True, subset_by_index=[0, count - 1])
        return vals

    @cached_property
    def pencil_basis(self):
        """Generalized eigenpairs (S v = λ M v, vᵀ M v = 1)."""
        return eigh(self.stiff_dense, self.mass_dense)

    # evaluation and integration ---------------------------------------------------------

    def _full(self, u):
        u = np.asarray(u, dtype=float)
        if not self._offset:
            return u
        return np.concatenate([[0.0], u, [0.0]])

    def evaluate(self, u, r, deriv: int = 0):
        """Interpolant (or its r-derivative) at radii r."""
        r = np.asarray(r, dtype=float)
        full = self._full(u)
        bp = self.breakpoints
        e = np.clip(np.searchsorted(bp, r, side="right") - 1, 0, bp.size - 2)
        out = np.empty(r.shape)
        p = self.degree
        for el in np.unique(e):
            sel = e == el
            a, b = bp[el], bp[el + 1]
            t = 2.0 * (r[sel] - a) / (b - a) - 1.0
            mat = lagrange_matrix(self._ref, t, deriv)
            vals = mat @ full[el * p:el * p + p + 1]
            out[sel] = vals * (2.0 / (b - a)) ** deriv
        return out

    def quadrature(self):
        """Radii and dr-weights of the assembly quadrature (no volume factor)."""
        return self._quad_r, self._quad_w

    def at_quadrature(self, u, deriv: int = 0):
        full = self._full(u)
        p = self.degree
        q = self._tq.size
        ne = self.breakpoints.size - 1
        local = np.stack([full[e * p:e * p + p + 1] for e in range(ne)])
        mat = self._phi_q if deriv == 0 else self._dphi_q
        vals = local @ mat.T
        if deriv:
            h = np.diff(self.breakpoints)
            vals = vals * (2.0 / h)[:, None]
        return vals.reshape(ne * q)

    def volume_weights(self):
        ang = sphere_area(self.n - 1) * (1.0 if self.sector == 0 else 1.0 / self.n)
        return self._quad_w * ang * np.sin(self._quad_r) ** (self.n - 1)

    def integrate_power(self, u, q_exp: float) -> float:
        """∫ |u|^q over the sphere (angular factor included through its mean)."""
        vals = self.at_quadrature(u)
        return float(np.sum(np.abs(vals) ** q_exp * self.volume_weights()))

    def integrate_function(self, values_at_quadrature) -> float:
        return float(np.sum(values_at_quadrature * self.volume_weights()))

    def interpolate(self, profile) -> np.ndarray:
        """Nodal values of a callable radial profile."""
        return np.asarray(profile(self.nodes), dtype=float)
