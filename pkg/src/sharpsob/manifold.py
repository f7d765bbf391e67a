"""Model geometries (unit round sphere, flat torus) and fields on them.

Radial fields are described by a profile of the geodesic distance to a
center, optionally times a first spherical harmonic of the direction at the
center.  They carry exact derivative jets and are integrated by graded
Gauss-Legendre panels in the geodesic radius.  Everything else is sampled
on a product quadrature grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np

from .jets import Jet
from .quadrature import graded_breakpoints, panel_rule, sphere_area, sphere_rule
from .radial import (EUCLID, SPHERE, RadialJet, gradient_energy_density, laplacian_power,
                     shifted_power, smooth_step_jet)

SPHERE_KIND = "sphere"
TORUS_KIND = "torus"


@dataclass(frozen=True)
class ModelManifold:
    kind: str
    n: int
    periods: tuple | None = None
    cutoff_fraction: float = 0.75

    def __post_init__(self):
        if self.kind not in (SPHERE_KIND, TORUS_KIND):
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("dimension must be at least 2")
        if not 0.5 < self.cutoff_fraction < 1.0:
            raise ValueError("cutoff radius must lie strictly between inj/2 and inj")
        if self.kind == TORUS_KIND:
            per = self.periods if self.periods is not None else (2 * pi,) * self.n
            if len(per) != self.n or min(per) <= 0:
                raise ValueError("torus needs n positive periods")
            object.__setattr__(self, "periods", tuple(float(p) for p in per))

    @classmethod
    def sphere(cls, n: int) -> "ModelManifold":
        return cls(SPHERE_KIND, n)

    @classmethod
    def torus(cls, n: int, periods=None) -> "ModelManifold":
        return cls(TORUS_KIND, n, periods)

    @property
    def inj_radius(self) -> float:
        if self.kind == SPHERE_KIND:
            return pi
        return 0.5 * min(self.periods)

    @property
    def cutoff_radius(self) -> float:
        return self.cutoff_fraction * self.inj_radius

    @property
    def volume(self) -> float:
        if self.kind == SPHERE_KIND:
            return sphere_area(self.n)
        return float(np.prod(self.periods))

    @property
    def geometry(self) -> str:
        return SPHERE if self.kind == SPHERE_KIND else EUCLID

    @property
    def radial_extent(self) -> float:
        """Largest geodesic radius covered by a radial field."""
        return pi if self.kind == SPHERE_KIND else self.inj_radius

    def radial_weight(self, r):
        r = np.asarray(r, dtype=float)
        w = np.sin(r) if self.kind == SPHERE_KIND else r
        return sphere_area(self.n - 1) * w ** (self.n - 1)

    def pole(self) -> np.ndarray:
        if self.kind == SPHERE_KIND:
            p = np.zeros(self.n + 1)
            p[-1] = 1.0
            return p
        return np.zeros(self.n)

    def check_point(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.kind == SPHERE_KIND:
            if z.shape[-1] != self.n + 1 or np.any(np.abs(np.linalg.norm(z, axis=-1) - 1.0) > 1e-12):
                raise ValueError("sphere points must be unit vectors in R^{n+1}")
        elif z.shape[-1] != self.n:
            raise ValueError("torus points need n coordinates")
        return z


# geodesics ------------------------------------------------------------------

@dataclass(frozen=True)
class GeodesicOps:
    manifold: ModelManifold

    def distance(self, p, q):
        m = self.manifold
        p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
        if m.kind == SPHERE_KIND:
            dot = np.sum(p * q, axis=-1)
            cross = np.linalg.norm(q - dot[..., None] * p, axis=-1)
            return np.arctan2(cross, dot)
        return np.linalg.norm(self._wrap(q - p), axis=-1)

    def _wrap(self, v):
        per = np.asarray(self.manifold.periods)
        return v - per * np.round(v / per)

    def tangent_frame(self, z) -> np.ndarray:
        """Orthonormal basis (rows) of the tangent space at z."""
        m = self.manifold
        if m.kind == TORUS_KIND:
            return np.eye(m.n)
        z = np.asarray(z, dtype=float)
        # Householder reflection sending the last basis vector to z
        e = np.zeros_like(z)
        e[-1] = 1.0
        v = e - z
        nv = np.linalg.norm(v)
        h = np.eye(z.size) if nv < 1e-15 else np.eye(z.size) - 2.0 * np.outer(v, v) / nv ** 2
        return h[:, :-1].T.copy()

    def exp_map(self, z, v):
        m = self.manifold
        z, v = np.asarray(z, dtype=float), np.asarray(v, dtype=float)
        if m.kind == TORUS_KIND:
            per = np.asarray(m.periods)
            return np.mod(z + v, per)
        if v.shape[-1] == m.n:  # tangent coordinates in the standard frame
            v = v @ self.tangent_frame(z)
        t = np.linalg.norm(v, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.where(t[..., None] > 0, v / np.where(t > 0, t, 1.0)[..., None], 0.0)
        out = np.cos(t)[..., None] * z + np.sin(t)[..., None] * u
        return out / np.linalg.norm(out, axis=-1, keepdims=True)

    def log_map(self, z, x, coordinates: bool = True):
        """Inverse of exp_map inside the injectivity radius.

        Returns tangent coordinates in the standard frame at z (or the ambient
        tangent vector when ``coordinates`` is False).
        """
        m = self.manifold
        z, x = np.asarray(z, dtype=float), np.asarray(x, dtype=float)
        if m.kind == TORUS_KIND:
            v = self._wrap(x - z)
            if np.any(np.linalg.norm(v, axis=-1) >= m.inj_radius):
                raise ValueError("log map requested at or beyond the cut locus")
            return v
        dot = np.sum(x * z, axis=-1)
        w = x - dot[..., None] * z
        nw = np.linalg.norm(w, axis=-1)
        t = np.arctan2(nw, dot)
        if np.any(t >= m.inj_radius * (1.0 - 1e-12)) or np.any((nw == 0) & (dot < 0)):
            raise ValueError("log map requested at the antipodal cut point")
        with np.errstate(invalid="ignore", divide="ignore"):
            v = np.where(nw[..., None] > 0, w * (t / np.where(nw > 0, nw, 1.0))[..., None], 0.0)
        if coordinates:
            return v @ self.tangent_frame(z).T
        return v


def geodesic_ops(m: ModelManifold) -> GeodesicOps:
    return GeodesicOps(m)


# fields ---------------------------------------------------------------------

@dataclass(frozen=True)
class RadialField:
    """f(d(center, x)) · Y(x), with Y ≡ 1 (sector 0) or the direction cosine
    ω_j of the geodesic from the center (sector 1, ``direction`` = j)."""

    manifold: ModelManifold
    center: np.ndarray
    profile: RadialJet
    sector: int = 0
    direction: int | None = None
    scale: float | None = None  # finest length scale, used to grade quadrature
    marks: tuple = field(default_factory=tuple)  # radii where the profile has kinks

    def quadrature(self, q: int = 16, panels_per_octave: float = 2.0):
        m = self.manifold
        scale = self.scale if self.scale is not None else m.inj_radius / 16
        ratio = 2.0 ** (1.0 / panels_per_octave)
        bp = graded_breakpoints(m.radial_extent, scale, ratio=ratio,
                                h_max=m.radial_extent / 24, marks=self.marks)
        return panel_rule(bp, q)

    @property
    def angular_mass(self) -> float:
        """Mean of Y² over the unit sphere of the tangent space."""
        return 1.0 if self.sector == 0 else 1.0 / self.manifold.n

    def values(self, x) -> np.ndarray:
        ops = GeodesicOps(self.manifold)
        x = np.asarray(x, dtype=float)
        d = ops.distance(self.center, x)
        val = self.profile(d)
        if self.sector == 0:
            return val
        if self.manifold.kind == TORUS_KIND:
            v = ops._wrap(x - self.center)
        else:
            v = ops.log_map(self.center, x)
        with np.errstate(invalid="ignore", divide="ignore"):
            ang = np.where(d > 0, v[..., self.direction] / np.where(d > 0, d, 1.0), 0.0)
        return val * ang


@dataclass(frozen=True)
class GridField:
    manifold: ModelManifold
    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray


def quadrature_grid(m: ModelManifold, resolution: int = 16):
    """Points and weights of the product grid on M; weights sum to Vol(M)."""
    if m.kind == SPHERE_KIND:
        return sphere_rule(m.n, resolution)
    axes = [np.arange(resolution) * p / resolution for p in m.periods]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m.n)
    w = np.full(mesh.shape[0], m.volume / mesh.shape[0])
    return mesh, w


def grid_field(m: ModelManifold, fn, resolution: int = 16) -> GridField:
    pts, w = quadrature_grid(m, resolution)
    return GridField(m, pts, w, np.asarray(fn(pts), dtype=float))


def constant_field(m: ModelManifold, c: float = 1.0, center=None) -> RadialField:
    center = m.pole() if center is None else center
    prof = RadialJet(lambda r, k: Jet.constant(c, k, np.shape(r)), name="const",
                     taylor_radius=np.inf, antipode_radius=np.inf)
    return RadialField(m, center, prof)


def integrate(m: ModelManifold, f, q: int = 16) -> float:
    if isinstance(f, GridField):
        return float(np.sum(f.weights * f.values))
    if not isinstance(f, RadialField):
        raise TypeError("expected a RadialField or GridField")
    r, w = f.quadrature(q)
    radial = np.sum(f.profile(r) * m.radial_weight(r) * w)
    if f.sector == 0:
        return float(radial)
    # the angular factor ω_j has zero mean on the tangent sphere
    pts, aw = sphere_rule(m.n - 1, 4)
    return float(radial * np.sum(aw * pts[:, f.direction]) / sphere_area(m.n - 1))


# radial Laplacians with both endpoints ------------------------------------------

def _reflected(prof: RadialJet) -> RadialJet:
    """s ↦ f(π - s): the profile seen from the antipode."""

    def jet_fn(s, order):
        j = prof.jet(pi - s, order)
        sign = (-1.0) ** np.arange(order + 1)
        return Jet(j.c * sign.reshape((-1,) + (1,) * (j.c.ndim - 1)))

    return RadialJet(jet_fn, name=f"reflect({prof.name})", taylor_radius=prof.antipode_radius)


def sphere_shifted_power(prof: RadialJet, n: int, times: int, alpha: float = 0.0,
                         sector: int = 0) -> RadialJet:
    """(Δ+α)^times on a sphere profile, using the antipodal chart near r = π."""
    near0 = shifted_power(prof, n, times, alpha, SPHERE, sector)
    ant = prof.antipode_radius
    if sector or ant <= 0.0:
        return near0
    far = shifted_power(_reflected(prof), n, times, alpha, SPHERE, 0)

    def jet_fn(r, order):
        r = np.asarray(r, dtype=float)
        use_far = r > pi - max(ant, 1e-3)
        if not np.any(use_far):
            return near0.jet(r, order)
        out = np.zeros((order + 1,) + r.shape)
        if np.any(~use_far):
            out[:, ~use_far] = near0.jet(r[~use_far], order).c
        jf = far.jet(pi - r[use_far], order).c
        sign = (-1.0) ** np.arange(order + 1)
        out[:, use_far] = jf * sign[:, None]
        return Jet(out)

    return RadialJet(jet_fn, prof.r_max, near0.name, prof.taylor_radius, ant)


def field_shifted_power(m: ModelManifold, f: RadialField, times: int, alpha: float = 0.0) -> RadialField:
    if m.kind == SPHERE_KIND:
        prof = sphere_shifted_power(f.profile, m.n, times, alpha, f.sector)
    else:
        prof = shifted_power(f.profile, m.n, times, alpha, EUCLID, f.sector)
    return RadialField(m, f.center, prof, f.sector, f.direction, f.scale, f.marks)


def radial_laplacian_apply(m: ModelManifold, f: RadialField, times: int = 1) -> RadialField:
    if not isinstance(f, RadialField):
        raise TypeError("radial_laplacian_apply needs a radial field")
    return field_shifted_power(m, f, times, 0.0)


def _energy_density(m: ModelManifold, f: RadialField, l: int, r) -> np.ndarray:
    if m.kind == SPHERE_KIND and l >= 2 and f.sector == 0:
        g = sphere_shifted_power(f.profile, m.n, l // 2, 0.0, 0)
        if l % 2 == 0:
            return g(r) ** 2
        return g.derivatives(r, 1)[1] ** 2
    return gradient_energy_density(f.profile, m.n, l, r, m.geometry, f.sector)


def seminorm_sq(m: ModelManifold, f: RadialField, l: int, q: int = 16) -> float:
    """∫_M |Δ^{l/2} f|², odd l meaning |∇ Δ^{(l-1)/2} f|²."""
    r, w = f.quadrature(q)
    dens = _energy_density(m, f, l, r)
    return float(f.angular_mass * np.sum(dens * m.radial_weight(r) * w))


def hk_norm(m: ModelManifold, f: RadialField, order: int, q: int = 16) -> float:
    if not isinstance(f, RadialField):
        raise TypeError("hk_norm needs a radial field with derivative jets")
    return float(np.sqrt(sum(seminorm_sq(m, f, l, q) for l in range(order + 1))))


def inner_product(m: ModelManifold, f: RadialField, g: RadialField, q: int = 16) -> float:
    """∫_M f g for two fields radial about the same center."""
    if f.sector != g.sector or f.direction != g.direction:
        return 0.0
    rf, wf = f.quadrature(q)
    rg, wg = g.quadrature(q)
    r, w = (rf, wf) if rf.size >= rg.size else (rg, wg)
    return float(f.angular_mass * np.sum(f.profile(r) * g.profile(r) * m.radial_weight(r) * w))


# cut-off and concentration ------------------------------------------------------

def cutoff_profile(m: ModelManifold) -> RadialJet:
    """χ_ϱ: 1 on [0, inj/2], 0 beyond ϱ, C^∞ step in between."""
    a, b = 0.5 * m.inj_radius, m.cutoff_radius

    def jet_fn(r, order):
        t = (Jet.variable(r, order) * -1.0 + b) * (1.0 / (b - a))
        return smooth_step_jet(t)

    return RadialJet(jet_fn, name="chi", taylor_radius=0.5 * a,
                     antipode_radius=m.inj_radius - b if m.kind == SPHERE_KIND else 0.0)


def rescale_profile(psi: RadialJet, mu: float, weight: float) -> RadialJet:
    """r ↦ μ^{-weight} ψ(r/μ)."""

    def jet_fn(r, order):
        j = psi.jet(np.asarray(r) / mu, order)
        fac = mu ** (-weight - np.arange(order + 1, dtype=float))
        return Jet(j.c * fac.reshape((-1,) + (1,) * (j.c.ndim - 1)))

    return RadialJet(jet_fn, psi.r_max * mu, f"{psi.name}[{mu:g}]", psi.taylor_radius * mu)


def concentrate(m: ModelManifold, psi: RadialJet, z, mu: float, weight: float) -> RadialField:
    """ψ_{z,μ}(x) = χ_ϱ(d(z,x)) μ^{-weight} ψ(exp_z^{-1}(x)/μ) for radial ψ."""
    if mu <= 0:
        raise ValueError("μ must be positive")
    chi = cutoff_profile(m)
    prof = chi * rescale_profile(psi, mu, weight)
    prof.antipode_radius = chi.antipode_radius  # χ vanishes identically there
    marks = (0.5 * m.inj_radius, m.cutoff_radius, mu)
    return RadialField(m, m.check_point(z), prof, scale=mu, marks=marks)


# chart transfer ----------------------------------------------------------------

@dataclass(frozen=True)
class ChartTransfer:
    manifold_integral: float
    euclidean_integral: float
    ratio: float


def _covariant_density(f: RadialJet, n: int, l: int, r, geometry: str) -> np.ndarray:
    d = f.derivatives(r, 2)
    if l == 1:
        return d[1] ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        if geometry == SPHERE:
            tang = np.where(r > 0, d[1] * np.cos(r) / np.sin(r), d[2])
        else:
            tang = np.where(r > 0, d[1] / r, d[2])
    return d[2] ** 2 + (n - 1) * tang ** 2


def chart_transfer_check(m: ModelManifold, f: RadialJet, support: float, order: int,
                         q: int = 24, mode: str = "auto") -> ChartTransfer:
    """Compare ∫_M |∇^l (f∘exp^{-1})|² with ∫_{R^n} |∇^l f|² for radial f.

    ``mode`` 'covariant' uses the full covariant derivative tensor (l ≤ 2);
    'laplacian' uses |Δ^{l/2}·|² and works for any l; 'auto' picks the first
    when possible.
    """
    if support > m.cutoff_radius:
        raise ValueError("profile support must lie inside the cutoff ball")
    if mode == "auto":
        mode = "covariant" if order <= 2 else "laplacian"
    bp = np.linspace(0.0, support, 17)
    r, w = panel_rule(bp, q)
    if mode == "covariant":
        if not 1 <= order <= 2:
            raise ValueError("covariant mode supports orders 1 and 2")
        dm = _covariant_density(f, m.n, order, r, m.geometry)
        de = _covariant_density(f, m.n, order, r, EUCLID)
    else:
        g_m = laplacian_power(f, m.n, order // 2, m.geometry)
        g_e = laplacian_power(f, m.n, order // 2, EUCLID)
        if order % 2 == 0:
            dm, de = g_m(r) ** 2, g_e(r) ** 2
        else:
            dm, de = g_m.derivatives(r, 1)[1] ** 2, g_e.derivatives(r, 1)[1] ** 2
    mi = float(np.sum(dm * m.radial_weight(r) * w))
    ei = float(np.sum(de * sphere_area(m.n - 1) * r ** (m.n - 1) * w))
    ratio = mi / ei if ei > 0 else float("nan")
    return ChartTransfer(mi, ei, ratio)


def compact_bump(support: float) -> RadialJet:
    """A C^∞ radial bump equal to exp(1 - 1/(1 - (r/R)²)) inside radius R."""

    def jet_fn(r, order):
        t = Jet.variable(r, order) * (1.0 / support)
        inside = t.value < 1.0
        safe = Jet(t.c.copy())
        safe.c[0] = np.where(inside, t.value, 0.0)
        val = (1.0 - 1.0 / (1.0 - safe * safe)).exp()
        val.c[:, ~inside] = 0.0
        return val

    return RadialJet(jet_fn, support, "bump", 0.5 * support)
