"""The modified bubble W = Θ_α·B_{z,μ}, its parameter derivatives Z̃_j, the
piecewise weight families, and audits of the almost-solution estimates.

Every object here is radial about the concentration center z (Z̃_j for
j ≥ 1 carries the direction cosine ω_j), so all derivatives come from exact
jets.  Θ_α(z, x) = χ_ϱ(d) h(√α d) with

    h(t) = 1                           t ≤ 1
    h(t) = exp(-m(t)(t - 1)/2)         t > 1,   m = C^∞ step from 0 to 1 on [1, 2]

which equals e^{1/2} e^{-t/2} for t ≥ 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log, sqrt

import numpy as np

from .euclid import Dimensions, bubble_profile, dilation_profile
from .jets import Jet
from .manifold import (SPHERE_KIND, GeodesicOps, ModelManifold, RadialField, cutoff_profile,
                       sphere_shifted_power)
from .quadrature import graded_breakpoints, panel_rule, refine_interval, sphere_area
from .radial import EUCLID, RadialJet, shifted_power, smooth_step_jet


# parameters -------------------------------------------------------------------

@dataclass(frozen=True)
class ConcentrationParams:
    manifold: ModelManifold
    dims: Dimensions
    z: np.ndarray
    mu: float
    alpha: float
    tau: float = 1.0

    def __post_init__(self):
        if self.manifold.n != self.dims.n:
            raise ValueError("manifold dimension differs from dims.n")
        if self.mu <= 0:
            raise ValueError("μ must be positive")
        if self.alpha < 1:
            raise ValueError("α must be at least 1")
        if self.tau > 1:
            raise ValueError("τ must not exceed 1")
        if not self.alpha * self.mu ** 2 < self.tau:
            raise ValueError(f"inadmissible parameters: αμ² = {self.alpha * self.mu ** 2:.3g} ≥ τ = {self.tau:.3g}")
        if not 1.0 / sqrt(self.alpha) < 0.5 * self.manifold.inj_radius:
            raise ValueError("need 1/√α < inj/2")
        object.__setattr__(self, "z", self.manifold.check_point(np.asarray(self.z, dtype=float)))

    @classmethod
    def at_pole(cls, manifold, dims, mu, alpha, tau=1.0):
        return cls(manifold, dims, manifold.pole(), mu, alpha, tau)

    @classmethod
    def from_ratio(cls, manifold, dims, alpha, alpha_mu2, tau=1.0):
        """Parameters at the pole with αμ² prescribed."""
        return cls.at_pole(manifold, dims, sqrt(alpha_mu2 / alpha), alpha, tau)

    @property
    def alpha_mu2(self) -> float:
        return self.alpha * self.mu ** 2

    @property
    def sqa_mu(self) -> float:
        return sqrt(self.alpha) * self.mu

    @property
    def core_radius(self) -> float:
        """The radius 1/√α where Θ stops being identically one."""
        return 1.0 / sqrt(self.alpha)

    def with_center(self, z) -> "ConcentrationParams":
        return ConcentrationParams(self.manifold, self.dims, z, self.mu, self.alpha, self.tau)

    def with_mu(self, mu) -> "ConcentrationParams":
        return ConcentrationParams(self.manifold, self.dims, self.z, mu, self.alpha, self.tau)


# the cut-off h and Θ -----------------------------------------------------------

def h_jet(t: Jet) -> Jet:
    step = smooth_step_jet(t - 1.0)
    return (step * (t - 1.0) * -0.5).exp()


def h_value(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return h_jet(Jet.variable(t, 0)).value


def h_profile(alpha: float) -> RadialJet:
    """r ↦ h(√α r)."""
    sa = sqrt(alpha)

    def jet_fn(r, order):
        return h_jet(Jet.variable(r, order) * sa)

    return RadialJet(jet_fn, name="h", taylor_radius=0.5 / sa, antipode_radius=np.inf)


@dataclass(frozen=True)
class CutoffProfile:
    """h and χ_ϱ for one manifold and one α."""

    manifold: ModelManifold
    alpha: float

    @property
    def h(self) -> RadialJet:
        return h_profile(self.alpha)

    @property
    def chi(self) -> RadialJet:
        return cutoff_profile(self.manifold)

    @property
    def theta(self) -> RadialJet:
        return theta_profile(self.manifold, self.alpha)


def theta_profile(m: ModelManifold, alpha: float) -> RadialJet:
    chi = cutoff_profile(m)
    prof = chi * h_profile(alpha)
    return RadialJet(prof.jet, name="Theta", taylor_radius=prof.taylor_radius,
                     antipode_radius=chi.antipode_radius)


def h_derivative_constants(order: int, t_max: float = 40.0, samples: int = 4000) -> np.ndarray:
    """Measured C_l = sup_{t ≥ 1} |h^{(l)}(t)| e^{t/2}, l = 0..order."""
    t = np.linspace(1.0, t_max, samples)
    d = h_jet(Jet.variable(t, order)).derivatives()
    return np.max(np.abs(d) * np.exp(t / 2.0), axis=1)


def theta_eval(params: ConcentrationParams, x, order: int = 0) -> np.ndarray:
    """Θ_α(z, x), or its ``order``-th radial derivative, at points x."""
    d = GeodesicOps(params.manifold).distance(params.z, x)
    return theta_profile(params.manifold, params.alpha).derivatives(d, order)[order]


# weights -------------------------------------------------------------------------

def _branch(dims: Dimensions) -> str:
    n, k = dims.n, dims.k
    if n == 2 * k + 1:
        return "odd"
    if (k == 1 and n >= 4) or (k >= 2 and n == 2 * k + 2):
        return "mid"
    if k >= 2 and n >= 2 * k + 3:
        return "high"
    raise ValueError(f"no weight branch for {dims}")


def eta(dims: Dimensions, t):
    t = np.asarray(t, dtype=float)
    b = _branch(dims)
    if b == "odd":
        with np.errstate(divide="ignore"):
            return np.where(t > 0, t * (1.0 + np.abs(np.log(np.where(t > 0, t, 1.0)))), 0.0)
    if b == "mid":
        return t ** 1.5
    return t ** 2


def sigma(dims: Dimensions) -> float:
    return {"odd": 0.5, "mid": 0.75, "high": 1.0}[_branch(dims)]


def gamma_rate(dims: Dimensions, alpha: float, mu: float) -> float:
    n, k = dims.n, dims.k
    sm = sqrt(alpha) * mu
    if n == 2 * k + 1:
        return sm
    if n == 2 * k + 2:
        return alpha * mu ** 2 * (1.0 + abs(log(sm)))
    return alpha * mu ** 2


def Psi(t):
    t = np.asarray(t, dtype=float)
    return np.where(t < 1.0, 1.0, np.exp(-t / 2.0))


def Psi_eps(t, eps: float):
    if not 0.0 < eps < 1.0:
        raise ValueError("ε must lie in (0, 1)")
    t = np.asarray(t, dtype=float)
    return np.where(t < 1.0, 1.0, np.exp(-(1.0 - eps) * t))


def r_weight(params: ConcentrationParams, d):
    """r_{ν,α} = η(√α(μ + d)), defined for √α d ≤ 1."""
    d = np.asarray(d, dtype=float)
    return eta(params.dims, sqrt(params.alpha) * (params.mu + d))


def F_weight(params: ConcentrationParams, d):
    d = np.asarray(d, dtype=float)
    sa = sqrt(params.alpha)
    inner = sa * d <= 1.0
    outer = params.alpha ** params.dims.k * d ** (2 * params.dims.k) * np.exp(-sa * d / 2.0)
    return np.where(inner, eta(params.dims, sa * (params.mu + np.minimum(d, 1.0 / sa))), outer)


def bubble_weight(params: ConcentrationParams, d):
    """B_{z,μ} as a function of the distance to z."""
    return bubble_profile(params.dims, params.mu)(np.asarray(d, dtype=float))


@dataclass(frozen=True)
class WeightFamily:
    dims: Dimensions

    def eta(self, t):
        return eta(self.dims, t)

    @property
    def sigma(self) -> float:
        return sigma(self.dims)

    def gamma_rate(self, alpha, mu):
        return gamma_rate(self.dims, alpha, mu)

    Psi = staticmethod(Psi)
    Psi_eps = staticmethod(Psi_eps)
    r_weight = staticmethod(r_weight)
    F_weight = staticmethod(F_weight)


def weights_eval(dims: Dimensions, family: str, *args):
    """Evaluate one weight by name: eta(t), sigma(), gamma(α, μ), Psi(t),
    Psi_eps(t, ε), r(params, d), F(params, d)."""
    table = {
        "eta": lambda t: eta(dims, t),
        "sigma": lambda: sigma(dims),
        "gamma": lambda a, m: gamma_rate(dims, a, m),
        "Psi": Psi,
        "Psi_eps": Psi_eps,
        "r": r_weight,
        "F": F_weight,
    }
    if family not in table:
        raise KeyError(f"unknown weight family {family!r}")
    return table[family](*args)


# W and Z̃_j ----------------------------------------------------------------------

def _marks(params: ConcentrationParams):
    m = params.manifold
    a = params.core_radius
    return tuple(sorted({params.mu, a, 1.5 * a, 2.0 * a, 0.5 * m.inj_radius, m.cutoff_radius}))


def w_profile(params: ConcentrationParams) -> RadialJet:
    theta = theta_profile(params.manifold, params.alpha)
    b = bubble_profile(params.dims, params.mu)
    prof = theta * b
    return RadialJet(prof.jet, name="W", taylor_radius=prof.taylor_radius,
                     antipode_radius=theta.antipode_radius)


def z0_profile(params: ConcentrationParams) -> RadialJet:
    """Z̃_0 = μ ∂_μ W = -Θ (Z_0)_{z,μ}."""
    theta = theta_profile(params.manifold, params.alpha)
    prof = (theta * dilation_profile(params.dims, params.mu)).scaled(-1.0)
    return RadialJet(prof.jet, name="Zt0", taylor_radius=prof.taylor_radius,
                     antipode_radius=theta.antipode_radius)


def zj_profile(params: ConcentrationParams) -> RadialJet:
    """Radial factor of Z̃_j = μ ∂_{z_j} W = -μ (ΘB_{z,μ})'(d) ω_j."""
    w = w_profile(params)
    mu = params.mu
    return RadialJet(lambda r, k: w.jet(r, k + 1).derivative() * (-mu), name="Ztj",
                     taylor_radius=w.taylor_radius, antipode_radius=w.antipode_radius)


def rescaled_field(params: ConcentrationParams, which) -> RadialField:
    """W (``which`` = 'W') or Z̃_j (``which`` = j) as a radial field about z."""
    m = params.manifold
    common = dict(scale=params.mu, marks=_marks(params))
    if which == "W":
        return RadialField(m, params.z, w_profile(params), **common)
    j = int(which)
    if j == 0:
        return RadialField(m, params.z, z0_profile(params), **common)
    if not 1 <= j <= params.dims.n:
        raise IndexError(f"kernel index {j} outside 0..{params.dims.n}")
    return RadialField(m, params.z, zj_profile(params), sector=1, direction=j - 1, **common)


def kernel_fields(params: ConcentrationParams):
    return [rescaled_field(params, j) for j in range(params.dims.n + 1)]


def rescaled_eval(params: ConcentrationParams, which, x, order: int = 0) -> np.ndarray:
    """W or Z̃_j at points x; for order l ≥ 1 the l-th radial derivative of
    the profile times the angular factor."""
    f = rescaled_field(params, which)
    if order == 0:
        return f.values(x)
    ops = GeodesicOps(params.manifold)
    d = ops.distance(params.z, x)
    val = f.profile.derivatives(d, order)[order]
    if f.sector == 0:
        return val
    unit = RadialField(params.manifold, params.z, RadialJet(lambda r, k: Jet.constant(1.0, k, np.shape(r))),
                       sector=1, direction=f.direction)
    return val * unit.values(x)


def center_derivative_fd(params: ConcentrationParams, j: int, x, step: float | None = None) -> np.ndarray:
    """μ ∂W/∂z_j by a centered difference along the geodesic exp_z(t v_j)."""
    m = params.manifold
    ops = GeodesicOps(m)
    if step is None:
        step = 1e-5 * m.inj_radius
    v = np.zeros(m.n)
    v[j - 1] = 1.0
    zp = ops.exp_map(params.z, step * v)
    zm = ops.exp_map(params.z, -step * v)
    wp = rescaled_field(params.with_center(zp), "W").values(x)
    wm = rescaled_field(params.with_center(zm), "W").values(x)
    return params.mu * (wp - wm) / (2.0 * step)


def scale_derivative_fd(params: ConcentrationParams, x, rel_step: float = 1e-5) -> np.ndarray:
    """μ ∂W/∂μ by a centered difference in log μ."""
    wp = rescaled_field(params.with_mu(params.mu * np.exp(rel_step)), "W").values(x)
    wm = rescaled_field(params.with_mu(params.mu * np.exp(-rel_step)), "W").values(x)
    return (wp - wm) / (2.0 * rel_step)


# residuals ----------------------------------------------------------------------

def shifted_power_profile(params: ConcentrationParams, prof: RadialJet, sector: int = 0,
                          times: int | None = None, alpha: float | None = None) -> RadialJet:
    """(Δ+α)^times of a profile on the model manifold (defaults: k and params.alpha)."""
    m = params.manifold
    times = params.dims.k if times is None else times
    alpha = params.alpha if alpha is None else alpha
    if m.kind == SPHERE_KIND:
        return sphere_shifted_power(prof, m.n, times, alpha, sector)
    return shifted_power(prof, m.n, times, alpha, EUCLID, sector)


def residual_profile(params: ConcentrationParams, which="B") -> RadialJet:
    """R_B = (Δ+α)^k W - W^{2♯-1}, or the linearized residual of Z̃_j,
    (Δ+α)^k Z̃_j - (2♯-1) W^{2♯-2} Z̃_j (radial factor)."""
    p = params.dims.power
    w = w_profile(params)
    if which == "B":
        lw = shifted_power_profile(params, w)

        def jet_fn(r, order):
            wj = w.jet(r, order)
            return lw.jet(r, order) - _pos_power(wj, p)

        return RadialJet(jet_fn, name="R_B", taylor_radius=w.taylor_radius,
                         antipode_radius=w.antipode_radius)
    fz = rescaled_field(params, which)
    lz = shifted_power_profile(params, fz.profile, fz.sector)

    def jet_fn_z(r, order):
        return lz.jet(r, order) - _pos_power(w.jet(r, order), p - 1.0) * fz.profile.jet(r, order) * p

    return RadialJet(jet_fn_z, name="R_Z", taylor_radius=w.taylor_radius,
                     antipode_radius=w.antipode_radius)


def _pos_power(j: Jet, a: float) -> Jet:
    """Jet of f^a where f > 0, zero jet where f = 0 (W vanishes beyond ϱ)."""
    pos = j.value > 0.0
    if np.all(pos):
        return j ** a
    out = np.zeros_like(j.c)
    if np.any(pos):
        sub = Jet(j.c[:, pos]) ** a
        out[:, pos] = sub.c
    return Jet(out)


def inner_bound(params: ConcentrationParams, d):
    return params.alpha * (params.mu + d) ** (2 - 2 * params.dims.k) * bubble_weight(params, d)


def outer_bound(params: ConcentrationParams, d):
    n, k = params.dims.n, params.dims.k
    return (params.alpha ** k * params.mu ** params.dims.decay * d ** (2 * k - n)
            * np.exp(-sqrt(params.alpha) * d / 2.0))


def audit_grid(params: ConcentrationParams, per_decade: int = 40):
    """Log-spaced radii from μ/100 to the cut-off radius, plus the seams."""
    lo = params.mu * 1e-2
    hi = params.manifold.cutoff_radius
    count = int(per_decade * np.log10(hi / lo)) + 1
    r = np.geomspace(lo, hi, count)
    a = params.core_radius
    return np.unique(np.concatenate([r, [a, 2 * a]]))


@dataclass(frozen=True)
class ResidualAudit:
    which: object
    alpha: float
    mu: float
    inner_ratio: float
    outer_ratio: float
    hminus_k: float
    grid_size: int


def residual_audit(params: ConcentrationParams, which="B", grid=None, hminus: bool = True,
                   sem_degree: int = 12) -> ResidualAudit:
    """Sup ratios of |R| against the inner and outer bounds, plus the H^{-k}
    proxy ⟨R, (Δ+1)^{-k} R⟩^{1/2} from the radial spectral-element space."""
    r = audit_grid(params) if grid is None else np.asarray(grid, dtype=float)
    if r.size and np.min(r[r > 0]) > params.mu / 3.0:
        raise ValueError("grid does not resolve the scale μ (need points below μ/3)")
    res = residual_profile(params, which)
    vals = np.abs(res(r))
    a = params.core_radius
    inner = r <= a
    outer = (r >= a) & (r < params.manifold.cutoff_radius)
    ir = float(np.max(vals[inner] / inner_bound(params, r[inner]))) if np.any(inner) else float("nan")
    orr = float(np.max(vals[outer] / outer_bound(params, r[outer]))) if np.any(outer) else float("nan")
    hm = float("nan")
    if hminus:
        from .sem import RadialSEM

        sector = 0 if which in ("B", 0) else 1
        space = RadialSEM.for_params(params, degree=sem_degree, sector=sector)
        hm = space.hminus_norm(res(space.nodes), params.dims.k)
    return ResidualAudit(which, params.alpha, params.mu, ir, orr, hm, int(r.size))


def residual_fd_check(params: ConcentrationParams, radii, which="B", dps: int = 60):
    """Residual at the given radii from the jets and from high-precision
    finite differences of a closed-form W (mpmath); returns both arrays."""
    import mpmath as mp

    from .manifold import SPHERE_KIND

    if which != "B":
        raise ValueError("the finite-difference oracle covers R_B only")
    n, k, p = params.dims.n, params.dims.k, params.dims.power
    m = params.manifold
    rho, s, mu = params.dims.rho, params.dims.decay, params.mu
    a_chi, b_chi = 0.5 * m.inj_radius, m.cutoff_radius
    sa = sqrt(params.alpha)

    def psi(t):
        return mp.e ** (-1 / t) if t > 0 else mp.mpf(0)

    def step(t):
        if t <= 0:
            return mp.mpf(0)
        if t >= 1:
            return mp.mpf(1)
        return psi(t) / (psi(t) + psi(1 - t))

    def w_fn(r):
        chi = step((b_chi - r) / (b_chi - a_chi))
        t = sa * r
        h = mp.mpf(1) if t <= 1 else mp.e ** (-step(t - 1) * (t - 1) / 2)
        return chi * h * (mu / (mu ** 2 + rho * r ** 2)) ** s

    sphere = m.kind == SPHERE_KIND

    def lap(f):
        def g(r):
            d1 = mp.diff(f, r, 1)
            d2 = mp.diff(f, r, 2)
            first = (n - 1) * (mp.cot(r) if sphere else 1 / r) * d1
            return -d2 - first

        return g

    def shifted(f, times):
        for _ in range(times):
            prev = f
            lf = lap(prev)
            f = (lambda pv, lv: (lambda r: lv(r) + params.alpha * pv(r)))(prev, lf)
        return f

    fd = []
    with mp.workdps(dps):
        op = shifted(w_fn, k)
        for r in radii:
            rr = mp.mpf(float(r))
            fd.append(float(op(rr) - w_fn(rr) ** p))
    jet = residual_profile(params, "B")(np.asarray(radii, dtype=float))
    return np.asarray(jet), np.asarray(fd)


# convergence audit ----------------------------------------------------------------

def _radial_rule(params: ConcentrationParams, q: int = 20, per_octave: float = 3.0):
    m = params.manifold
    bp = graded_breakpoints(m.radial_extent, params.mu, ratio=2 ** (1 / per_octave),
                            h_max=min(m.radial_extent / 48, 0.25 * params.core_radius), marks=_marks(params))
    a = params.core_radius
    bp = refine_interval(bp, a, 2 * a, 8)
    bp = refine_interval(bp, 0.5 * m.inj_radius, m.cutoff_radius, 8)
    return panel_rule(bp, q)


def lebesgue_power_integral(params: ConcentrationParams, prof: RadialJet, l: int, q_exp: float,
                            sector: int = 0) -> float:
    """∫_M |Δ^{l/2} f|^{q} for a radial profile (even l) or |∇Δ^{(l-1)/2} f|^q (odd l)."""
    m = params.manifold
    r, w = _radial_rule(params)
    g = _power_density(m, prof, l, r, sector)
    return float(np.sum(np.abs(g) ** q_exp * m.radial_weight(r) * w))


def _power_density(m, prof, l, r, sector=0):
    geom = m.geometry
    if m.kind == SPHERE_KIND and sector == 0:
        g = sphere_shifted_power(prof, m.n, l // 2, 0.0, 0)
    else:
        g = shifted_power(prof, m.n, l // 2, 0.0, geom, sector)
    if l % 2 == 0:
        return g(r)
    return g.derivatives(r, 1)[1]


def euclid_power_integral(dims: Dimensions, l: int, q_exp: float, nodes: int = 600) -> float:
    from .quadrature import half_line_rule
    from .radial import laplacian_power

    r, w = half_line_rule(nodes, 1.0 / sqrt(dims.rho))
    g = laplacian_power(bubble_profile(dims), dims.n, l // 2, EUCLID)
    vals = g(r) if l % 2 == 0 else g.derivatives(r, 1)[1]
    return float(sphere_area(dims.n - 1) * np.sum(np.abs(vals) ** q_exp * r ** (dims.n - 1) * w))


def hk_inner(params: ConcentrationParams, f: RadialField, g: RadialField, order: int | None = None) -> float:
    """Σ_{l ≤ order} ∫ Δ^{l/2}f · Δ^{l/2}g for fields radial about the same center."""
    if f.sector != g.sector or f.direction != g.direction:
        return 0.0
    m = params.manifold
    order = params.dims.k if order is None else order
    r, w = _radial_rule(params)
    total = 0.0
    mass = 1.0 if f.sector == 0 else 1.0 / m.n
    for l in range(order + 1):
        a = _power_density(m, f.profile, l, r, f.sector)
        b = _power_density(m, g.profile, l, r, g.sector)
        dens = a * b
        if l % 2 == 1 and f.sector:
            fa = _power_density(m, f.profile, l - 1, r, f.sector)
            gb = _power_density(m, g.profile, l - 1, r, g.sector)
            radius = np.sin(r) if m.kind == SPHERE_KIND else r
            dens = dens + f.sector * (f.sector + m.n - 2) * fa * gb / radius ** 2
        total += float(np.sum(dens * m.radial_weight(r) * w))
    return mass * total


def field_hk_norm(params: ConcentrationParams, f: RadialField, order: int | None = None) -> float:
    return sqrt(max(hk_inner(params, f, f, order), 0.0))


def kernel_gram_manifold(params: ConcentrationParams) -> np.ndarray:
    """H^k(M) Gram matrix of Z̃_0..Z̃_n.  Entries between different sectors or
    directions vanish by symmetry and are evaluated as exact zeros."""
    fields = kernel_fields(params)
    size = len(fields)
    g = np.zeros((size, size))
    for a in range(size):
        for b in range(a, size):
            g[a, b] = g[b, a] = hk_inner(params, fields[a], fields[b])
    return g


def theta_correction_norm(params: ConcentrationParams) -> float:
    """Σ_l α^{k-l} ∫|Δ^{l/2}(μ ∂_{z_j}Θ · B_{z,μ})|² for one direction j."""
    theta = theta_profile(params.manifold, params.alpha)
    b = bubble_profile(params.dims, params.mu)
    mu = params.mu

    def jet_fn(r, order):
        return theta.jet(r, order + 1).derivative() * b.jet(r, order) * (-mu)

    prof = RadialJet(jet_fn, name="dTheta B", taylor_radius=np.inf, antipode_radius=theta.antipode_radius)
    f = RadialField(params.manifold, params.z, prof, sector=1, direction=0, scale=params.mu,
                    marks=_marks(params))
    k = params.dims.k
    # hk_inner sums all orders up to ``order``; difference out one seminorm at a time
    total = 0.0
    prev = 0.0
    for l in range(k + 1):
        cum = hk_inner(params, f, f, order=l)
        total += params.alpha ** (k - l) * (cum - prev)
        prev = cum
    return total


@dataclass(frozen=True)
class ConvergencePoint:
    alpha: float
    mu: float
    alpha_mu2: float
    power_integrals: tuple      # ∫|Δ^{l/2}W|^{2♯_{k-l}}, l = 0..k
    euclid_integrals: tuple
    lower_to_full: float        # ‖W‖_{H^{k-1}} / ‖W‖_{H^k}
    gram: np.ndarray
    gram_limit: np.ndarray
    test_product: float         # ⟨W, ψ_{z,μ}⟩_{H^k}
    test_limit: float           # ⟨B, ψ⟩_{Ḣ^k}
    theta_correction: float


@dataclass(frozen=True)
class ConvergenceReport:
    points: list = field(default_factory=list)

    def relative_errors(self, l: int):
        return [abs(p.power_integrals[l] - p.euclid_integrals[l]) / p.euclid_integrals[l] for p in self.points]

    def gram_offdiag_ratios(self):
        out = []
        for p in self.points:
            g = p.gram
            off = g - np.diag(np.diag(g))
            out.append(float(np.max(np.abs(off)) / np.min(np.diag(g))))
        return out

    def theta_correction_slope(self) -> float:
        x = np.log([p.alpha_mu2 for p in self.points])
        y = np.log([p.theta_correction for p in self.points])
        return float(np.polyfit(x, y, 1)[0])


def test_profile(dims: Dimensions) -> RadialJet:
    """ψ(y) = exp(-|y|²/2), a smooth rapidly decaying Euclidean test profile."""

    def jet_fn(r, order):
        x = Jet.variable(r, order)
        return (x * x * -0.5).exp()

    return RadialJet(jet_fn, name="gauss", taylor_radius=0.5)


def convergence_audit(sequence) -> ConvergenceReport:
    from .euclid import hk_inner_matrix, kernel_gram
    from .manifold import concentrate

    points = []
    for params in sequence:
        dims = params.dims
        k = dims.k
        w = rescaled_field(params, "W")
        pw = []
        eu = []
        for l in range(k + 1):
            q = dims.two_sharp_l(k - l)
            pw.append(lebesgue_power_integral(params, w.profile, l, q))
            eu.append(euclid_power_integral(dims, l, q))
        full = field_hk_norm(params, w, k)
        low = field_hk_norm(params, w, k - 1)
        gram = kernel_gram_manifold(params)
        limit = np.diag(np.diag(kernel_gram(dims)))
        psi = test_profile(dims)
        conc = concentrate(params.manifold, psi, params.z, params.mu, dims.decay)
        tp = hk_inner(params, w, conc)
        tl = hk_inner_matrix(dims, [(bubble_profile(dims), 0, None), (psi, 0, None)])[0, 1]
        points.append(ConvergencePoint(params.alpha, params.mu, params.alpha_mu2, tuple(pw), tuple(eu),
                                       low / full, gram, limit, tp, float(tl),
                                       theta_correction_norm(params)))
    return ConvergenceReport(points)
