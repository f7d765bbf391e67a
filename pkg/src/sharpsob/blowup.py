"""Projected linear solves, the fixed-point construction of φ, the critical
equation (constant and Newton branches), bubble fitting and the pointwise
remainder audit.

All fields are radial about the concentration center and live in the radial
spectral-element space of :mod:`sharpsob.sem` (sector 0 for zonal fields,
sector 1 for the translation directions).  The linear problem is written in
Green form

    φ - (Δ+α)^{-k}(p W^{p-1} φ) - Σ_j λ_j Z̃_j = (Δ+α)^{-k} R,    ⟨φ, Z̃_j⟩_{H^k} = 0,

with p = 2♯-1, which is the same equation as (Δ+α)^kφ - pW^{p-1}φ =
R + Σ_j λ_j (Δ+α)^k Z̃_j and keeps the augmented matrix well scaled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import sqrt

import numpy as np
from scipy.linalg import lu_factor, lu_solve, qr, svd

from .euclid import Dimensions
from .rescaled import (ConcentrationParams, F_weight, bubble_weight, eta, residual_profile,
                       rescaled_field, shifted_power_profile, w_profile)
from .manifold import GeodesicOps
from .sem import RadialSEM


class RegimeFailure(RuntimeError):
    """Raised when a solve leaves the regime where it is well posed."""


# nonlinearity -----------------------------------------------------------------------

@dataclass(frozen=True)
class NonlinearityParams:
    dims: Dimensions
    theta: float
    constant: float

    def __post_init__(self):
        hi = min(1.0, self.dims.power - 1.0)
        if not 0.0 < self.theta < hi:
            raise ValueError(f"θ must lie in (0, {hi:g})")

    @classmethod
    def measured(cls, dims: Dimensions, samples: int = 400) -> "NonlinearityParams":
        theta = min(1.0, dims.power - 1.0) / 2.0
        b = np.geomspace(1e-3, 1e3, samples)[:, None]
        a = np.concatenate([-np.geomspace(1e-4, 1e4, samples), np.geomspace(1e-4, 1e4, samples)])[None, :]
        g = _g_value(dims.power, b, a)
        rhs = _bound_shape(dims.power, theta, b, a)
        return cls(dims, theta, float(np.max(np.abs(g) / rhs)))


def _g_value(p, b, a):
    total = np.maximum(b + a, 0.0)
    return total ** p - b ** p - p * b ** (p - 1.0) * a


def _bound_shape(p, theta, b, a):
    aa = np.abs(a)
    return aa * (aa ** (p - 1.0) + b ** (p - 1.0 - theta) * aa ** theta)


@dataclass(frozen=True)
class NonlinearityValue:
    value: np.ndarray
    bound: np.ndarray


def scalar_nonlinearity(dims: Dimensions, b, a, params: NonlinearityParams | None = None) -> NonlinearityValue:
    """G(b, a) = (b+a)_+^{p} - b^{p} - p b^{p-1} a and its bound C|a|(|a|^{p-1} + b^{p-1-θ}|a|^θ)."""
    b = np.asarray(b, dtype=float)
    a = np.asarray(a, dtype=float)
    if np.any(b < 0):
        raise ValueError("b must be non-negative")
    params = NonlinearityParams.measured(dims) if params is None else params
    p = dims.power
    return NonlinearityValue(_g_value(p, b, a), params.constant * _bound_shape(p, params.theta, b, a))


# the linear problem ---------------------------------------------------------------

@dataclass
class SectorSystem:
    """The Green-form operator and its augmented factorization in one sector."""

    space: RadialSEM
    kernel: np.ndarray          # nodal Z̃ in this sector (one direction)
    potential: np.ndarray       # p W^{p-1} at the nodes
    alpha: float
    k: int
    kernel_powers: list | None = None   # nodal Δ^l Z̃, l = 0..k, from exact jets

    @cached_property
    def green_matrix(self) -> np.ndarray:
        return self.space.inverse_matrix(self.alpha, self.k)

    @cached_property
    def operator(self) -> np.ndarray:
        """I - (Δ+α)^{-k} ∘ V."""
        return np.eye(self.space.size) - self.green_matrix * self.potential[None, :]

    @cached_property
    def constraint(self) -> np.ndarray:
        """Row v ↦ ⟨v, Z̃⟩_{H^k}, normalized so that it maps Z̃ to one.

        With exact Δ^l Z̃ available the row is M Σ_l Δ^l Z̃; repeated discrete
        Laplacians of Z̃ would amplify its interpolation error by λ_max^l.
        """
        if self.kernel_powers is None:
            c = self.space.hk_apply(self.kernel, self.k)
        else:
            c = self.space.mass_apply(np.sum(self.kernel_powers, axis=0))
        return c / float(np.dot(c, self.kernel))

    def kernel_inner(self, v) -> float:
        """⟨v, Z̃⟩_{H^k} through the constraint row (unnormalized)."""
        if self.kernel_powers is None:
            return float(np.dot(self.space.hk_apply(self.kernel, self.k), v))
        return float(np.dot(self.space.mass_apply(np.sum(self.kernel_powers, axis=0)), v))

    @cached_property
    def augmented(self):
        n = self.space.size
        a = np.zeros((n + 1, n + 1))
        a[:n, :n] = self.operator
        a[:n, n] = -self.kernel
        a[n, :n] = self.constraint
        return lu_factor(a)

    def solve(self, rhs_green: np.ndarray):
        """Solve with right-hand side (Δ+α)^{-k}R already applied."""
        sol = lu_solve(self.augmented, np.concatenate([rhs_green, [0.0]]))
        return sol[:-1], float(sol[-1])

    def project(self, v):
        return v - float(np.dot(self.constraint, v)) * self.kernel


@dataclass
class LinearizedProblem:
    params: ConcentrationParams
    degree: int = 12
    sectors: tuple = (0, 1)
    systems: dict = field(default_factory=dict)

    def __post_init__(self):
        p = self.params
        dims = p.dims
        for sector in self.sectors:
            space = RadialSEM.for_params(p, self.degree, sector)
            w = w_profile(p)(space.nodes)
            pot = dims.power * np.maximum(w, 0.0) ** (dims.power - 1.0)
            which = 0 if sector == 0 else 1
            prof = rescaled_field(p, which).profile
            powers = [prof(space.nodes)]
            for l in range(1, dims.k + 1):
                powers.append(shifted_power_profile(p, prof, sector, times=l, alpha=0.0)(space.nodes))
            self.systems[sector] = SectorSystem(space, powers[0], pot, p.alpha, dims.k, powers)

    @property
    def k(self) -> int:
        return self.params.dims.k

    def space(self, sector: int = 0) -> RadialSEM:
        return self.systems[sector].space

    def w_nodal(self) -> np.ndarray:
        return w_profile(self.params)(self.space(0).nodes)

    def apply(self, phi, sector: int = 0):
        """(Δ+α)^kφ - pW^{p-1}φ on the discrete space."""
        s = self.systems[sector]
        return s.space.shifted_power(phi, self.params.alpha, self.k) - s.potential * phi

    def project(self, v, sector: int = 0):
        return self.systems[sector].project(v)

    def kernel_products(self, v, sector: int = 0) -> float:
        return self.systems[sector].kernel_inner(v)

    def condition_number(self, sector: int = 0) -> float:
        """cond of Π∘(I - (Δ+α)^{-k}V) on K̃^⊥ in H^k-orthonormal coordinates."""
        s = self.systems[sector]
        lam, vecs = s.space.pencil_basis
        lam = np.maximum(lam, 0.0)
        g = sum(lam ** l for l in range(self.k + 1))
        sg = np.sqrt(g)
        mq = s.space.mass_dense @ vecs                      # Q^T M = (M Q)^T
        core = mq.T @ (s.potential[:, None] * vecs)
        inv = (lam + self.params.alpha) ** (-float(self.k))
        op = np.eye(lam.size) - (sg * inv)[:, None] * core / sg[None, :]
        zc = sg * (mq.T @ s.kernel)
        zc /= np.linalg.norm(zc)
        # orthonormal completion of zc; its first column spans zc
        basis = qr(np.column_stack([zc, np.eye(lam.size)[:, :lam.size - 1]]))[0]
        perp = basis[:, 1:]
        sv = svd(perp.T @ op @ perp, compute_uv=False)
        return float(sv[0] / sv[-1])


def linear_solve_projected(problem: LinearizedProblem, rhs, sector: int = 0, cond_limit: float = 1e10):
    """Solve (Δ+α)^kφ - pW^{p-1}φ = R + Σλ_j(Δ+α)^kZ̃_j with φ ⊥ Z̃_j.

    ``rhs`` holds nodal values of R in the given sector.  Returns φ and the
    n+1 multipliers (only the one belonging to the sector can be non-zero).
    """
    s = problem.systems[sector]
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (s.space.size,):
        raise ValueError("right-hand side does not match the discretization")
    green = s.space.inverse_power(rhs, problem.params.alpha, problem.k)
    phi, lam = s.solve(green)
    if not np.all(np.isfinite(phi)):
        raise RegimeFailure("augmented system is singular")
    check = np.linalg.norm(s.operator @ phi - lam * s.kernel - green)
    scale = np.linalg.norm(green) + np.linalg.norm(phi)
    if scale > 0 and check > cond_limit * 1e-16 * scale:
        raise RegimeFailure(f"augmented system ill-conditioned (backward residual {check / scale:.2e})")
    mult = np.zeros(problem.params.dims.n + 1)
    mult[0 if sector == 0 else 1] = lam
    return phi, mult


# multipliers ------------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaReport:
    ratios: np.ndarray
    eta_value: float
    sup_phi: float


def lambda_bound_audit(problem: LinearizedProblem, phi, lam) -> LambdaReport:
    p = problem.params
    e = float(eta(p.dims, p.sqa_mu))
    sup = float(np.max(np.abs(phi))) if np.size(phi) else 0.0
    denom = e + p.mu ** p.dims.decay * sup
    return LambdaReport(np.abs(np.asarray(lam)) / denom, e, sup)


# fixed point ------------------------------------------------------------------------

@dataclass
class FixedPointResult:
    params: ConcentrationParams
    phi: np.ndarray
    lam: float
    iterates: int
    increments: list
    ratios: list
    weighted_sup: float
    sup_ratio: float
    hk_norm_phi: float
    hk_norm_w: float
    residual_hminus: float
    residual_green: float
    at_noise_floor: bool
    problem: LinearizedProblem = field(repr=False)

    @property
    def nodes(self):
        return self.problem.space(0).nodes


def nonlinear_term(w, phi, p):
    return np.maximum(w + phi, 0.0) ** p - w ** p - p * w ** (p - 1.0) * phi


def fixed_point_construct(params: ConcentrationParams, degree: int = 12, tol: float = 1e-10,
                          max_iter: int = 50, threshold: float = 1e-2,
                          problem: LinearizedProblem | None = None,
                          noise_floor: float = 1e-6) -> FixedPointResult:
    """Iterate φ ↦ T(φ), the projected solve with R(φ) = -R_B + G(φ).

    H^k distances of increments cannot drop below the rounding level of
    the discrete H^k form.  Once an increment falls under ``noise_floor``
    times ‖φ‖_{H^k}, increments that stop shrinking count as convergence
    (``at_noise_floor``) instead of non-contraction.
    """
    if params.alpha_mu2 > threshold:
        raise ValueError(f"αμ² = {params.alpha_mu2:.3g} above the fixed-point threshold {threshold:g}")
    problem = LinearizedProblem(params, degree, sectors=(0,)) if problem is None else problem
    space = problem.space(0)
    k, p = params.dims.k, params.dims.power
    w = np.maximum(problem.w_nodal(), 0.0)
    rb = residual_profile(params, "B")(space.nodes)
    phi = np.zeros(space.size)
    lam = 0.0
    increments, ratios = [], []
    bad = 0
    it = 0
    at_floor = False
    for it in range(1, max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            source = -rb + nonlinear_term(w, phi, p)
        if not np.all(np.isfinite(source)):
            raise RegimeFailure("fixed-point iterates diverged")
        new, mult = linear_solve_projected(problem, source)
        inc = space.hk_norm(new - phi, k)
        size = space.hk_norm(new, k)
        below = inc < noise_floor * size
        if increments:
            ratio = inc / increments[-1] if increments[-1] > 0 else 0.0
            if below and ratio >= 0.5:
                at_floor = True
                phi, lam = new, float(mult[0])
                increments.append(inc)
                break
            ratios.append(ratio)
            bad = bad + 1 if ratio >= 1.0 else 0
            if bad >= 3:
                raise RegimeFailure("fixed-point map is not contracting")
        increments.append(inc)
        phi, lam = new, float(mult[0])
        if inc < tol * max(1.0, size):
            break
    # residual of the nonlinear equation, by substitution
    kern = problem.systems[0].kernel
    direct = (space.shifted_power(phi, params.alpha, k) - problem.systems[0].potential * phi + rb
              - nonlinear_term(w, phi, p) - lam * space.shifted_power(kern, params.alpha, k))
    green = (problem.systems[0].operator @ phi - lam * kern
             - space.inverse_power(-rb + nonlinear_term(w, phi, p), params.alpha, k))
    d = space.nodes
    fb = F_weight(params, d) * bubble_weight(params, d)
    floor = fb > 1e-9 * np.max(fb)
    wsup = float(np.max(np.abs(phi[floor]) / fb[floor]))
    sup_ratio = params.mu ** params.dims.decay * float(np.max(np.abs(phi))) / float(eta(params.dims, params.sqa_mu))
    return FixedPointResult(params, phi, lam, it, increments, ratios, wsup, sup_ratio,
                            space.hk_norm(phi, k), space.hk_norm(w, k), space.hminus_norm(direct, k),
                            space.hk_norm(green, k), at_floor, problem)


# the critical equation ----------------------------------------------------------------

def constant_solution(dims: Dimensions, alpha: float) -> float:
    """c = α^{(n-2k)/4}, the constant with α^k c = c^{2♯-1}."""
    return alpha ** (dims.decay / 2.0)


@dataclass
class CriticalSolution:
    strategy: str
    alpha: float
    values: np.ndarray                  # nodal values (constant branch: one value)
    space: RadialSEM | None
    residual_sup: float                 # Green-form residual relative to sup|u|
    min_value: float
    positive: bool
    converged: bool
    iterations: int
    energy: float                       # ‖u‖_{H^k}
    history: list = field(default_factory=list)
    message: str = ""


def _energy_constant(m, dims, c):
    # only the zeroth-order term of the H^k norm survives
    return abs(c) * sqrt(m.volume)


def solve_critical(m, dims: Dimensions, alpha: float, strategy: str = "constant", *,
                   mu: float | None = None, alpha_mu2: float = 1e-3, degree: int = 12,
                   tol: float = 1e-8, max_iter: int = 60, min_step: float = 1e-4,
                   start: FixedPointResult | None = None) -> CriticalSolution:
    """A positive solution of (Δ+α)^k u = u^{2♯-1}.

    ``strategy`` 'constant' returns u ≡ α^{(n-2k)/4}.  'newton' runs damped
    Newton (step halving) on the Green form u - (Δ+α)^{-k} u_+^{2♯-1} = 0 in
    the zonal spectral-element space, started from W + φ with φ from the
    fixed-point construction.  The residual is the sup of the Green form
    relative to sup|u|.
    """
    if alpha < 1:
        raise ValueError("α must be at least 1")
    p = dims.power
    if strategy == "constant":
        c = constant_solution(dims, alpha)
        res = abs(alpha ** dims.k * c - c ** p) / (alpha ** dims.k * c)
        return CriticalSolution("constant", alpha, np.array([c]), None, res, c, c > 0, True, 0,
                                _energy_constant(m, dims, c))
    if strategy != "newton":
        raise ValueError(f"unknown strategy {strategy!r}")
    if start is None:
        if mu is None:
            params = ConcentrationParams.from_ratio(m, dims, alpha, alpha_mu2)
        else:
            params = ConcentrationParams.at_pole(m, dims, mu, alpha)
        start = fixed_point_construct(params, degree=degree)
    system = start.problem.systems[0]
    space = system.space
    green = system.green_matrix
    u = np.maximum(start.problem.w_nodal(), 0.0) + start.phi

    def resid(v):
        return v - green @ (np.maximum(v, 0.0) ** p)

    f = resid(u)
    history = [float(np.max(np.abs(f)) / np.max(np.abs(u)))]
    converged = history[-1] <= tol
    message = ""
    it = 0
    while not converged and it < max_iter:
        it += 1
        jac = np.eye(u.size) - green * (p * np.maximum(u, 0.0) ** (p - 1.0))[None, :]
        du = np.linalg.solve(jac, -f)
        step, base = 1.0, np.linalg.norm(f)
        while True:
            trial = u + step * du
            ft = resid(trial)
            if np.linalg.norm(ft) < (1.0 - 1e-4 * step) * base:
                break
            step *= 0.5
            if step < min_step:
                break
        if step < min_step:
            message = f"line search stalled at iteration {it} (relative residual {history[-1]:.3e})"
            break
        u, f = trial, ft
        history.append(float(np.max(np.abs(f)) / np.max(np.abs(u))))
        converged = history[-1] <= tol
    if not converged and not message:
        message = f"no convergence in {max_iter} iterations (relative residual {history[-1]:.3e})"
    return CriticalSolution("newton", alpha, u, space, history[-1], float(np.min(u)),
                            bool(np.min(u) > 0), converged, it, space.hk_norm(u, dims.k), history, message)


@dataclass(frozen=True)
class MultiplierScan:
    alpha: float
    alpha_mu2: np.ndarray
    multiplier: np.ndarray       # λ_0 of the fixed point, per μ
    sign_changes: int


def reduced_multiplier_scan(m, dims: Dimensions, alpha: float, alpha_mu2_values, degree: int = 12) -> MultiplierScan:
    """λ_0(μ) along the bubble family.  W + φ solves the critical equation
    exactly when every multiplier vanishes; zonal symmetry removes λ_j, j ≥ 1,
    so a root of λ_0 in μ is necessary for a blow-up solution there."""
    vals = np.asarray(sorted(alpha_mu2_values), dtype=float)
    lam = []
    for a2 in vals:
        fp = fixed_point_construct(ConcentrationParams.from_ratio(m, dims, alpha, a2), degree=degree)
        lam.append(fp.lam)
    lam = np.asarray(lam)
    changes = int(np.sum(np.signbit(lam[1:]) != np.signbit(lam[:-1])))
    return MultiplierScan(alpha, vals, lam, changes)


# bubble fitting ----------------------------------------------------------------------------

@dataclass
class NodalField:
    """A zonal field about the pole given by nodal values in a spectral-element space."""

    space: RadialSEM
    values: np.ndarray

    def profile(self, r):
        return self.space.evaluate(self.values, r)


@dataclass
class FitResult:
    z: np.ndarray
    mu: float
    alpha: float
    residual: float
    defects: np.ndarray
    iterations: int
    objective: float
    boundary_hit: bool

    @property
    def center_offset(self) -> float:
        return float(np.arccos(np.clip(self.z[-1], -1.0, 1.0)))


def _pair_rule(n: int, mu: float, offset: float, alpha: float, q_theta: int = 48):
    """Nodes (ρ, t = cos θ) and weights for ∫_{S^n} f dV in polar coordinates
    about a center z', θ measured from the direction pointing away from the
    pole.  Uses ∫_{S^{n-1}} g(ξ·e) dξ = |S^{n-2}| ∫ g(t)(1-t²)^{(n-3)/2} dt."""
    from scipy.special import roots_jacobi

    from .quadrature import panel_rule, sphere_area

    scale = max(min(mu, offset), 0.05 * mu)
    bp = RadialSEM.for_scales(n, scale, alpha, 2).breakpoints
    extra = [x for x in (offset, 2 * offset, 0.5 * offset) if 0 < x < np.pi]
    bp = np.unique(np.concatenate([bp, extra]))
    rho, wr = panel_rule(bp, 16)
    t, wt = roots_jacobi(q_theta, (n - 3) / 2.0, (n - 3) / 2.0)
    R, T = np.meshgrid(rho, t, indexing="ij")
    weights = np.outer(wr * np.sin(rho) ** (n - 1), wt) * sphere_area(n - 2)
    return R, T, weights


def _hk_sum_profile(params: ConcentrationParams, prof, sector: int):
    """Σ_{l ≤ k} Δ^l f, so that ⟨u, f⟩_{H^k} = ∫ u · Σ_l Δ^l f."""
    from .radial import RadialJet

    parts = [prof] + [shifted_power_profile(params, prof, sector, times=l, alpha=0.0)
                      for l in range(1, params.dims.k + 1)]

    def jet_fn(r, order):
        acc = parts[0].jet(r, order)
        for q in parts[1:]:
            acc = acc + q.jet(r, order)
        return acc

    return RadialJet(jet_fn, name="hk_sum", taylor_radius=prof.taylor_radius,
                     antipode_radius=prof.antipode_radius)


class BubbleFitter:
    """Objective and orthogonality defects of ‖u - W_{α,ν}‖_{H^k} for a field u
    that is zonal about the pole, with ν = (z, μ) anywhere near the pole."""

    def __init__(self, m, dims: Dimensions, alpha: float, u: NodalField, tau: float = 1.0):
        self.m, self.dims, self.alpha, self.u, self.tau = m, dims, alpha, u, tau
        self.ops = GeodesicOps(m)
        self.u_norm_sq = u.space.hk_inner(u.values, u.values, dims.k)
        self._self_cache = {}
        self.evaluations = 0

    def params(self, z, mu) -> ConcentrationParams:
        return ConcentrationParams(self.m, self.dims, z, mu, self.alpha, tau=max(self.tau, 4.0 * self.tau))

    def _self_products(self, mu):
        if mu not in self._self_cache:
            from .rescaled import hk_inner

            p = ConcentrationParams.at_pole(self.m, self.dims, mu, self.alpha, tau=1.0)
            w, z0, z1 = (rescaled_field(p, "W"), rescaled_field(p, 0), rescaled_field(p, 1))
            self._self_cache[mu] = (hk_inner(p, w, w), hk_inner(p, w, z0), hk_inner(p, z0, z0),
                                    hk_inner(p, z1, z1))
        return self._self_cache[mu]

    def _geometry(self, z):
        offset = float(self.ops.distance(self.m.pole(), z))
        if offset > 1e-14:
            away = -self.ops.log_map(z, self.m.pole(), coordinates=False) / offset
        else:
            away = None
        return offset, away

    def cross_products(self, z, mu):
        """⟨u, W⟩, ⟨u, Z̃_0⟩, ⟨u, Z̃_e⟩ in H^k, e the unit direction at z away from the pole."""
        self.evaluations += 1
        offset, _ = self._geometry(z)
        p = ConcentrationParams.at_pole(self.m, self.dims, mu, self.alpha, tau=1.0)
        rho, t, wts = _pair_rule(self.dims.n, mu, offset, self.alpha)
        cos_r = np.cos(rho) * np.cos(offset) - np.sin(rho) * np.sin(offset) * t
        r = np.arccos(np.clip(cos_r, -1.0, 1.0))
        uvals = self.u.profile(r.ravel()).reshape(r.shape)
        out = []
        for which, sector in (("W", 0), (0, 0), (1, 1)):
            prof = _hk_sum_profile(p, rescaled_field(p, which).profile, sector)
            g = prof(rho[:, 0])[:, None]
            ang = t if sector else 1.0
            out.append(float(np.sum(uvals * g * ang * wts)))
        return out

    def evaluate(self, z, mu):
        cw, c0, ce = self.cross_products(z, mu)
        ww, w0, z00, z11 = self._self_products(mu)
        objective = self.u_norm_sq - 2.0 * cw + ww
        d0 = c0 - w0
        return objective, d0, ce, z00, z11

    def objective(self, z, mu):
        return self.evaluate(z, mu)[0]


def fit_bubble(m, u: NodalField, alpha: float, dims: Dimensions, start_mu: float,
               start_shift=None, tau: float = 1.0, tol: float = 1e-12, max_refine: int = 30,
               simplex_iter: int = 150) -> FitResult:
    """Minimize ‖u - W_{α,(z,μ)}‖_{H^k} over z near the pole and log μ.

    A Nelder-Mead search over (tangent shift at the pole / μ_0, log μ) is
    followed by Gauss-Newton steps that zero the orthogonality defects
    ⟨u - W, Z̃_j⟩_{H^k}; the centre moves by the exponential map.
    """
    from scipy.optimize import minimize

    fitter = BubbleFitter(m, dims, alpha, u, tau)
    ops = fitter.ops
    pole = m.pole()
    shift0 = np.zeros(m.n) if start_shift is None else np.asarray(start_shift, dtype=float)
    scale = start_mu

    def unpack(x):
        z = ops.exp_map(pole, x[:-1] * scale)
        return z, float(np.exp(x[-1]))

    def obj(x):
        z, mu = unpack(x)
        if alpha * mu ** 2 >= 4.0 * tau:
            return np.inf
        return fitter.objective(z, mu)

    x0 = np.concatenate([shift0 / scale, [np.log(start_mu)]])
    simplex = [x0] + [x0 + 0.05 * np.eye(x0.size)[i] for i in range(x0.size)]
    res = minimize(obj, x0, method="Nelder-Mead",
                   options=dict(initial_simplex=np.array(simplex), xatol=1e-3,
                                fatol=1e-8 * fitter.u_norm_sq,
                                maxiter=simplex_iter))
    z, mu = unpack(res.x)
    iterations = int(res.nit)
    for _ in range(max_refine):
        objective, d0, de, z00, z11 = fitter.evaluate(z, mu)
        step_log = d0 / z00
        step_e = de / z11
        mu = mu * float(np.exp(step_log))
        offset, away = fitter._geometry(z)
        if away is not None:
            z = ops.exp_map(z, mu * step_e * away)
        iterations += 1
        if abs(step_log) < tol and (away is None or abs(step_e) < tol):
            break
    objective, d0, de, z00, z11 = fitter.evaluate(z, mu)
    offset, _ = fitter._geometry(z)
    if offset < 1e-13:
        from .rescaled import w_profile as _w

        params = ConcentrationParams.at_pole(m, dims, mu, alpha, tau=1.0)
        diff = u.values - _w(params)(u.space.nodes)
        residual = u.space.hk_norm(diff, dims.k)
    else:
        residual = sqrt(max(objective, 0.0))
    denom = max(residual, 1e-14 * sqrt(fitter.u_norm_sq))
    defects = np.zeros(dims.n + 1)
    defects[0] = d0 / (denom * sqrt(z00))
    _, away = fitter._geometry(z)
    if away is not None:
        frame = ops.tangent_frame(z)
        defects[1:] = de / (denom * sqrt(z11)) * (frame @ away)
    boundary = alpha * mu ** 2 >= 4.0 * tau
    return FitResult(z, mu, alpha, residual, defects, iterations, objective, boundary)


# remainder audit -------------------------------------------------------------------------

@dataclass(frozen=True)
class RemainderAudit:
    alpha: float
    orders: tuple
    inner: tuple        # sup ratio per order, √α d ≤ 1
    outer: tuple        # sup ratio per order, √α d ≥ 1
    grid_norm: float    # ‖u - W‖_{H^k} recomputed in the spectral-element space


def remainder_audit(m, u: NodalField, fit: FitResult, dims: Dimensions, orders=(0, 1),
                    floor: float = 1e-9) -> RemainderAudit:
    """sup (μ+d)^l |∂_r^l(u - W)| / (B · {η(√α(μ+d)) | α^k d^{2k} e^{-√αd/2}}) per order.

    Points where the weight B·F falls below ``floor`` times its maximum are
    left out (the ratio there only measures rounding).  The fitted centre
    must be the pole up to rounding, because u is zonal about it.
    """
    if fit.center_offset > 1e-8:
        raise ValueError("remainder audit expects a fit centred at the pole of the zonal field")
    alpha, mu = fit.alpha, fit.mu
    params = ConcentrationParams.at_pole(m, dims, mu, alpha, tau=max(1.0, 4.0 * alpha * mu ** 2))
    space = u.space
    r = np.unique(np.concatenate([space.nodes[1:-1], np.geomspace(mu * 1e-2, 0.99 * np.pi, 600)]))
    w = w_profile(params)
    sa = sqrt(alpha)
    weight = bubble_weight(params, r) * F_weight(params, r)
    keep = weight > floor * np.max(weight)
    inner, outer = [], []
    for l in orders:
        diff = space.evaluate(u.values, r, deriv=l) - w.derivatives(r, l)[l]
        lhs = (mu + r) ** l * np.abs(diff)
        ratio = np.where(keep, lhs / np.where(weight > 0, weight, 1.0), 0.0)
        inside = sa * r <= 1.0
        inner.append(float(np.max(ratio[inside])) if np.any(inside & keep) else float("nan"))
        outer.append(float(np.max(ratio[~inside])) if np.any(~inside & keep) else float("nan"))
    diff_nodal = u.values - w(space.nodes)
    return RemainderAudit(alpha, tuple(orders), tuple(inner), tuple(outer), space.hk_norm(diff_nodal, dims.k))
