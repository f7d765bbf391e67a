"""Green operator of (Δ+α)^k on the round sphere S^n and convolution audits
for kernels with power-law singularities and exponential tails.

Pointwise values of G_α come from the closed form of the resolvent kernel,

    (Δ+α)^{-1}(x, y) = F(a, b; n/2; cos²(d/2)) / N,   a + b = n-1,  ab = α,

normalized so that the singular part matches the Euclidean fundamental
solution; higher powers follow from (Δ+α)^{-k} = (-1)^{k-1}/(k-1)! ∂_α^{k-1}
(Δ+α)^{-1}.  The zonal expansion Σ_ℓ (λ_ℓ+α)^{-k} Z_ℓ(cos d) is kept as an
independent route: it does not converge absolutely for n ≥ 4k-1 or so, and is
evaluated with a smooth spectral cutoff, which converges fast away from the
diagonal.  Zonal fields are handled through Gegenbauer coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, lgamma, log, pi, sqrt

import mpmath as mp
import numpy as np
from scipy.special import roots_gegenbauer, roots_jacobi

from .jets import Jet
from .manifold import SPHERE_KIND, GeodesicOps, ModelManifold, RadialField
from .quadrature import gauss_legendre, sphere_area
from .radial import RadialJet, smooth_step
from .rescaled import Psi_eps


class GreenError(ValueError):
    """Raised when an evaluation is requested where it is not defined."""


def euclid_green_constant(n: int, k: int) -> float:
    """c_{n,k} with Δ^k(c_{n,k}|x|^{2k-n}) = δ_0 on R^n, 2k < n."""
    if not 0 < 2 * k < n:
        raise GreenError("need 0 < 2k < n")
    return gamma(n / 2.0 - k) / (4.0 ** k * pi ** (n / 2.0) * gamma(k))


# Gegenbauer machinery --------------------------------------------------------------

def _gegenbauer_table(lmax: int, lam: float, t) -> np.ndarray:
    """C_ℓ^λ(t) for ℓ = 0..lmax by the three-term recurrence."""
    t = np.asarray(t, dtype=float)
    out = np.empty((lmax + 1,) + t.shape)
    out[0] = 1.0
    if lmax >= 1:
        out[1] = 2.0 * lam * t
    for l in range(2, lmax + 1):
        out[l] = (2.0 * (l + lam - 1.0) * t * out[l - 1] - (l + 2.0 * lam - 2.0) * out[l - 2]) / l
    return out


def _gegenbauer_norm(l: int, lam: float) -> float:
    """∫_{-1}^1 C_ℓ^λ(t)² (1-t²)^{λ-1/2} dt."""
    return float(np.exp(log(pi) + (1.0 - 2.0 * lam) * log(2.0) + lgamma(l + 2.0 * lam)
                        - lgamma(l + 1.0) - 2.0 * lgamma(lam)) / (l + lam))


def zonal_factor(n: int, l: int) -> float:
    """Z_ℓ(t) = zonal_factor · C_ℓ^{(n-1)/2}(t) is the reproducing kernel of degree ℓ."""
    return (2.0 * l + n - 1.0) / ((n - 1.0) * sphere_area(n))


# the Green operator -------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralGreen:
    """G_α for (Δ+α)^k on a round sphere."""

    manifold: ModelManifold
    alpha: float
    k: int
    tolerance: float = 1e-10
    precision: int = 30
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.manifold.kind != SPHERE_KIND:
            raise GreenError("the Green operator is implemented on the sphere only")
        if self.alpha <= 0:
            raise GreenError("α must be positive")
        if self.k < 1:
            raise GreenError("k must be at least 1")

    @property
    def n(self) -> int:
        return self.manifold.n

    def eigenvalue(self, l):
        l = np.asarray(l, dtype=float)
        return l * (l + self.n - 1.0)

    def coefficients(self, lmax: int) -> np.ndarray:
        """(λ_ℓ+α)^{-k}, ℓ = 0..lmax."""
        return (self.eigenvalue(np.arange(lmax + 1)) + self.alpha) ** (-float(self.k))

    @property
    def euclid_constant(self) -> float:
        return euclid_green_constant(self.n, self.k)

    def truncation_degree(self, d: float) -> int:
        """Spectral cutoff for the smoothed sum at distance d: the kernel
        oscillates on the scale 1/ℓ, so L·d must be large."""
        if d <= 0:
            raise GreenError("the Green function is singular on the diagonal")
        L = int(np.ceil(400.0 / min(d, pi - d, 1.0)))
        return min(max(L, 400), 200000)

    def tail_bound(self, lmax: int) -> float:
        """Σ_{ℓ>L} (λ_ℓ+α)^{-k} sup|Z_ℓ|; sup|Z_ℓ| grows like ℓ^{n-1}, so the
        bound is finite only for 2k > n, which never holds for a supported pair."""
        if 2 * self.k <= self.n:
            return float("inf")
        c = 2.0 / (gamma(self.n) * sphere_area(self.n))
        return c * (lmax + 1.0) ** (self.n - 2 * self.k) / (2 * self.k - self.n)


def _positive_series(n: int, alpha, z):
    """F(a, b; n/2; z) with a + b = n-1, ab = α.  The Pochhammer products
    (a)_j (b)_j = Π (i² + (n-1)i + α) are real and positive, so the series is
    summed in real arithmetic with no cancellation."""
    c = mp.mpf(n) / 2
    term = mp.mpf(1)
    total = mp.mpf(1)
    j = 0
    while True:
        term *= (j * j + (n - 1) * j + alpha) / ((j + 1) * (j + c)) * z
        total += term
        j += 1
        if term < total * mp.eps and j * (1 - z) > 2:
            return total


def _resolvent(n: int, alpha, t2):
    """(Δ+α)^{-1} at cos²(d/2) = t2 on S^n, in mpmath arithmetic."""
    half = mp.mpf(n - 1) / 2
    disc = mp.sqrt(half * half - alpha)
    a, b = half + disc, half - disc
    c = mp.mpf(n) / 2
    kappa = mp.re(mp.gamma(c) * mp.gamma(c - 1) / (mp.gamma(a) * mp.gamma(b)))
    norm = kappa * mp.power(4, c - 1) * (n - 2) * 2 * mp.pi ** c / mp.gamma(c)
    if t2 <= 0.97:
        return _positive_series(n, alpha, t2) / norm
    return mp.re(mp.hyp2f1(a, b, c, t2)) / norm


def _closed_form(n: int, k: int, alpha: float, d: float, precision: int) -> float:
    with mp.workdps(precision + 10 * (k - 1)):
        al = mp.mpf(alpha)
        t2 = mp.cos(mp.mpf(d) / 2) ** 2
        if k == 1:
            val = _resolvent(n, al, t2)
        else:
            der = mp.diff(lambda a: _resolvent(n, a, t2), al, k - 1)
            val = (-1) ** (k - 1) * der / mp.factorial(k - 1)
        return float(val)


def _smooth_cutoff(x):
    """1 on [0, 1/2], 0 on [1, ∞), C^∞ in between."""
    return 1.0 - smooth_step(2.0 * np.asarray(x, dtype=float) - 1.0)


def green_profile(g: SpectralGreen, d, method: str = "closed") -> np.ndarray:
    """G_α as a function of the geodesic distance, for d in (0, π]."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if np.any(d <= 0) or np.any(d > pi + 1e-14):
        raise GreenError("distances must lie in (0, π]")
    if method == "closed":
        out = np.empty_like(d)
        for i, di in np.ndenumerate(d):
            key = round(float(di), 15)
            if key not in g._cache:
                g._cache[key] = _closed_form(g.n, g.k, g.alpha, float(di), g.precision)
            out[i] = g._cache[key]
        return out
    if method == "spectral":
        out = np.empty_like(d)
        for i, di in np.ndenumerate(d):
            L = g.truncation_degree(float(di))
            ls = np.arange(L + 1)
            coef = g.coefficients(L) * _smooth_cutoff(ls / L)
            coef *= (2.0 * ls + g.n - 1.0) / ((g.n - 1.0) * sphere_area(g.n))
            out[i] = _clenshaw_gegenbauer(coef, (g.n - 1) / 2.0, np.cos(di))
        return out
    raise GreenError(f"unknown method {method!r}")


def _clenshaw_gegenbauer(coef, lam: float, t):
    """Σ_ℓ coef_ℓ C_ℓ^λ(t) by Clenshaw's recurrence (works on arrays and jets)."""
    L = len(coef) - 1
    b1 = 0.0 * t
    b2 = 0.0 * t
    for l in range(L, -1, -1):
        # C_{ℓ+1} = A_ℓ t C_ℓ - B_ℓ C_{ℓ-1}
        a_l = 2.0 * (l + lam) / (l + 1.0)
        b_next = (l + 2.0 * lam) / (l + 2.0)
        b0 = t * b1 * a_l - b2 * b_next + coef[l]
        b2, b1 = b1, b0
    return b1


def green_eval(g: SpectralGreen, x, y, method: str = "closed") -> float:
    """G_α(x, y) for two distinct points of the sphere."""
    ops = GeodesicOps(g.manifold)
    d = float(ops.distance(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))
    if d < 1e-12:
        raise GreenError("x and y coincide")
    return float(green_profile(g, d, method)[0])


def green_integral(g: SpectralGreen, q: int = 16) -> float:
    """∫_M G_α(x, y) dv(y), by graded panels in the distance."""
    sa = sqrt(g.alpha)
    bp = [0.0]
    h = 1e-2 / sa
    while bp[-1] + h < min(40.0 / sa, pi):
        bp.append(bp[-1] + h)
        h = min(2.0 * h, 2.0 / sa)
    bp += list(np.linspace(bp[-1], pi, max(2, int(np.ceil((pi - bp[-1]) / 0.2)) + 1))[1:])
    total = 0.0
    n = g.n
    for a, b in zip(bp[:-1], bp[1:]):
        if a == 0.0:
            # d^{2k-n} · sin^{n-1} d ~ d^{2k-1}: Gauss-Jacobi in d with that weight
            x, w = roots_jacobi(q, 0.0, 2.0 * g.k - 1.0)
            r = 0.5 * b * (x + 1.0)
            w = w * (0.5 * b) ** (2 * g.k)
            vals = green_profile(g, r) * np.sin(r) ** (n - 1) / r ** (2 * g.k - 1)
        else:
            r, w = gauss_legendre(a, b, q)
            vals = green_profile(g, r) * np.sin(r) ** (n - 1)
        total += float(np.sum(w * vals))
    return total * sphere_area(n - 1)


@dataclass(frozen=True)
class DecayAudit:
    alpha: float
    distances: np.ndarray
    ratios: np.ndarray        # G · d^{n-2k} · e^{√α d/2}

    @property
    def sup(self) -> float:
        return float(np.max(self.ratios))


def green_decay_audit(g: SpectralGreen, points: int = 24) -> DecayAudit:
    """G_α · d^{n-2k} · e^{√α d / 2} over d ∈ [2/√α, inj/2]."""
    sa = sqrt(g.alpha)
    lo, hi = 2.0 / sa, g.manifold.inj_radius / 2.0
    if lo >= hi:
        raise GreenError("α too small for the decay window")
    d = np.geomspace(lo, hi, points)
    vals = green_profile(g, d)
    return DecayAudit(g.alpha, d, vals * d ** (g.n - 2 * g.k) * np.exp(sa * d / 2.0))


# zonal fields ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZonalExpansion:
    """f(d) = Σ_ℓ c_ℓ C_ℓ^{(n-1)/2}(cos d) about a center on S^n."""

    manifold: ModelManifold
    center: np.ndarray
    coeffs: np.ndarray

    @property
    def n(self) -> int:
        return self.manifold.n

    @property
    def lam(self) -> float:
        return (self.n - 1) / 2.0

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eigenvalues(self) -> np.ndarray:
        l = np.arange(self.degree + 1, dtype=float)
        return l * (l + self.n - 1.0)

    def _norms(self) -> np.ndarray:
        # ∫_{S^n} C_ℓ(cos d)² dv = |S^{n-1}| · ∫ C_ℓ(t)² (1-t²)^{(n-2)/2} dt
        return sphere_area(self.n - 1) * np.array([_gegenbauer_norm(l, self.lam)
                                                    for l in range(self.degree + 1)])

    def __call__(self, d) -> np.ndarray:
        return _clenshaw_gegenbauer(self.coeffs, self.lam, np.cos(np.asarray(d, dtype=float)))

    def profile(self) -> RadialJet:
        coeffs, lam = self.coeffs, self.lam

        def jet_fn(r, order):
            t = Jet.variable(r, order).cos()
            out = _clenshaw_gegenbauer(coeffs, lam, t)
            if not isinstance(out, Jet):
                out = Jet.constant(out, order, np.shape(r))
            return out

        return RadialJet(jet_fn, name="zonal")

    def field(self) -> RadialField:
        return RadialField(self.manifold, self.center, self.profile())

    def scaled(self, factors) -> "ZonalExpansion":
        return ZonalExpansion(self.manifold, self.center, self.coeffs * factors)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs ** 2 * self._norms())))

    def hk_norm(self, k: int) -> float:
        lam = self.eigenvalues()
        g = sum(lam ** l for l in range(k + 1))
        return float(np.sqrt(np.sum(self.coeffs ** 2 * self._norms() * g)))

    def hminus_norm(self, k: int, alpha: float) -> float:
        """⟨f, (Δ+α)^{-k} f⟩^{1/2}."""
        w = (self.eigenvalues() + alpha) ** (-float(k))
        return float(np.sqrt(np.sum(self.coeffs ** 2 * self._norms() * w)))


def zonal_expand(m: ModelManifold, f, center=None, degree: int = 32, q: int | None = None) -> ZonalExpansion:
    """Gegenbauer coefficients of a zonal field (a RadialField in sector 0 or
    a callable of the distance)."""
    if isinstance(f, RadialField):
        if f.sector != 0:
            raise GreenError("only zonal fields have a Gegenbauer expansion")
        center, prof = f.center, f.profile
    else:
        prof = f
        center = m.pole() if center is None else np.asarray(center, dtype=float)
    lam = (m.n - 1) / 2.0
    q = 2 * degree + 8 if q is None else q
    t, w = roots_gegenbauer(q, lam)
    vals = np.asarray(prof(np.arccos(np.clip(t, -1.0, 1.0))), dtype=float)
    table = _gegenbauer_table(degree, lam, t)
    norms = np.array([_gegenbauer_norm(l, lam) for l in range(degree + 1)])
    coeffs = table @ (w * vals) / norms
    return ZonalExpansion(m, np.asarray(center, dtype=float), coeffs)


def green_apply(g: SpectralGreen, f, degree: int = 32) -> ZonalExpansion:
    """(Δ+α)^{-k} f for a zonal field, coefficient by coefficient."""
    if isinstance(f, ZonalExpansion):
        ex = f
    else:
        ex = zonal_expand(g.manifold, f, degree=degree)
    band = ex.degree
    tail = ex.coeffs[-2:]
    scale = np.max(np.abs(ex.coeffs)) if band >= 0 else 0.0
    if band >= 4 and scale > 0 and np.max(np.abs(tail)) > 1e-10 * scale:
        raise GreenError("field is not resolved by the Gegenbauer expansion; raise the degree")
    return ex.scaled(g.coefficients(band))


# convolution audits -----------------------------------------------------------------------

@dataclass(frozen=True)
class XKernel:
    """Model kernel saturating the bound on X.

    kind 'gir1': (μ+d)^{-γ}·{(μ+d)^{-ρ} if √αd ≤ 1, α^{ρ/2}e^{-(1-ε)√αd} otherwise}
    kind 'gir2': (μ+d)^{-γ} Ψ_ε(√αd)
    """

    kind: str
    gamma: float
    eps: float
    alpha: float
    mu: float
    rho: float = 0.0

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        sa = sqrt(self.alpha)
        base = (self.mu + d) ** (-self.gamma)
        if self.kind == "gir1":
            inner = (self.mu + d) ** (-self.rho)
            outer = self.alpha ** (self.rho / 2.0) * np.exp(-(1.0 - self.eps) * sa * d)
            return base * np.where(sa * d <= 1.0, inner, outer)
        return base * Psi_eps(sa * d, self.eps)


@dataclass(frozen=True)
class YKernel:
    """d^{β-n} Ψ_ε(√α d)."""

    beta: float
    eps: float
    alpha: float
    n: int

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        return d ** (self.beta - self.n) * Psi_eps(sqrt(self.alpha) * d, self.eps)


def check_exponents(n: int, kind: str, gamma_: float, beta: float, rho: float = 0.0):
    if not 0 < beta <= n:
        raise GreenError("β must lie in (0, n]")
    if kind == "gir1":
        if not 0 < gamma_ <= n:
            raise GreenError("γ must lie in (0, n]")
        if not -gamma_ < rho < n - gamma_:
            raise GreenError("ρ must lie in (-γ, n-γ)")
    elif kind == "gir2":
        if not gamma_ > beta:
            raise GreenError("γ must exceed β")
    else:
        raise GreenError(f"unknown kernel kind {kind!r}")


def _angle_breaks(r: float, D: float, targets) -> np.ndarray:
    """Angles θ ∈ (0, π) at which the point at distance r from one center and
    angle θ from the axis sits at distance ``target`` from the other center."""
    sr, cr, sD, cD = np.sin(r), np.cos(r), np.sin(D), np.cos(D)
    den = sr * sD
    if den <= 1e-300:
        return np.array([0.0, pi])
    c = (np.cos(np.asarray(targets, dtype=float)) - cr * cD) / den
    c = c[(c > -1.0) & (c < 1.0)]
    th = np.arccos(c)
    return np.unique(np.concatenate([[0.0, pi], th]))


def _ladder(dmin: float, alpha: float, scale: float):
    sa = sqrt(alpha)
    add = [dmin + 2.0 ** j / sa for j in range(-2, 7)]
    mul = [max(dmin, scale) * 2.0 ** j for j in range(1, 7)]
    return add + mul


def _angular_integral(r: float, D: float, fn, targets, q: int, n: int) -> float:
    """∫_0^π fn(distance to the other center) sin^{n-2}θ dθ."""
    th_b = _angle_breaks(r, D, targets)
    th_b = th_b[np.concatenate([[True], np.diff(th_b) > 1e-14])]
    x, w = [], []
    for a, b in zip(th_b[:-1], th_b[1:]):
        xa, wa = gauss_legendre(a, b, q)
        x.append(xa)
        w.append(wa)
    th = np.concatenate(x)
    wt = np.concatenate(w)
    cosd = np.cos(r) * np.cos(D) + np.sin(r) * np.sin(D) * np.cos(th)
    dist = np.arccos(np.clip(cosd, -1.0, 1.0))
    return float(np.sum(wt * np.sin(th) ** (n - 2) * fn(dist)))


def _radial_breaks(scale: float, alpha: float, stop: float, marks) -> np.ndarray:
    sa = sqrt(alpha)
    h_cap = 0.5 / sa
    bp = [0.0]
    h = 0.25 * scale
    while bp[-1] < stop:
        bp.append(min(bp[-1] + h, stop))
        h = min(1.6 * h, h_cap, max(0.5 * bp[-1], h))
    bp = np.unique(np.concatenate([bp, [m for m in marks if 0.0 < m < stop]]))
    return bp


def convolution_value(n: int, X: XKernel, Y: YKernel, D: float, q: int = 10) -> float:
    """Z(x, y) = ∫ X(d(x,z)) Y(d(z,y)) dz on S^n with d(x, y) = D ∈ (0, π)."""
    if not 0.0 < D < pi:
        raise GreenError("need 0 < d(x, y) < π")
    sa = sqrt(X.alpha)
    area = sphere_area(n - 2)
    chi = lambda s: 1.0 - smooth_step(4.0 * np.asarray(s) / D - 1.0)  # 1 below D/4, 0 above D/2

    # part A: around y, with the cutoff χ(d(z,y))
    s1 = min(D / 4.0, 1.0 / sa)
    xj, wj = roots_jacobi(q + 6, 0.0, Y.beta - 1.0)
    s_first = 0.5 * s1 * (xj + 1.0)
    w_first = wj * (0.5 * s1) ** Y.beta                # ∫ s^{β-1} g(s) ds
    sb = _radial_breaks(s1, X.alpha, D / 2.0, [1.0 / sa, D / 4.0])
    sb = sb[sb >= s1]
    s_rest, w_rest = [], []
    for a, b in zip(sb[:-1], sb[1:]):
        xa, wa = gauss_legendre(a, b, q)
        s_rest.append(xa)
        w_rest.append(wa)
    part_a = 0.0
    x_targets = lambda s: [1.0 / sa] + _ladder(max(D - s, 0.0), X.alpha, X.mu + D - s)
    for s, w in zip(s_first, w_first):
        # Y(s) s^{n-1} = s^{β-1} Ψ_ε(√αs) (sin s / s)^{n-1}
        rad = Psi_eps(sa * s, Y.eps) * (np.sin(s) / s) ** (n - 1) * chi(s)
        part_a += w * rad * _angular_integral(s, D, X, x_targets(s), q, n)
    if s_rest:
        for s, w in zip(np.concatenate(s_rest), np.concatenate(w_rest)):
            rad = Y(s) * np.sin(s) ** (n - 1) * chi(s)
            if rad == 0.0:
                continue
            part_a += w * rad * _angular_integral(s, D, X, x_targets(s), q, n)

    # part B: around x, with 1 - χ(d(z,y))
    stop = min(pi, D + 40.0 / sa)
    marks = [1.0 / sa] + [D * c for c in (0.5, 0.625, 0.75, 0.875, 1.0, 1.125, 1.25, 1.375, 1.5)]
    rb = _radial_breaks(X.mu, X.alpha, stop, marks)

    def y_part(dist):
        return (1.0 - chi(dist)) * Y(np.maximum(dist, 1e-300))

    part_b = 0.0
    for a, b in zip(rb[:-1], rb[1:]):
        rs, ws = gauss_legendre(a, b, q)
        for r, w in zip(rs, ws):
            dmin = abs(D - r)
            targets = [D / 4.0, D / 2.0, 1.0 / sa] + _ladder(max(dmin, D / 4.0), X.alpha, max(dmin, D / 4.0))
            part_b += w * X(r) * np.sin(r) ** (n - 1) * _angular_integral(r, D, y_part, targets, q, n)
    return area * (part_a + part_b)


def giraud_bound(n: int, X: XKernel, Y: YKernel, D) -> np.ndarray:
    """The piecewise convolution bound belonging to X's kind."""
    D = np.asarray(D, dtype=float)
    a, mu, g, b, eps = X.alpha, X.mu, X.gamma, Y.beta, X.eps
    sa = sqrt(a)
    if X.kind == "gir1":
        rho = X.rho
        if b - rho > g:
            inner = a ** ((rho + g - b) / 2.0) * np.ones_like(D)
        elif b - rho == g:
            inner = 1.0 + np.abs(np.log(sa * (mu + D)))
        else:
            inner = (mu + D) ** (b - rho - g)
        outer = a ** (rho / 2.0) * D ** (b - g) * np.exp(-(1.0 - eps) * sa * D)
        return np.where(sa * D <= 1.0, inner, outer)
    psi = Psi_eps(sa * D, eps)
    if g > n:
        shape = mu ** (n - g) * (mu + D) ** (b - n)
    elif g == n:
        shape = (mu + D) ** (b - n) * (1.0 + np.abs(np.log((mu + D) / mu)))
    else:
        shape = (mu + D) ** (b - g)
    return psi * shape


def giraud_regime(n: int, kind: str, gamma_: float) -> str:
    if kind == "gir1":
        return "gir1"
    return "gir2:" + ("gamma>n" if gamma_ > n else "gamma=n" if gamma_ == n else "gamma<n")


@dataclass(frozen=True)
class GiraudAudit:
    kind: str
    regime: str
    alpha: float
    mu: float
    distances: np.ndarray
    values: np.ndarray
    ratios: np.ndarray
    inner_constant: float      # sup ratio over √αd ≤ 1
    outer_constant: float      # sup ratio over √αd ≥ 1


def giraud_convolution_audit(n: int, kind: str, gamma_: float, beta: float, eps: float,
                             alpha: float, mu: float, rho: float = 0.0, distances=None,
                             q: int = 10) -> GiraudAudit:
    """Convolve the bound-saturating kernels and divide by the convolution bound."""
    check_exponents(n, kind, gamma_, beta, rho)
    if not 0.0 < eps < 1.0:
        raise GreenError("ε must lie in (0, 1)")
    X = XKernel(kind, gamma_, eps, alpha, mu, rho)
    Y = YKernel(beta, eps, alpha, n)
    sa = sqrt(alpha)
    if distances is None:
        inner = np.geomspace(0.5 * mu, 1.0 / sa, 5)
        outer = np.geomspace(2.0 / sa, min(pi / 2.0, 12.0 / sa), 4)
        distances = np.concatenate([inner, outer])
    distances = np.asarray(distances, dtype=float)
    vals = np.array([convolution_value(n, X, Y, float(D), q) for D in distances])
    ratios = vals / giraud_bound(n, X, Y, distances)
    ins = sa * distances <= 1.0
    ic = float(np.max(ratios[ins])) if np.any(ins) else float("nan")
    oc = float(np.max(ratios[~ins])) if np.any(~ins) else float("nan")
    return GiraudAudit(kind, giraud_regime(n, kind, gamma_), alpha, mu, distances, vals, ratios, ic, oc)


@dataclass(frozen=True)
class SlopeFit:
    alpha: float
    eps: float
    slope: float               # fitted coefficient of d in log Z
    expected: float            # -(1-ε)√α

    @property
    def relative_error(self) -> float:
        return abs(self.slope / self.expected - 1.0)


def exponential_slope(n: int, gamma_: float, beta: float, eps: float, alpha: float, mu: float,
                      rho: float = 0.0, window=(10.0, 20.0), points: int = 6, q: int = 10) -> SlopeFit:
    """Fit log Z = a log d + b d + c over √αd in ``window``; b is the decay rate."""
    sa = sqrt(alpha)
    D = np.linspace(window[0] / sa, window[1] / sa, points)
    a = giraud_convolution_audit(n, "gir1", gamma_, beta, eps, alpha, mu, rho, D, q)
    A = np.column_stack([np.log(D), D, np.ones_like(D)])
    coef, *_ = np.linalg.lstsq(A, np.log(a.values), rcond=None)
    return SlopeFit(alpha, eps, float(coef[1]), -(1.0 - eps) * sa)
