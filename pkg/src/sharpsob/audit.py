"""The functional I_Λ, the sharpness probe for the first constant, empirical
lower bounds for the second constant, and the rate identities used in the
contradiction argument for blow-up sequences.

    I_Λ(u) = (‖Δ^{k/2}u‖² + Λ‖u‖²_{H^{k-1}}) / ‖u‖²_{2♯}

Fields are either radial fields with exact jets (bubbles, constants, zonal
harmonics) or nodal fields in the radial spectral-element space.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, log, pi, sqrt

import numpy as np

from .blowup import NodalField, fixed_point_construct
from .euclid import Dimensions, bubble_profile, sharp_constant
from .green import ZonalExpansion
from .manifold import (ModelManifold, RadialField, constant_field, seminorm_sq,
                       sphere_shifted_power)
from .quadrature import panel_rule, sphere_area
from .jets import Jet
from .radial import EUCLID, SPHERE, laplacian_jet, laplacian_power
from .rescaled import ConcentrationParams, gamma_rate, rescaled_field

DICTIONARY_VERSION = "1"


class AuditError(ValueError):
    pass


# norms of either kind of field -----------------------------------------------------------

def _seminorm(m: ModelManifold, u, l: int) -> float:
    if isinstance(u, NodalField):
        return u.space.seminorm_sq(u.values, l)
    return seminorm_sq(m, u, l, q=20)


def _lebesgue_sq(m: ModelManifold, u, p: float) -> float:
    """‖u‖_p²."""
    if isinstance(u, NodalField):
        integral = u.space.integrate_power(u.values, p)
    else:
        r, w = u.quadrature(20)
        integral = float(u.angular_mass * np.sum(np.abs(u.profile(r)) ** p * m.radial_weight(r) * w))
    return integral ** (2.0 / p)


@dataclass(frozen=True)
class QuotientReport:
    lam: float
    label: str
    top_seminorm: float        # ‖Δ^{k/2}u‖²
    lower_norm: float          # ‖u‖²_{H^{k-1}}
    lebesgue_sq: float         # ‖u‖²_{2♯}
    value: float

    @property
    def numerator(self) -> float:
        return self.top_seminorm + self.lam * self.lower_norm


def quotient(m: ModelManifold, dims: Dimensions, u, lam: float, label: str = "field") -> QuotientReport:
    """I_Λ(u)."""
    if lam <= 0:
        raise AuditError("Λ must be positive")
    semis = [_seminorm(m, u, l) for l in range(dims.k + 1)]
    lp = _lebesgue_sq(m, u, dims.two_sharp)
    if lp <= 0.0:
        raise AuditError("I_Λ is undefined for the zero field")
    lower = float(sum(semis[:-1]))
    return QuotientReport(lam, label, semis[-1], lower, lp, (semis[-1] + lam * lower) / lp)


# sharpness of the first constant ---------------------------------------------------------

@dataclass(frozen=True)
class SharpnessProbe:
    alpha: float
    lam: float
    mus: np.ndarray
    values: np.ndarray
    rate: float                # measured exponent p in I(μ) - I(0) ~ c μ^p
    extrapolated: float
    target: float              # K_0^{-2}

    @property
    def raw_error(self) -> float:
        return abs(self.values[-1] / self.target - 1.0)

    @property
    def extrapolated_error(self) -> float:
        return abs(self.extrapolated / self.target - 1.0)


def sharpness_probe(m: ModelManifold, dims: Dimensions, alpha: float = 100.0, lam: float = 1.0,
                    alpha_mu2=(1e-2, 1e-3, 1e-4)) -> SharpnessProbe:
    """I_Λ(W_{α,(z,μ)}) along a geometric μ sequence, extrapolated to μ = 0.

    The extrapolation exponent is read off the last three values rather
    than assumed: with ratio q between successive μ,
    p = log((I₁-I₂)/(I₂-I₃)) / log q and I(0) = I₃ - (I₂-I₃)/(q^p - 1).
    """
    a2 = np.asarray(alpha_mu2, dtype=float)
    if a2.size < 3:
        raise AuditError("the probe needs at least three scales")
    mus = np.sqrt(a2 / alpha)
    ratios = mus[:-1] / mus[1:]
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise AuditError("scales must form a geometric sequence")
    vals = []
    for mu in mus:
        p = ConcentrationParams.at_pole(m, dims, float(mu), alpha)
        vals.append(quotient(m, dims, rescaled_field(p, "W"), lam, "bubble").value)
    vals = np.array(vals)
    i1, i2, i3 = vals[-3:]
    q = ratios[0]
    if (i1 - i2) * (i2 - i3) <= 0:
        rate, limit = float("nan"), float(i3)
    else:
        rate = log((i1 - i2) / (i2 - i3)) / log(q)
        limit = i3 - (i2 - i3) / (q ** rate - 1.0)
    return SharpnessProbe(alpha, lam, mus, vals, float(rate), float(limit), sharp_constant(dims) ** -2)


# empirical second constant -------------------------------------------------------------------

@dataclass(frozen=True)
class DictionaryEntry:
    label: str
    field: object


def default_dictionary(m: ModelManifold, dims: Dimensions, mus=(1e-1, 3e-2, 1e-2, 3e-3),
                       harmonics=(1, 2, 3), alpha: float = 4.0):
    """Constants, low zonal harmonics and cut-off bubbles over a μ grid."""
    entries = [DictionaryEntry("constant", constant_field(m, 1.0))]
    for l in harmonics:
        coeffs = np.zeros(l + 1)
        coeffs[l] = 1.0
        ex = ZonalExpansion(m, m.pole(), coeffs)
        entries.append(DictionaryEntry(f"zonal-{l}", ex.field()))
        coeffs = coeffs.copy()
        coeffs[0] = 2.0 * np.max(np.abs(ex(np.linspace(0, pi, 64))))
        entries.append(DictionaryEntry(f"zonal-{l}+constant", ZonalExpansion(m, m.pole(), coeffs).field()))
    for mu in mus:
        p = ConcentrationParams.at_pole(m, dims, float(mu), alpha)
        entries.append(DictionaryEntry(f"bubble-mu={mu:g}", rescaled_field(p, "W")))
    return entries


@dataclass(frozen=True)
class B0Report:
    version: str
    value: float
    contributions: dict        # label -> (‖u‖²_{2♯} - K_0²‖Δ^{k/2}u‖²)/‖u‖²_{H^{k-1}}, unclipped
    parts: dict                # label -> (‖u‖²_{2♯}, ‖Δ^{k/2}u‖², ‖u‖²_{H^{k-1}})

    def inequality_holds(self, dims: Dimensions, slack: float = 1e-9) -> bool:
        k02 = sharp_constant(dims) ** 2
        return all(lp <= k02 * top + (self.value + slack) * low
                   for lp, top, low in self.parts.values())


def empirical_B0(m: ModelManifold, dims: Dimensions, dictionary=None) -> B0Report:
    """max over the dictionary of (‖u‖²_{2♯} - K_0²‖Δ^{k/2}u‖²)/‖u‖²_{H^{k-1}}, clipped at 0.

    A lower bound for the optimal second constant, nothing more.
    """
    entries = default_dictionary(m, dims) if dictionary is None else list(dictionary)
    if not entries:
        raise AuditError("empty dictionary")
    k02 = sharp_constant(dims) ** 2
    contrib, parts = {}, {}
    for e in entries:
        rep = quotient(m, dims, e.field, 1.0, e.label)
        parts[e.label] = (rep.lebesgue_sq, rep.top_seminorm, rep.lower_norm)
        contrib[e.label] = (rep.lebesgue_sq - k02 * rep.top_seminorm) / rep.lower_norm
    return B0Report(DICTIONARY_VERSION, max(0.0, max(contrib.values())), contrib, parts)


def constant_field_b0(m: ModelManifold, dims: Dimensions) -> float:
    """The contribution of constants: Vol^{2/2♯}/Vol = Vol^{-2k/n}."""
    return m.volume ** (-2.0 * dims.k / dims.n)


# coercivity identity ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoercivityCheck:
    pairing: float             # ∫ (Δ+α)^k u · u
    expansion: float           # Σ_l C(k,l) α^{k-l} ∫|Δ^{l/2}u|²

    @property
    def relative_gap(self) -> float:
        return abs(self.pairing - self.expansion) / abs(self.expansion)


def coercivity_identity(m: ModelManifold, k: int, alpha: float, u: RadialField, q: int = 24) -> CoercivityCheck:
    """Two routes to the energy of (Δ+α)^k on a zonal field."""
    if u.sector != 0:
        raise AuditError("zonal fields only")
    op = sphere_shifted_power(u.profile, m.n, k, alpha)
    r, w = panel_rule(np.linspace(0.0, pi, 33), q)
    pairing = float(np.sum(op(r) * u.profile(r) * m.radial_weight(r) * w))
    f = RadialField(m, u.center, u.profile, scale=pi / 8)
    expansion = sum(comb(k, l) * alpha ** (k - l) * seminorm_sq(m, f, l, q) for l in range(k + 1))
    return CoercivityCheck(pairing, float(expansion))


# rate identities along a sweep ---------------------------------------------------------------

def _euclid_ball_integral(dims: Dimensions, l: int, radius: float, q: int = 24) -> float:
    """∫_{|y| < radius} |Δ_ξ^{l/2} B|² dy (odd l: |∇Δ^{(l-1)/2}B|²)."""
    b = bubble_profile(dims)
    g = laplacian_power(b, dims.n, l // 2, EUCLID)
    bp = [0.0]
    h = 0.25 / sqrt(dims.rho)
    while bp[-1] + h < radius:
        bp.append(bp[-1] + h)
        h *= 1.5
    bp.append(radius)
    r, w = panel_rule(np.array(bp), q)
    vals = g(r) if l % 2 == 0 else g.derivatives(r, 1)[1]
    return float(sphere_area(dims.n - 1) * np.sum(vals ** 2 * r ** (dims.n - 1) * w))


def _pointwise_power(space, u, n: int, l: int, r, geometry: str) -> np.ndarray:
    """Elementwise Δ^{l/2}u (even l) or ∂_r Δ^{(l-1)/2}u (odd l) at radii r > 0,
    for the sphere or the flat chart, from the nodal polynomial."""
    top = l
    c = np.stack([space.evaluate(u, r, j) / factorial(j) for j in range(top + 1)])
    jet = Jet(c)
    for _ in range(l // 2):
        jet = laplacian_jet(jet, Jet.variable(r, jet.order), n, geometry)
    if l % 2 == 0:
        return jet.value
    return jet.derivative().value


def _panel_integral(space, u, n: int, l: int, stop: float, geometry: str, power: float = 2.0, q: int = 16):
    """∫_0^stop |D_l u|^power · (area factor) in the given geometry, on panels
    aligned with the element breakpoints."""
    bp = space.breakpoints
    bp = np.unique(np.concatenate([bp[bp < stop], [stop]]))
    r, w = panel_rule(bp, q)
    if l < 0:
        vals = space.evaluate(u, r, 0)
    else:
        vals = _pointwise_power(space, u, n, l, r, geometry)
    radial = np.sin(r) ** (n - 1) if geometry == SPHERE else r ** (n - 1)
    return float(sphere_area(n - 1) * np.sum(np.abs(vals) ** power * radial * w))


@dataclass(frozen=True)
class RatePoint:
    alpha: float
    mu: float
    gamma: float
    lower_energy_ratio: float      # α∫|Δ^{(k-1)/2}u|² / γ
    energy_defect: float           # |∫_M|Δ^{k/2}u|² - ∫_{B(0,ϱ)}|Δ_ξ^{k/2}U|²| / γ
    lebesgue_defect: float         # |∫_M u^{2♯} - ∫_{B(0,ϱ₀)} U^{2♯}| / γ
    ball_ratio: float              # ∫_{|y|<1/(√αμ)}|Δ_ξ^{(k-1)/2}B|² · αμ²/γ


@dataclass(frozen=True)
class RateReport:
    dims: Dimensions
    points: tuple
    chart_radius: float
    lebesgue_radius: float

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points])

    @property
    def lower_bound(self) -> float:
        return float(np.min(self.column("lower_energy_ratio")))

    def defects_decreasing(self, name: str, last: int = 3) -> bool:
        c = self.column(name)[-last:]
        return bool(np.all(np.diff(c) < 0))

    @property
    def ball_band(self) -> float:
        c = self.column("ball_ratio")
        return float(np.max(c) / np.min(c))


def rate_point(m: ModelManifold, dims: Dimensions, u: NodalField, alpha: float, mu: float,
               chart_radius: float = 3 * pi / 4, lebesgue_radius: float = 3 * pi / 8) -> RatePoint:
    """The three rate quantities for one solution with concentration scale μ."""
    if m.kind != "sphere":
        raise AuditError("rate audit runs on the sphere")
    n, k = dims.n, dims.k
    g = gamma_rate(dims, alpha, mu)
    space = u.space
    lower = alpha * space.seminorm_sq(u.values, k - 1) / g
    manifold_top = space.seminorm_sq(u.values, k)
    chart_top = _panel_integral(space, u.values, n, k, chart_radius, EUCLID)
    p = dims.two_sharp
    manifold_lp = space.integrate_power(u.values, p)
    chart_lp = _panel_integral(space, u.values, n, -1, lebesgue_radius, EUCLID, power=p)
    ball = _euclid_ball_integral(dims, k - 1, 1.0 / (sqrt(alpha) * mu)) * alpha * mu ** 2 / g
    return RatePoint(alpha, mu, g, lower, abs(manifold_top - chart_top) / g,
                     abs(manifold_lp - chart_lp) / g, ball)


def lower_order_rate_audit(m: ModelManifold, dims: Dimensions, alphas, alpha_mu2s, degree: int = 12,
                           solutions=None) -> RateReport:
    """Rate quantities along a sweep of (α, αμ²).  Without explicit solutions
    the sweep uses W + φ from the fixed-point construction."""
    pts = []
    for i, (a, a2) in enumerate(zip(alphas, alpha_mu2s)):
        params = ConcentrationParams.from_ratio(m, dims, float(a), float(a2))
        if solutions is None:
            fp = fixed_point_construct(params, degree=degree)
            u = NodalField(fp.problem.space(0), fp.problem.w_nodal() + fp.phi)
        else:
            u = solutions[i]
        pts.append(rate_point(m, dims, u, float(a), params.mu))
    return RateReport(dims, tuple(pts), 3 * pi / 4, 3 * pi / 8)
