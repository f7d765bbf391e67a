"""Radial profiles carrying exact derivative jets, and radial Laplacians.

Every profile is a function of a geodesic (or Euclidean) radius ``r``.  The
radial form of the geometer's Laplacian ``Δ = -div ∇`` acting on
``f(r) Y(ω)``, with ``Y`` a spherical harmonic of degree ``m`` on the unit
sphere of the tangent space, is

    -f'' - (n-1) cot(r) f' + m(m+n-2) f / sin(r)^2      (round sphere)
    -f'' - (n-1)/r f'      + m(m+n-2) f / r^2           (flat space)

Removable singularities at r = 0 are resolved by the jet division rule.
"""

from __future__ import annotations

from math import comb
from typing import Callable

import numpy as np

from .jets import Jet, where

EUCLID = "euclid"
SPHERE = "sphere"


class RadialJet:
    """A radial profile f(r) that can produce jets of any order on [0, r_max]."""

    def __init__(self, jet_fn: Callable[[np.ndarray, int], Jet], r_max: float = np.inf,
                 name: str = "profile", taylor_radius: float = 0.0,
                 antipode_radius: float = 0.0):
        self._jet_fn = jet_fn
        self.r_max = float(r_max)
        self.name = name
        # below this radius the Taylor series at r = 0 converges fast; radial
        # Laplacians are then evaluated from it to avoid cancellation in f'/r
        self.taylor_radius = float(taylor_radius)
        # same idea at r = π on the sphere, for profiles smooth across the antipode
        self.antipode_radius = float(antipode_radius)

    def jet(self, r, order: int) -> Jet:
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("radial profiles are defined for r >= 0")
        return self._jet_fn(r, order)

    def derivatives(self, r, order: int) -> np.ndarray:
        return self.jet(r, order).derivatives()

    def __call__(self, r) -> np.ndarray:
        return self.jet(r, 0).value

    def derivative(self) -> "RadialJet":
        f = self
        return RadialJet(lambda r, k: f.jet(r, k + 1).derivative(), self.r_max,
                         f"d({self.name})", self.taylor_radius,
                         self.antipode_radius)

    def scaled(self, c: float) -> "RadialJet":
        f = self
        return RadialJet(lambda r, k: f.jet(r, k) * c, self.r_max, self.name, self.taylor_radius,
                         self.antipode_radius)

    def __mul__(self, other: "RadialJet") -> "RadialJet":
        f = self
        if isinstance(other, RadialJet):
            return RadialJet(lambda r, k: f.jet(r, k) * other.jet(r, k),
                             min(self.r_max, other.r_max), f"{f.name}*{other.name}",
                             min(self.taylor_radius, other.taylor_radius),
                             min(self.antipode_radius, other.antipode_radius))
        return self.scaled(float(other))

    __rmul__ = __mul__

    def __add__(self, other: "RadialJet") -> "RadialJet":
        f = self
        return RadialJet(lambda r, k: f.jet(r, k) + other.jet(r, k),
                         min(self.r_max, other.r_max), f"{f.name}+{other.name}",
                         min(self.taylor_radius, other.taylor_radius),
                         min(self.antipode_radius, other.antipode_radius))

    def __sub__(self, other: "RadialJet") -> "RadialJet":
        return self + other.scaled(-1.0)


def laplacian_jet(f: Jet, r: Jet, n: int, geometry: str = EUCLID, sector: int = 0) -> Jet:
    """One application of the radial geometer's Laplacian to the jet ``f``.

    ``r`` is the jet of the radius itself (a variable jet of the same order).
    The result has order two less than ``f``.
    """
    fp = f.derivative()
    fpp = fp.derivative()
    if geometry == SPHERE:
        s, c = r.sincos()
        first = c * (fp / s) * (n - 1)
        radius_like = s
    elif geometry == EUCLID:
        first = (fp / r) * (n - 1)
        radius_like = r
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    out = -fpp - first
    if sector:
        out = out + (f / (radius_like * radius_like)) * (sector * (sector + n - 2))
    return out


TAYLOR_TERMS = 28


def recenter(coeffs: np.ndarray, r: np.ndarray, order: int) -> Jet:
    """Jet at radii r of the polynomial with Taylor coefficients ``coeffs`` at 0."""
    n_terms = coeffs.shape[0]
    out = np.zeros((order + 1,) + r.shape)
    for m in range(order + 1):
        acc = np.zeros(r.shape)
        for j in range(n_terms - 1, m - 1, -1):
            acc = acc * r + comb(j, m) * coeffs[j]
        out[m] = acc
    return Jet(out)


def shifted_power(f: RadialJet, n: int, times: int, alpha: float = 0.0,
                  geometry: str = EUCLID, sector: int = 0) -> RadialJet:
    """The profile of (Δ + α)^times f for a radial (or single-sector) profile f."""
    if times < 0:
        raise ValueError("times must be non-negative")

    def apply(r, order):
        g = f.jet(r, order + 2 * times)
        for _ in range(times):
            rr = Jet.variable(r, g.order)
            g = laplacian_jet(g, rr, n, geometry, sector) + alpha * g.truncate(g.order - 2)
        if g.order < order:
            raise ValueError("insufficient jet order")
        return g.truncate(order)

    def jet_fn(r, order):
        if times == 0:
            return f.jet(r, order)
        small = r < f.taylor_radius
        if not np.any(small):
            return apply(r, order)
        origin = apply(np.zeros(1), order + TAYLOR_TERMS).c[:, 0]
        near = recenter(origin, r[small], order)
        if np.all(small):
            return near
        out = np.zeros((order + 1,) + r.shape)
        out[:, small] = near.c
        out[:, ~small] = apply(r[~small], order).c
        return Jet(out)

    return RadialJet(jet_fn, f.r_max, f"(Δ+{alpha:g})^{times} {f.name}", f.taylor_radius,
                     f.antipode_radius)


def laplacian_power(f: RadialJet, n: int, times: int, geometry: str = EUCLID,
                    sector: int = 0) -> RadialJet:
    return shifted_power(f, n, times, 0.0, geometry, sector)


def gradient_energy_density(f: RadialJet, n: int, l: int, r, geometry: str = EUCLID,
                            sector: int = 0) -> np.ndarray:
    """Pointwise |Δ^{l/2} f|^2 for a profile f(r) Y(ω), angular factor excluded.

    For even l this is (Δ^{l/2} f)^2.  For odd l = 2m+1 it is
    |∇ Δ^m f|^2 = (g')^2 + m(m+n-2) g^2 / radius^2 with g = Δ^m f, which is
    the integrand once the angular mean of |∇_ω Y|^2 = m(m+n-2) Y^2 is used.
    """
    g = laplacian_power(f, n, l // 2, geometry, sector)
    if l % 2 == 0:
        return g(r) ** 2
    gd = g.derivatives(r, 1)
    out = gd[1] ** 2
    if sector:
        radius = np.sin(r) if geometry == SPHERE else np.asarray(r, dtype=float)
        out = out + sector * (sector + n - 2) * (gd[0] / radius) ** 2
    return out


# smooth step built from exp(-1/t) --------------------------------------------

def _psi(t: Jet) -> Jet:
    return (-1.0 / t).exp()


def smooth_step_jet(t: Jet) -> Jet:
    """C^∞ step: 0 for t <= 0, 1 for t >= 1, exp(-1/t)-based in between."""
    t0 = t.value
    inside = (t0 > 0.0) & (t0 < 1.0)
    safe = Jet(t.c.copy())
    safe.c[0] = np.where(inside, t0, 0.5)
    a = _psi(safe)
    b = _psi(1.0 - safe)
    s = a / (a + b)
    zeros = Jet.constant(0.0, t.order, t.shape)
    ones = Jet.constant(1.0, t.order, t.shape)
    out = where(inside, s, where(t0 >= 1.0, ones, zeros))
    return out


def smooth_step(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return smooth_step_jet(Jet.variable(t, 0)).value
