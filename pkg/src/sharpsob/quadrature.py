"""Quadrature rules: mapped Gauss-Legendre on half-lines, graded panels,
and product rules on spheres."""

from __future__ import annotations

from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


def sphere_area(d: int) -> float:
    """Area of the unit sphere S^d in R^{d+1}."""
    return 2.0 * pi ** ((d + 1) / 2.0) / gamma((d + 1) / 2.0)


@lru_cache(maxsize=64)
def _legendre(q: int):
    x, w = roots_legendre(q)
    return x, w


def gauss_legendre(a: float, b: float, q: int):
    x, w = _legendre(q)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def half_line_rule(nodes: int, scale: float = 1.0):
    """Gauss-Legendre rule for ∫_0^∞ through r = scale·tan(s), s ∈ (0, π/2).

    Integrands decaying like a power of r become analytic in s, so the rule
    converges geometrically; no tail truncation is involved.
    """
    s, ws = gauss_legendre(0.0, pi / 2.0, nodes)
    r = scale * np.tan(s)
    w = ws * scale / np.cos(s) ** 2
    return r, w


def panel_rule(breakpoints, q: int):
    """Composite Gauss-Legendre rule on consecutive panels."""
    bp = np.asarray(breakpoints, dtype=float)
    if np.any(np.diff(bp) <= 0):
        raise ValueError("breakpoints must be strictly increasing")
    xs, ws = [], []
    for a, b in zip(bp[:-1], bp[1:]):
        x, w = gauss_legendre(a, b, q)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def graded_breakpoints(r_max: float, scale: float, ratio: float = 2.0,
                       h_max: float | None = None, marks=(), first: float = 0.25):
    """Breakpoints on [0, r_max] graded geometrically away from r = 0.

    The first panel ends at ``first*scale``; panel lengths then grow by
    ``ratio`` until they reach ``h_max``.  Every value in ``marks`` inside
    (0, r_max) becomes a breakpoint.
    """
    if h_max is None:
        h_max = r_max / 8.0
    x = min(first * scale, h_max)
    pts = [0.0, x]
    while x < r_max:
        x = x + min(x * (ratio - 1.0), h_max)
        pts.append(x)
    pts = sorted(set(pts) | {m for m in marks if 0.0 < m < r_max})
    out = [pts[0]]
    for p in pts[1:]:
        if p - out[-1] > 1e-14 * max(1.0, r_max):
            out.append(p)
    if out[-1] != r_max:
        out[-1] = r_max
    return np.array(out)


def refine_interval(breakpoints, a: float, b: float, pieces: int, grading: float = 1.0):
    """Insert ``pieces-1`` interior breakpoints into [a, b], graded toward both ends."""
    t = np.linspace(0.0, 1.0, pieces + 1)
    if grading != 1.0:
        t = 0.5 * (1.0 - np.cos(np.pi * t))
    extra = a + (b - a) * t
    return np.unique(np.concatenate([np.asarray(breakpoints, dtype=float), extra]))


@lru_cache(maxsize=32)
def sphere_rule(d: int, degree: int):
    """Product rule on S^d ⊂ R^{d+1}, exact for polynomials of the given degree.

    Returns (points, weights) with points of shape (N, d+1).  Polar angles use
    Gauss-Jacobi nodes in cos θ for the weight sin^{j}θ, the azimuth a
    uniform rule.
    """
    if d < 1:
        raise ValueError("sphere dimension must be at least 1")
    q = degree // 2 + 1
    m = degree + 1
    phi = 2.0 * pi * np.arange(m) / m
    pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    wts = np.full(m, 2.0 * pi / m)
    for j in range(1, d):
        # attach one more polar angle with density sin^j θ
        a = (j - 1) / 2.0
        t, wt = roots_jacobi(q, a, a)
        st = np.sqrt(1.0 - t * t)
        new_pts = np.concatenate(
            [np.einsum("i,jk->ijk", st, pts), np.broadcast_to(t[:, None, None], (q, pts.shape[0], 1))],
            axis=2,
        ).reshape(-1, pts.shape[1] + 1)
        wts = np.einsum("i,j->ij", wt, wts).reshape(-1)
        pts = new_pts
    return pts, wts
