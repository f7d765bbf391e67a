"""Truncated Taylor arithmetic ("jets") over numpy arrays.

A :class:`Jet` of order K stores the normalized Taylor coefficients
``c[j] = f^{(j)}(x0) / j!`` for ``j = 0..K`` at a whole array of base
points at once.  Arithmetic follows the usual Cauchy-product recurrences,
so derivatives of composite radial profiles come out exact up to rounding.
"""

from __future__ import annotations

from math import factorial

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim == 0:
            raise ValueError("jet coefficients need a leading order axis")
        self.c = c

    # construction -------------------------------------------------------
    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        x = np.asarray(x, dtype=float)
        c = np.zeros((order + 1,) + x.shape)
        c[0] = x
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int, shape=()) -> "Jet":
        c = np.zeros((order + 1,) + tuple(shape))
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def shape(self):
        return self.c.shape[1:]

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivatives(self) -> np.ndarray:
        """Array of f, f', ..., f^{(K)} stacked along axis 0."""
        fac = np.array([factorial(j) for j in range(self.order + 1)], dtype=float)
        return self.c * fac.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def derivative(self) -> "Jet":
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        j = np.arange(1, self.order + 1, dtype=float)
        return Jet(self.c[1:] * j.reshape((-1,) + (1,) * (self.c.ndim - 1)))

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Jet(self.c[: order + 1])

    def copy(self) -> "Jet":
        return Jet(self.c.copy())

    # helpers ------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return self.c[: k + 1], other.c[: k + 1]
        other = np.asarray(other, dtype=float)
        oc = np.zeros_like(self.c)
        oc[0] = other
        return self.c, oc

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a - b)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet(b - a)

    def __neg__(self):
        return Jet(-self.c)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other, dtype=float))
        a, b = self._coerce(other)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for j in range(a.shape[0]):
            out[j] = np.einsum("i...,i...->...", a[: j + 1], b[j::-1])
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / np.asarray(other, dtype=float))
        return _series_divide(self, other)

    def __rtruediv__(self, other):
        return _series_divide(Jet.constant(other, self.order, self.shape), self)

    def __pow__(self, a):
        a = float(a)
        if a == int(a) and 0 <= a <= 4:
            out = Jet.constant(1.0, self.order, self.shape)
            for _ in range(int(a)):
                out = out * self
            return out
        f = self.c
        g = np.zeros_like(f)
        g[0] = f[0] ** a
        for k in range(1, self.order + 1):
            acc = np.zeros_like(f[0])
            for j in range(1, k + 1):
                acc = acc + (a * j - (k - j)) * f[j] * g[k - j]
            g[k] = acc / (k * f[0])
        return Jet(g)

    # elementary functions ---------------------------------------------------
    def exp(self) -> "Jet":
        f = self.c
        g = np.zeros_like(f)
        g[0] = np.exp(f[0])
        for k in range(1, self.order + 1):
            acc = np.zeros_like(f[0])
            for j in range(1, k + 1):
                acc = acc + j * f[j] * g[k - j]
            g[k] = acc / k
        return Jet(g)

    def log(self) -> "Jet":
        f = self.c
        g = np.zeros_like(f)
        g[0] = np.log(f[0])
        for k in range(1, self.order + 1):
            acc = f[k].copy()
            for j in range(1, k):
                acc = acc - j * g[j] * f[k - j] / k
            g[k] = acc / f[0]
        return Jet(g)

    def sincos(self):
        f = self.c
        s = np.zeros_like(f)
        c = np.zeros_like(f)
        s[0] = np.sin(f[0])
        c[0] = np.cos(f[0])
        for k in range(1, self.order + 1):
            acc_s = np.zeros_like(f[0])
            acc_c = np.zeros_like(f[0])
            for j in range(1, k + 1):
                acc_s = acc_s + j * f[j] * c[k - j]
                acc_c = acc_c - j * f[j] * s[k - j]
            s[k] = acc_s / k
            c[k] = acc_c / k
        return Jet(s), Jet(c)

    def sin(self) -> "Jet":
        return self.sincos()[0]

    def cos(self) -> "Jet":
        return self.sincos()[1]


def _series_divide(num: Jet, den: Jet) -> Jet:
    """Quotient of two jets.

    Where the denominator's leading coefficient is exactly zero both series
    are shifted (a removable singularity such as f'(r)/r at r = 0); each
    shift costs one order everywhere so the array stays rectangular.
    """
    k = min(num.order, den.order)
    a = num.c[: k + 1]
    b = den.c[: k + 1]
    a, b = np.broadcast_arrays(a, b)
    a = a.copy()
    b = b.copy()
    while True:
        zero = b[0] == 0.0
        if not np.any(zero):
            break
        if k < 1:
            raise ZeroDivisionError("removable singularity needs a higher jet order")
        a[:-1, zero] = a[1:, zero]
        b[:-1, zero] = b[1:, zero]
        a[-1, zero] = 0.0
        b[-1, zero] = 1.0
        k -= 1
        a = a[: k + 1]
        b = b[: k + 1]
    g = np.zeros_like(a)
    for j in range(k + 1):
        acc = a[j].copy()
        for i in range(1, j + 1):
            acc = acc - b[i] * g[j - i]
        g[j] = acc / b[0]
    return Jet(g)


def where(mask, a: Jet, b: Jet) -> Jet:
    k = min(a.order, b.order)
    return Jet(np.where(mask, a.c[: k + 1], b.c[: k + 1]))


def compose(outer_derivs: np.ndarray, inner: Jet) -> Jet:
    """Jet of g(f) given the derivatives g^{(j)}(f(x0)), j = 0..K."""
    k = inner.order
    shift = Jet(np.concatenate([np.zeros((1,) + inner.shape), inner.c[1:]]))
    out = Jet.constant(0.0, k, inner.shape)
    power = Jet.constant(1.0, k, inner.shape)
    for j in range(k + 1):
        out = out + power * (outer_derivs[j] / factorial(j))
        power = power * shift
    return out
