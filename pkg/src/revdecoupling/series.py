"""Truncated Taylor series arithmetic (Taylor-mode differentiation).

A :class:`Series` holds the coefficients ``c[0..order]`` of

    f(r0 + t) = c0 + c1*t + c2*t**2 + ... + c_order*t**order + O(t**(order+1))

Coefficients are stored as a numpy array of shape ``(order + 1, *batch)`` so
a single object carries the jets of many expansion points at once.  Every
operation below is an exact recurrence on the coefficients; nothing is
computed by finite differences.
"""

from __future__ import annotations

import math

import numpy as np


class Series:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.ndim == 0:
            raise ValueError("series needs at least one coefficient")

    @classmethod
    def variable(cls, r0, order: int) -> "Series":
        """The identity function expanded about ``r0``."""
        r0 = np.asarray(r0, dtype=float)
        c = np.zeros((order + 1,) + r0.shape)
        c[0] = r0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int, shape=()) -> "Series":
        c = np.zeros((order + 1,) + tuple(shape))
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            if other.order != self.order:
                raise ValueError("series orders differ")
            return other
        c = np.zeros_like(self.c)
        c[0] = other
        return Series(c)

    def __neg__(self):
        return Series(-self.c)

    def __add__(self, other):
        return Series(self.c + self._coerce(other).c)

    __radd__ = __add__

    def __sub__(self, other):
        return Series(self.c - self._coerce(other).c)

    def __rsub__(self, other):
        return Series(self._coerce(other).c - self.c)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return Series(self.c * other)
        b = self._coerce(other).c
        a = self.c
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for k in range(self.order + 1):
            out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
        return Series(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Series):
            return Series(self.c / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self) -> "Series":
        a = self.c
        if np.any(a[0] == 0):
            raise ZeroDivisionError("reciprocal of a series with zero constant term")
        out = np.zeros_like(a)
        out[0] = 1.0 / a[0]
        for k in range(1, self.order + 1):
            out[k] = -np.sum(a[1 : k + 1] * out[k - 1 :: -1][:k], axis=0) / a[0]
        return Series(out)

    def sqrt(self) -> "Series":
        a = self.c
        if np.any(a[0] <= 0):
            raise ValueError("sqrt of a series needs a positive constant term")
        out = np.zeros_like(a)
        out[0] = np.sqrt(a[0])
        for k in range(1, self.order + 1):
            # a_k = sum_{j=0..k} out_j out_{k-j}
            cross = np.sum(out[1:k] * out[k - 1 : 0 : -1], axis=0) if k > 1 else 0.0
            out[k] = (a[k] - cross) / (2.0 * out[0])
        return Series(out)

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Series.constant(1.0, self.order, self.c.shape[1:])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivatives(self) -> np.ndarray:
        """Return ``f^(m)(r0) = m! c_m`` for ``m = 0..order``."""
        fact = np.array([math.factorial(m) for m in range(self.order + 1)], dtype=float)
        return self.c * fact.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def __repr__(self):
        return f"Series({self.c!r})"


def horner(coeffs, t: Series) -> Series:
    """Evaluate the polynomial ``sum coeffs[j] * t**j`` on a series argument."""
    result = Series.constant(0.0, t.order, t.c.shape[1:])
    for a in reversed(list(coeffs)):
        result = result * t + a
    return result
