"""Second-order truncated multivariate jets (forward-mode dual numbers).

A :class:`Jet` carries a value together with its gradient and Hessian with
respect to ``n`` seed variables.  All three fields have a shared leading batch
shape, so a single jet describes the same scalar expression evaluated at many
points at once:

    v : (...,)        value
    g : (..., n)      gradient
    h : (..., n, n)   Hessian

Arithmetic with plain floats or numpy arrays broadcasting against the batch
shape is supported; those are treated as constants.
"""

from __future__ import annotations

import numpy as np


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


class Jet:
    __slots__ = ("v", "g", "h")
    # make ndarray (op) Jet defer to the Jet reflected operators
    __array_ufunc__ = None

    def __init__(self, v, g, h):
        self.v = v
        self.g = g
        self.h = h

    @property
    def nvars(self) -> int:
        return self.g.shape[-1]

    @classmethod
    def variable(cls, values, index: int, n: int) -> "Jet":
        values = np.asarray(values, dtype=float)
        g = np.zeros(values.shape + (n,))
        g[..., index] = 1.0
        return cls(values.copy(), g, np.zeros(values.shape + (n, n)))

    @classmethod
    def constant(cls, values, n: int) -> "Jet":
        values = np.asarray(values, dtype=float)
        return cls(values.copy(), np.zeros(values.shape + (n,)), np.zeros(values.shape + (n, n)))

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v + other.v, self.g + other.g, self.h + other.h)
        return Jet(self.v + other, self.g, self.h)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v - other.v, self.g - other.g, self.h - other.h)
        return Jet(self.v - other, self.g, self.h)

    def __rsub__(self, other):
        return Jet(other - self.v, -self.g, -self.h)

    def __neg__(self):
        return Jet(-self.v, -self.g, -self.h)

    def __mul__(self, other):
        if isinstance(other, Jet):
            og = _outer(self.g, other.g)
            return Jet(
                self.v * other.v,
                self.g * other.v[..., None] + other.g * self.v[..., None],
                self.h * other.v[..., None, None]
                + other.h * self.v[..., None, None]
                + og
                + np.swapaxes(og, -1, -2),
            )
        c = np.asarray(other, dtype=float)
        return Jet(self.v * c, self.g * c[..., None], self.h * c[..., None, None])

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        inv = 1.0 / self.v
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            if p == 0:
                return Jet.constant(np.ones_like(self.v), self.nvars)
            if p < 0:
                return (self ** (-p)).reciprocal()
            result = None
            base = self
            e = int(p)
            while e:
                if e & 1:
                    result = base if result is None else result * base
                e >>= 1
                if e:
                    base = base * base
            return result
        p = float(p)
        v = self.v
        return self._chain(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def _chain(self, f0, f1, f2) -> "Jet":
        return Jet(
            f0,
            self.g * f1[..., None],
            self.h * f1[..., None, None] + _outer(self.g, self.g) * f2[..., None, None],
        )

    def __repr__(self):
        return f"Jet(v={self.v!r})"


def value(x):
    return x.v if isinstance(x, Jet) else x


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    r = np.sqrt(x.v)
    return x._chain(r, 0.5 / r, -0.25 / (r * x.v))


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x)
    s, c = np.sin(x.v), np.cos(x.v)
    return x._chain(s, c, -s)


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x)
    s, c = np.sin(x.v), np.cos(x.v)
    return x._chain(c, -s, -c)


def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x)
    e = np.exp(x.v)
    return x._chain(e, e, e)


def log(x):
    if not isinstance(x, Jet):
        return np.log(x)
    inv = 1.0 / x.v
    return x._chain(np.log(x.v), inv, -inv * inv)


def dot(a, b):
    """Sum of componentwise products of two equal-length sequences."""
    total = a[0] * b[0]
    for x, y in zip(a[1:], b[1:]):
        total = total + x * y
    return total


def cross(a, b):
    return [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]


def stack_matrix(rows):
    """Turn an n x n nested list of jets into (value, d, dd) arrays.

    Returns ``G`` with shape (..., n, n), ``dG`` with shape (..., n, n, n)
    indexed ``[.., lam, mu, nu] = d_lam g_mu_nu`` and ``ddG`` with shape
    (..., n, n, n, n) indexed ``[.., lam, kap, mu, nu]``.
    """
    n = len(rows)
    G = np.stack([np.stack([rows[i][j].v for j in range(n)], -1) for i in range(n)], -2)
    dG = np.stack([np.stack([rows[i][j].g for j in range(n)], -1) for i in range(n)], -2)
    ddG = np.stack([np.stack([rows[i][j].h for j in range(n)], -1) for i in range(n)], -2)
    return G, dG, ddG
