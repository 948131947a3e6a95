"""Coordinate charts on S^3 x S^2.

Each sphere factor is covered by gnomonic charts: the chart centred at a unit
vector ``c`` sends coordinates ``x`` to ``(c + sum x_i t_i) / |...|`` where the
``t_i`` complete ``c`` to an orthonormal basis.  On S^3 the basis is
``c e_1, c e_2, c e_3`` (quaternion products), so the chart centred at ``c`` is
``x -> c (1 + x) / |1 + x|``.  The S^2 factor also has the spherical chart
``(psi, theta)``, used by the closed-form layer.

Every chart can be evaluated on jets and returns both the embedded point and
the coordinate tangent vectors, which is all the metric builders need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets as J
from .quaternion import qmul, qmul_c


def _complete_basis(c):
    """Two unit vectors completing each row of ``c`` (shape (..., 3))."""
    c = np.asarray(c, dtype=float)
    idx = np.argmin(np.abs(c), axis=-1)
    e = np.eye(3)[idx]
    t1 = e - np.sum(e * c, axis=-1, keepdims=True) * c
    t1 /= np.linalg.norm(t1, axis=-1, keepdims=True)
    t2 = np.cross(c, t1)
    return t1, t2


@dataclass
class S3Gnomonic:
    center: np.ndarray  # (..., 4) unit quaternion

    def embed(self, x):
        """x: three coordinate arrays or jets -> (u components, [du/dx_j])."""
        c = [self.center[..., i] for i in range(4)]
        n2 = 1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
        n = J.sqrt(n2)
        inv = 1.0 / n
        inv3 = inv / n2
        w = [1.0, x[0], x[1], x[2]]
        v = [wi * inv for wi in w[1:]]
        v.insert(0, inv)
        u = qmul_c(c, v)
        tangents = []
        for j in range(3):
            dv = [-(w[0] * x[j]) * inv3] + [-(w[i] * x[j]) * inv3 for i in range(1, 4)]
            dv[j + 1] = dv[j + 1] + inv
            tangents.append(qmul_c(c, dv))
        return u, tangents

    def coords_of(self, u):
        v = qmul(self.center * np.array([1.0, -1, -1, -1]), u)
        if np.any(v[..., 0] <= 0):
            raise ValueError("point outside gnomonic chart")
        return v[..., 1:] / v[..., :1]


@dataclass
class S2Gnomonic:
    center: np.ndarray  # (..., 3)

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.t1, self.t2 = _complete_basis(self.center)

    def embed(self, y):
        c, t1, t2 = self.center, self.t1, self.t2
        n2 = 1.0 + y[0] * y[0] + y[1] * y[1]
        inv = 1.0 / J.sqrt(n2)
        inv3 = inv / n2
        w = [c[..., i] + y[0] * t1[..., i] + y[1] * t2[..., i] for i in range(3)]
        s = [wi * inv for wi in w]
        tangents = []
        for j, t in enumerate((t1, t2)):
            tangents.append([t[..., i] * inv - w[i] * y[j] * inv3 for i in range(3)])
        return s, tangents

    def coords_of(self, s):
        d = np.sum(s * self.center, axis=-1)
        if np.any(d <= 0):
            raise ValueError("point outside gnomonic chart")
        return np.stack([np.sum(s * self.t1, -1) / d, np.sum(s * self.t2, -1) / d], -1)


@dataclass
class S2Spherical:
    """(psi, theta) with s = (cos t sin p, sin t sin p, cos p)."""

    def embed(self, y):
        psi, theta = y
        sp, cp = J.sin(psi), J.cos(psi)
        st, ct = J.sin(theta), J.cos(theta)
        s = [ct * sp, st * sp, cp]
        d_psi = [ct * cp, st * cp, -1.0 * sp]
        d_theta = [-1.0 * (st * sp), ct * sp, 0.0 * sp]
        return s, [d_psi, d_theta]

    def coords_of(self, s):
        s = np.asarray(s, dtype=float)
        psi = np.arccos(np.clip(s[..., 2], -1.0, 1.0))
        theta = np.mod(np.arctan2(s[..., 1], s[..., 0]), 2 * np.pi)
        return np.stack([psi, theta], -1)


@dataclass
class ProductChart:
    """Chart on S^3 x S^2 with coordinates (x1, x2, x3, y1, y2)."""

    s3: S3Gnomonic
    s2: object
    chart_id: str = "centered"

    dim = 5

    def embed(self, coords):
        """Returns ``(u, s, tangents)`` where ``tangents[mu] = (a_mu, b_mu)``.

        ``a_mu`` (4 components, or None) and ``b_mu`` (3 components, or None)
        are the S^3 and S^2 parts of the coordinate vector d/dx_mu.
        """
        u, du = self.s3.embed(coords[:3])
        s, ds = self.s2.embed(coords[3:])
        tangents = [(a, None) for a in du] + [(None, b) for b in ds]
        return u, s, tangents

    def coords_of(self, u, s):
        return np.concatenate([self.s3.coords_of(u), self.s2.coords_of(s)], axis=-1)

    def jacobian(self, coords):
        """Numeric (..., 7, 5) matrix of ambient coordinate vectors."""
        coords = np.asarray(coords, dtype=float)
        cols = [coords[..., i] for i in range(5)]
        _, _, tangents = self.embed(cols)
        shape = coords.shape[:-1]
        jac = np.zeros(shape + (7, 5))
        for mu, (a, b) in enumerate(tangents):
            if a is not None:
                for i in range(4):
                    jac[..., i, mu] = a[i]
            if b is not None:
                for i in range(3):
                    jac[..., 4 + i, mu] = b[i]
        return jac

    def vectors_to_coords(self, coords, ambient):
        """Express ambient tangent vectors (..., 7, m) in chart components."""
        jac = self.jacobian(coords)
        jt = np.swapaxes(jac, -1, -2)
        return np.linalg.solve(jt @ jac, jt @ ambient)


_S3_AXES = {f"{sign}{name}": sgn * np.eye(4)[i]
            for i, name in enumerate("1ijk") for sign, sgn in (("+", 1.0), ("-", -1.0))}
_S2_AXES = {f"{sign}{name}": sgn * np.eye(3)[i]
            for i, name in enumerate("xyz") for sign, sgn in (("+", 1.0), ("-", -1.0))}


def centered_chart(u, s, spherical: bool = False) -> ProductChart:
    """Chart centred at the points themselves, so their coordinates are 0.

    With ``spherical=True`` the S^2 factor uses (psi, theta) instead.
    """
    u = np.asarray(u, dtype=float)
    s2 = S2Spherical() if spherical else S2Gnomonic(np.asarray(s, dtype=float))
    return ProductChart(S3Gnomonic(u), s2, "centered-spherical" if spherical else "centered")


def atlas_chart(u, s) -> ProductChart:
    """Pick, per factor, the axis-centred gnomonic chart nearest the point.

    Works on single points only; the returned chart id names both centres.
    """
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    k3 = max(_S3_AXES, key=lambda key: float(np.dot(_S3_AXES[key], u)))
    k2 = max(_S2_AXES, key=lambda key: float(np.dot(_S2_AXES[key], s)))
    return ProductChart(S3Gnomonic(_S3_AXES[k3]), S2Gnomonic(_S2_AXES[k2]), f"S3:{k3},S2:{k2}")
