"""Stage metrics on S^3 x S^2, their orthonormal frames and connection data.

Points are ``(u, s)`` with ``u`` a unit quaternion and ``s`` a unit vector.  A
tangent vector is a pair ``(a, b)`` with ``a`` tangent to S^3 at ``u`` and
``b`` tangent to S^2 at ``s``.  Every metric is written through the scalar
1-forms

    zeta_a = <e_a u, a>          (dual to the right-invariant frame)
    tau    = <e_z x s, b>        (= sin^2 psi dtheta)

together with the plain inner product ``<b, b'>``, so all the formulas are
smooth across the poles of S^2 and can be evaluated on jets.

The deformation clock ``beta`` runs through three stages, bracketed by the
squish ``g^alpha`` (beta absent) and a post-squish leg that rescales the S^2
factor of the end state from radius 1/2 back to 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import jets as J
from .charts import ProductChart, centered_chart
from .errors import InvalidStage, MissingField, PoleSingularity
from .quaternion import E1, E2, E3, expi, qmul, qmul_c
from .twistmap import omega_flat

POLE_TOL = 1e-9
EZ = np.array([0.0, 0.0, 1.0])


# -- points and the circle action -------------------------------------------------

@dataclass
class ManifoldPoint:
    u: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.s = np.asarray(self.s, dtype=float)
        if np.any(np.abs(np.linalg.norm(self.u, axis=-1) - 1) > 1e-12):
            raise ValueError("u is not a unit quaternion")
        if np.any(np.abs(np.linalg.norm(self.s, axis=-1) - 1) > 1e-12):
            raise ValueError("s is not a unit vector")

    @classmethod
    def from_angles(cls, u, psi, theta):
        psi = np.asarray(psi, dtype=float)
        theta = np.asarray(theta, dtype=float)
        s = np.stack([np.cos(theta) * np.sin(psi), np.sin(theta) * np.sin(psi), np.cos(psi)], -1)
        return cls(u, s)

    @property
    def psi(self):
        return np.arccos(np.clip(self.s[..., 2], -1.0, 1.0))

    @property
    def theta(self):
        return np.mod(np.arctan2(self.s[..., 1], self.s[..., 0]), 2 * np.pi)

    def to_dict(self):
        return {"u": self.u.tolist(), "s": self.s.tolist()}


def rotate_z(s, angle):
    c, sn = np.cos(angle), np.sin(angle)
    x, y, z = s[..., 0], s[..., 1], s[..., 2]
    return np.stack([c * x - sn * y, sn * x + c * y, z], -1)


def action(theta, k, p: ManifoldPoint) -> ManifoldPoint:
    """(u, s) -> (e^{i theta} u, R_z(k theta) s)."""
    u = qmul(expi(theta), p.u)
    s = rotate_z(p.s, k * np.asarray(theta, dtype=float))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    s /= np.linalg.norm(s, axis=-1, keepdims=True)
    return ManifoldPoint(u, s)


def invariant_frame(u):
    """Right-invariant fields Z_a(u) = e_a u, shape (3, ..., 4)."""
    u = np.asarray(u, dtype=float)
    return np.stack([qmul(E1, u), qmul(E2, u), qmul(E3, u)])


def fiber_length(alpha, m, psi):
    """f^alpha(m)(psi) = sqrt(1 + alpha^2 m^2 sin^2 psi)."""
    return np.sqrt(1.0 + (alpha * m * np.sin(psi)) ** 2)


# -- stage parameters ------------------------------------------------------------

@dataclass(frozen=True)
class DeltaProfile:
    """delta(beta) on [2, 3]: exp of a clamped cubic through three knots.

    Knots are (2, 0), (2.5, ln interior_min), (3, -ln(2 alpha)) in log space
    with zero end slopes, so delta(2) = 1 and delta(3) = 1/(2 alpha).
    """

    interior_min: float
    alpha: float
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.interior_min > 0:
            raise ValueError("interior_min must be positive")
        knots = np.array([2.0, 2.5, 3.0])
        vals = np.array([0.0, np.log(self.interior_min), -np.log(2.0 * self.alpha)])
        object.__setattr__(self, "_spline", CubicSpline(knots, vals, bc_type=((1, 0.0), (1, 0.0))))

    def __call__(self, beta):
        return np.exp(self._spline(beta))

    def derivative(self, beta):
        return self(beta) * self._spline(beta, 1)

    def to_dict(self):
        return {"interior_min": self.interior_min, "alpha": self.alpha}


STAGES = ("squish", "beta01", "beta12", "beta23", "post")


@dataclass(frozen=True)
class StageSpec:
    """One metric of the path.

    ``beta=None`` is the squish product ``g^alpha``; ``rho`` set (with beta
    ignored) is the post-squish leg with S^2 radius ``rho`` in [1/2, 1].
    """

    k: int
    alpha: float
    beta: float | None = 0.0
    delta: DeltaProfile | None = None
    rho: float | None = None

    def __post_init__(self):
        if int(self.k) != self.k or int(self.k) % 2:
            raise InvalidStage(f"twisting index must be an even integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if not 0 < self.alpha <= 1:
            raise InvalidStage(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.rho is not None:
            if not 0.5 <= self.rho <= 1:
                raise InvalidStage(f"rho must lie in [1/2, 1], got {self.rho}")
            return
        if self.beta is not None and not 0 <= self.beta <= 3:
            raise InvalidStage(f"beta must lie in [0, 3], got {self.beta}")
        if self.stage == "beta23" and self.delta is None:
            object.__setattr__(self, "delta", DeltaProfile(1.0, self.alpha))

    @property
    def stage(self) -> str:
        if self.rho is not None:
            return "post"
        if self.beta is None:
            return "squish"
        if self.beta <= 1:
            return "beta01"
        if self.beta <= 2:
            return "beta12"
        return "beta23"

    def delta_value(self):
        return float(self.delta(self.beta)) if self.stage == "beta23" else 1.0

    @classmethod
    def from_dict(cls, d: dict) -> "StageSpec":
        for key in ("k", "alpha"):
            if key not in d:
                raise MissingField(key)
        alpha = float(d["alpha"])
        delta = DeltaProfile(float(d["delta_min"]), alpha) if d.get("delta_min") is not None else None
        beta = d.get("beta")
        return cls(d["k"], alpha, None if beta is None else float(beta), delta,
                   None if d.get("rho") is None else float(d["rho"]))

    @classmethod
    def from_json(cls, text: str) -> "StageSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        out = {"k": self.k, "alpha": self.alpha, "beta": self.beta}
        if self.delta is not None:
            out["delta_min"] = self.delta.interior_min
        if self.rho is not None:
            out["rho"] = self.rho
        return out


def omega_beta(u, a, zeta1, k: int, beta: float):
    """Connection field of Phi_beta on [2, 3] (affine in beta)."""
    lam = beta - 2.0
    om2 = [0.0 * zeta1, 0.0 * zeta1, -float(k) * zeta1]
    if lam == 0.0:
        return om2
    om3 = omega_flat(u, a, k // 2)
    return [(1.0 - lam) * x + lam * y for x, y in zip(om2, om3)]


# -- coordinate metric -----------------------------------------------------------

def _zeta(u, a):
    """(zeta_1, zeta_2, zeta_3) of an S^3 tangent vector a at u."""
    out = []
    for e in (E1, E2, E3):
        ea = qmul_c(list(e), u)
        out.append(J.dot(ea, a))
    return out


def _features(spec: StageSpec, u, s, tangent):
    a, b = tangent
    ez_x_s = [-1.0 * s[1], s[0], 0.0 * s[2]]
    if a is None:
        z = 0.0 * s[0]
        zeta = [z, z, z]
    else:
        zeta = _zeta(u, a)
    if b is None:
        z = 0.0 * s[0]
        b = [z, z, z]
        tau = z
    else:
        tau = J.dot(ez_x_s, b)
    if spec.stage in ("beta23", "post"):
        beta = 3.0 if spec.stage == "post" else spec.beta
        if a is not None:
            om = omega_beta(u, a, zeta[0], spec.k, beta)
            b = [x + y for x, y in zip(b, J.cross(om, s))]
    return zeta, tau, b


def _bilinear(spec: StageSpec, s, fv, fw):
    """g(v, w) from the features of two tangent vectors."""
    (zv, tv, bv), (zw, tw, bw) = fv, fw
    k, al = float(spec.k), spec.alpha
    zz = zv[0] * zw[0] + zv[1] * zw[1] + zv[2] * zw[2]
    bb = J.dot(bv, bw)
    stage = spec.stage
    if stage == "squish":
        return zz + al * al * bb
    if stage in ("beta23", "post"):
        scale = spec.rho ** 2 if stage == "post" else (spec.delta_value() * al) ** 2
        return zz + scale * bb
    S = 1.0 - s[2] * s[2]
    f2 = 1.0 + al * al * k * k * S
    if stage == "beta01":
        beta = spec.beta
        fb2 = 1.0 + al * al * (1.0 - beta) ** 2 * k * k * S
        e0v = (zv[0] + al * al * k * tv) / f2
        e0w = (zw[0] + al * al * k * tw) / f2
        ebv = (1.0 - beta) * e0v + beta * zv[0]
        ebw = (1.0 - beta) * e0w + beta * zw[0]
        return fb2 * ebv * ebw + zz + al * al * bb - f2 * e0v * e0w
    # beta12
    mb = spec.beta - 1.0
    r2 = (1.0 + al * al * mb * mb * k * k * S) / f2
    c1 = al * al * k * k * (mb * mb - 1.0) / f2
    return zz + al * al * (bb + c1 * tv * tw - r2 * k * (tv * zw[0] + tw * zv[0])
                           + r2 * k * k * S * zv[0] * zw[0])


def metric_function(spec: StageSpec, chart: ProductChart):
    """Metric function in the chart, usable by the oracle."""

    def metric(xs):
        u, s, tangents = chart.embed(xs)
        feats = [_features(spec, u, s, t) for t in tangents]
        n = len(tangents)
        rows = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                rows[i][j] = _bilinear(spec, s, feats[i], feats[j])
        return rows

    return metric


def fiber_metric_function(spec: StageSpec, u):
    """Quotient metric on the S^2 fiber over [u], in (psi, theta) coordinates.

    ``h(b, b') = g(b, b') - g(b, U) g(b', U) / g(U, U)`` with U = d_t; this is
    the metric of N restricted to the fiber of N -> S^2_{1/2} through [u].
    """
    from .charts import S2Spherical

    u = np.asarray(u, dtype=float)
    uc = [u[..., i] for i in range(4)]
    z1 = [x for x in qmul_c(list(E1), uc)]

    def metric(xs):
        s, (dpsi, dtheta) = S2Spherical().embed(xs)
        ez_x_s = [-1.0 * s[1], s[0], 0.0 * s[2]]
        feats = [_features(spec, uc, s, (None, dpsi)), _features(spec, uc, s, (None, dtheta))]
        fu = _features(spec, uc, s, (z1, [float(spec.k) * c for c in ez_x_s]))
        guu = _bilinear(spec, s, fu, fu)
        gu = [_bilinear(spec, s, f, fu) for f in feats]
        return [[_bilinear(spec, s, feats[i], feats[j]) - gu[i] * gu[j] / guu for j in range(2)]
                for i in range(2)]

    return metric


def ambient_bilinear(spec: StageSpec, u, s, v, w):
    """g(v, w) for ambient 7-vectors (a, b) stacked on the last axis."""
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    uc = [u[..., i] for i in range(4)]
    sc = [s[..., i] for i in range(3)]
    fv = _features(spec, uc, sc, ([v[..., i] for i in range(4)], [v[..., 4 + i] for i in range(3)]))
    fw = _features(spec, uc, sc, ([w[..., i] for i in range(4)], [w[..., 4 + i] for i in range(3)]))
    return _bilinear(spec, sc, fv, fw)


def default_chart(p: ManifoldPoint, spherical: bool = False) -> ProductChart:
    return centered_chart(p.u, p.s, spherical=spherical)


def chart_coords(chart: ProductChart, p: ManifoldPoint):
    return chart.coords_of(p.u, p.s)


def stage_metric(spec: StageSpec, p: ManifoldPoint, chart: ProductChart | None = None):
    """5x5 metric matrix in chart coordinates (centred chart by default)."""
    _check_pole(p)
    from .oracle import evaluate

    chart = chart or default_chart(p)
    x = np.atleast_2d(chart_coords(chart, p))
    G = evaluate(metric_function(spec, chart), x)[0]
    return G if np.ndim(p.u) > 1 else G[0]


# -- frames ----------------------------------------------------------------------

@dataclass
class FrameField:
    """Orthonormal 5-frame as ambient 7-vectors (..., 7, 5), columns U..F2."""

    ambient: np.ndarray
    labels: tuple = ("U", "Z2", "Z3", "F1", "F2")

    def in_chart(self, chart: ProductChart, coords):
        return chart.vectors_to_coords(coords, self.ambient)


def _check_pole(p: ManifoldPoint):
    sinpsi = np.sqrt(np.maximum(1.0 - p.s[..., 2] ** 2, 0.0))
    if np.any(sinpsi < POLE_TOL):
        raise PoleSingularity("frame legs are singular at psi in {0, pi}")


def _vec(a=None, b=None, shape=()):
    out = np.zeros(shape + (7,))
    if a is not None:
        out[..., :4] = a
    if b is not None:
        out[..., 4:] = b
    return out


def stage_frame(spec: StageSpec, p: ManifoldPoint) -> FrameField:
    _check_pole(p)
    u, s = p.u, p.s
    shape = u.shape[:-1]
    Z = invariant_frame(u)
    z = s[..., 2]
    sn = np.sqrt(1.0 - z * z)
    dtheta = np.cross(EZ, s)
    dpsi = (z[..., None] * s - EZ) / sn[..., None]
    k, al = float(spec.k), spec.alpha
    f = np.sqrt(1.0 + (al * k * sn) ** 2)
    col = lambda a=None, b=None: _vec(a, b, shape)  # noqa: E731
    dt = col(Z[0], k * dtheta)
    z2, z3 = col(Z[1]), col(Z[2])
    stage = spec.stage

    if stage in ("squish", "beta01"):
        beta = 0.0 if stage == "squish" else spec.beta
        fb = np.sqrt(1.0 + (al * (1 - beta) * k * sn) ** 2)
        U = dt / fb[..., None]
        F1 = col(b=dpsi / al)
        c_z = al * k * sn * (1 - beta) / f
        c_t = -1.0 / (al * sn * f) - beta * al * k * k * sn / f
        F2 = col(c_z[..., None] * Z[0], c_t[..., None] * dtheta)
        cols = [U, z2, z3, F1, F2]
    elif stage == "beta12":
        fm = np.sqrt(1.0 + (al * (spec.beta - 1) * k * sn) ** 2)
        F1 = col(b=dpsi / al)
        F2 = col(b=(-(f / fm) / (al * sn))[..., None] * dtheta)
        cols = [dt, z2, z3, F1, F2]
    else:
        scale = spec.rho if stage == "post" else spec.delta_value() * al
        beta = 3.0 if stage == "post" else spec.beta
        uc = [u[..., i] for i in range(4)]
        sc = [s[..., i] for i in range(3)]
        cols = [dt]
        for i in (1, 2):
            a = [Z[i][..., j] for j in range(4)]
            zeta1 = _zeta(uc, a)[0]
            om = omega_beta(uc, a, zeta1, spec.k, beta)
            lift = np.stack(J.cross(om, sc), -1)
            cols.append(col(Z[i], -lift))
        cols.append(col(b=dpsi / scale))
        cols.append(col(b=-dtheta / (scale * sn)[..., None]))
    return FrameField(np.stack(cols, -1))


def frame_gram(spec: StageSpec, p: ManifoldPoint, frame: FrameField):
    E = frame.ambient
    n = E.shape[-1]
    gram = np.empty(E.shape[:-2] + (n, n))
    for i in range(n):
        for j in range(n):
            gram[..., i, j] = ambient_bilinear(spec, p.u, p.s, E[..., i], E[..., j])
    return gram


# -- closed-form connection data -------------------------------------------------

@dataclass
class ConnectionData:
    """Closed-form connection data in the stage frame (functions of psi).

    ``omega`` holds the curvature-form slots (Z2^Z3, F1^F2); ``div_omega`` the
    F2 component of its divergence (all others vanish); ``grad_f`` the F1
    component of the gradient of the fiber length ``fb``; ``hess_f`` the
    (F1F1, F2F2) Hessian entries; ``lap_f`` the Laplacian.
    """

    eta: dict
    omega: tuple
    div_omega: np.ndarray | None = None
    f: np.ndarray | None = None
    grad_f: np.ndarray | None = None
    hess_f: tuple | None = None
    lap_f: np.ndarray | None = None


def connection_and_curvature(spec: StageSpec, psi) -> ConnectionData:
    psi = np.asarray(psi, dtype=float)
    sn, cs = np.sin(psi), np.cos(psi)
    if np.any(np.abs(sn) < POLE_TOL):
        raise PoleSingularity("closed forms are evaluated off the poles")
    if spec.stage != "beta01":
        return ConnectionData(eta={"U": 1.0}, omega=(np.full_like(psi, -2.0), np.zeros_like(psi)))
    return connection_beta01(spec.k, spec.alpha, spec.beta, psi)


def connection_beta01(k, alpha, beta, psi) -> ConnectionData:
    """Vectorised beta in [0, 1] connection data; beta and psi broadcast."""
    beta, psi = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(psi, dtype=float))
    sn, cs = np.sin(psi), np.cos(psi)
    k, al = float(k), float(alpha)
    mb = 1.0 - beta
    f = np.sqrt(1.0 + (al * k * sn) ** 2)
    fb = np.sqrt(1.0 + (al * mb * k * sn) ** 2)
    w1 = -2.0 * (beta + mb / f**2)
    w2 = -2.0 * mb * k * cs / f**3
    div0 = -2.0 * (al * k * sn / f**3) * (2.0 - 1.0 / al**2 - 3.0 * k**2 * cs**2 / f**2)
    div1 = -4.0 * al * k * sn / f
    div = mb * div0 + beta * div1
    grad = al * mb**2 * k**2 * sn * cs / fb
    m2k2 = (mb * k) ** 2
    h11 = fb * (m2k2 * cs**2 / fb**4 - m2k2 * sn**2 / fb**2)
    # the F2 leg sees the quotient circle length alpha sin(psi) / f
    h22 = m2k2 * cs**2 / (fb * f**2)
    lap = h11 + h22
    eta = {"U": 1.0 / fb}
    return ConnectionData(eta=eta, omega=(w1, w2), div_omega=div, f=fb, grad_f=grad,
                          hess_f=(h11, h22), lap_f=lap)
