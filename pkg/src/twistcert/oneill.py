"""Closed-form Ricci curvature of the stage metrics.

Two generic building blocks are provided: O'Neill's formulas for a
submersion with totally geodesic fibers (and its canonical variation), and
the Ricci formulas for a principal circle bundle with a fiber-length warp.
``closed_form_ricci`` assembles them into the 5x5 frame matrix of each stage
from hand-transcribed scalar formulas in psi.

Frames are ordered (U, Z2, Z3, F1, F2).  The curvature 2-form is taken with
``omega(X, Y) = -eta([X, Y])`` for horizontal X, Y, so the Hopf bundle has
``omega = -2 Z2* ^ Z3*`` and ``|omega|^2 = 4``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingField, NonpositiveScale, PoleSingularity, StageHasNoClosedForm
from .frames import POLE_TOL, StageSpec, connection_beta01
from .report import FRAME_LABELS, RicciReport

__all__ = [
    "RicciReport",
    "SubmersionData",
    "ricci_totally_geodesic",
    "ricci_canonical_variation",
    "ricci_s1_bundle",
    "div_pullback_volume",
    "closed_form_ricci",
    "quotient_ricci",
    "quotient_ricci_beta12",
]


@dataclass
class SubmersionData:
    """Frame components of the pieces entering the submersion formulas.

    Shapes (with a possible leading batch): ``A`` is (h, h, v) with
    ``A[i, j, a] = <A_{X_i} X_j, V_a>``; ``divA`` is (h, v); ``omega`` and
    ``hessF`` are (h, h); ``gradF`` and ``divOmega`` are (h,).
    """

    fiberRicci: np.ndarray | None = None
    baseRicci: np.ndarray | None = None
    A: np.ndarray | None = None
    divA: np.ndarray | None = None
    f: np.ndarray | float | None = None
    gradF: np.ndarray | None = None
    hessF: np.ndarray | None = None
    laplF: np.ndarray | float | None = None
    omega: np.ndarray | None = None
    divOmega: np.ndarray | None = None

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise MissingField(name)


def _blocks_canonical(d: SubmersionData, t: float):
    d.require("A", "fiberRicci", "baseRicci")
    A = np.asarray(d.A, dtype=float)
    vert = np.asarray(d.fiberRicci, dtype=float) + t * t * np.einsum("...ija,...ijb->...ab", A, A)
    horiz = np.asarray(d.baseRicci, dtype=float) - 2.0 * t * np.einsum("...xia,...yia->...xy", A, A)
    if d.divA is None:
        mixed = np.zeros(A.shape[:-3] + (A.shape[-3], A.shape[-1]))
    else:
        mixed = t * np.asarray(d.divA, dtype=float)
    return {"vertical": vert, "mixed": mixed, "horizontal": horiz}


def ricci_totally_geodesic(d: SubmersionData) -> dict:
    """Ricci blocks of a submersion with totally geodesic fibers.

    ``vertical = Ric_F + (AU, AV)``, ``mixed[x, a] = (div A)`` and
    ``horizontal = Ric_B - 2 (A_X, A_Y)``.
    """
    return _blocks_canonical(d, 1.0)


def ricci_canonical_variation(d: SubmersionData, t: float) -> dict:
    """The same blocks after scaling the fiber metric by ``t``.

    Vertical entries are evaluated on vectors that are unit for the
    unscaled metric; divide by ``t`` for a ``g_t``-orthonormal frame.
    """
    if not t > 0:
        raise NonpositiveScale(f"fiber scale must be positive, got {t}")
    return _blocks_canonical(d, t)


def assemble(blocks: dict, labels=None) -> RicciReport:
    """Stack vertical/mixed/horizontal blocks into one frame matrix."""
    v, m, h = blocks["vertical"], blocks["mixed"], blocks["horizontal"]
    nv, nh = v.shape[-1], h.shape[-1]
    out = np.zeros(np.broadcast_shapes(v.shape[:-2], h.shape[:-2]) + (nv + nh, nv + nh))
    out[..., :nv, :nv] = v
    out[..., nv:, nv:] = h
    out[..., nv:, :nv] = m
    out[..., :nv, nv:] = np.swapaxes(m, -1, -2)
    return RicciReport(out, tuple(labels) if labels else tuple(f"e{i}" for i in range(nv + nh)))


def ricci_s1_bundle(d: SubmersionData, labels=FRAME_LABELS) -> RicciReport:
    """Ricci of a circle bundle over a base with warped unit fiber field.

    ``Ric(U,U) = -lap f / f + f^2/2 |omega|^2``,
    ``Ric(U,X) = 1/2 (-f div omega(X) + 3 omega(X, grad f))``,
    ``Ric(X,Y) = Ric_B(X,Y) - f^2/2 <omega(X,.), omega(Y,.)> - Hess f(X,Y) / f``.
    """
    d.require("f", "gradF", "hessF", "laplF", "omega", "divOmega", "baseRicci")
    om = np.asarray(d.omega, dtype=float)
    f = np.asarray(d.f, dtype=float)
    grad = np.asarray(d.gradF, dtype=float)
    n = om.shape[-1]
    out = np.zeros(om.shape[:-2] + (n + 1, n + 1))
    om_sq = 0.5 * np.sum(om * om, axis=(-1, -2))
    out[..., 0, 0] = -np.asarray(d.laplF) / f + 0.5 * f * f * om_sq
    mixed = 0.5 * (-f[..., None] * np.asarray(d.divOmega) + 3.0 * np.einsum("...xy,...y->...x", om, grad))
    out[..., 0, 1:] = mixed
    out[..., 1:, 0] = mixed
    ff = (0.5 * f * f)[..., None, None]
    out[..., 1:, 1:] = (np.asarray(d.baseRicci) - ff * np.einsum("...xz,...yz->...xy", om, om)
                        - np.asarray(d.hessF) / f[..., None, None])
    return RicciReport(out, tuple(labels))


def div_pullback_volume(a_x1x2, n_horizontal: int = 2):
    """Divergence of the pullback of a base volume form.

    ``a_x1x2`` holds the components <A(X1, X2), V_a> on the vertical legs; the
    returned 1-form is zero on the ``n_horizontal`` horizontal legs (listed
    first) and ``2 <A(X1, X2), V_a>`` on the vertical ones.
    """
    a = np.asarray(a_x1x2, dtype=float)
    out = np.zeros(a.shape[:-1] + (n_horizontal + a.shape[-1],))
    out[..., n_horizontal:] = 2.0 * a
    return out


# -- scalar closed forms --------------------------------------------------------

def _f_and_derivatives(a, psi):
    """f = sqrt(1 + a sin^2 psi) with its first two psi-derivatives."""
    sn, cs = np.sin(psi), np.cos(psi)
    f = np.sqrt(1.0 + a * sn * sn)
    f1 = a * sn * cs / f
    f2 = (a * (cs * cs - sn * sn) - f1 * f1) / f
    return f, f1, f2


def quotient_ricci(k, alpha, psi):
    """Diagonal Ricci of the quotient metric in (Z2, Z3, F1, F2)."""
    sn, cs = np.sin(psi), np.cos(psi)
    f2 = 1.0 + (alpha * k * sn) ** 2
    kc2, ks2 = (k * cs) ** 2, (k * sn) ** 2
    rz = 2.0 + 2.0 / f2
    rf1 = 1.0 / alpha**2 + 3.0 * kc2 / f2**2 - ks2 / f2
    rf2 = (2.0 * alpha**2 * ks2 + 1.0 / alpha**2) / f2 + 3.0 * kc2 / f2**2
    return rz, rf1, rf2


def fiber_curvature(k, alpha, beta, psi):
    """Gauss curvature of the S^2 fibers of h_beta for beta in [1, 2]."""
    m = (beta - 1.0) * k
    fm, fm1, fm2 = _f_and_derivatives((alpha * m) ** 2, psi)
    fk, fk1, fk2 = _f_and_derivatives((alpha * k) ** 2, psi)
    r = fm / fk
    r1 = (fm1 * fk - fm * fk1) / fk**2
    r2 = fm2 / fk - 2.0 * fm1 * fk1 / fk**2 - fm * fk2 / fk**2 + 2.0 * fm * fk1**2 / fk**3
    sn, cs = np.sin(psi), np.cos(psi)
    phi = r * sn
    phi2 = r2 * sn + 2.0 * r1 * cs - r * sn
    return -phi2 / (alpha**2 * phi), r


def _check(psi):
    psi = np.asarray(psi, dtype=float)
    if np.any(np.abs(np.sin(psi)) < POLE_TOL):
        raise PoleSingularity("closed forms are evaluated off the poles")
    return psi


def _beta01(k, alpha, beta, psi):
    cd = connection_beta01(k, alpha, beta, psi)
    rz, rf1, rf2 = quotient_ricci(k, alpha, psi)
    z = np.zeros_like(psi)
    base = np.stack([np.stack([rz, z, z, z], -1), np.stack([z, rz, z, z], -1),
                     np.stack([z, z, rf1, z], -1), np.stack([z, z, z, rf2], -1)], -2)
    w1, w2 = cd.omega
    omega = np.zeros(psi.shape + (4, 4))
    omega[..., 0, 1], omega[..., 1, 0] = w1, -w1
    omega[..., 2, 3], omega[..., 3, 2] = w2, -w2
    grad = np.stack([z, z, cd.grad_f, z], -1)
    hess = np.zeros(psi.shape + (4, 4))
    hess[..., 2, 2], hess[..., 3, 3] = cd.hess_f
    div = np.stack([z, z, z, cd.div_omega], -1)
    d = SubmersionData(baseRicci=base, f=cd.f, gradF=grad, hessF=hess, laplF=cd.lap_f,
                       omega=omega, divOmega=div)
    return ricci_s1_bundle(d).matrix


def _a_tensor_beta12(k, alpha, beta, psi):
    """A(Z2, Z3) of N -> S^2_{1/2}; it points along F2 with length r alpha k sin psi."""
    _, r = fiber_curvature(k, alpha, beta, psi)
    a = r * alpha * k * np.sin(psi)
    A = np.zeros(psi.shape + (2, 2, 2))
    A[..., 0, 1, 1] = -a
    A[..., 1, 0, 1] = a
    return A


def quotient_ricci_beta12(k, alpha, beta, psi):
    """Ricci of h_beta on N in (Z2, Z3, F1, F2), beta in [1, 2]."""
    beta, psi = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(psi, dtype=float))
    K, _ = fiber_curvature(k, alpha, beta, psi)
    A = _a_tensor_beta12(k, alpha, beta, psi)
    z = np.zeros_like(psi)
    fiber = np.stack([np.stack([K, z], -1), np.stack([z, K], -1)], -2)
    base = 4.0 * np.broadcast_to(np.eye(2), psi.shape + (2, 2))
    blocks = ricci_totally_geodesic(SubmersionData(fiberRicci=fiber, baseRicci=base, A=A))
    ric_h = np.zeros(psi.shape + (4, 4))
    ric_h[..., :2, :2] = blocks["horizontal"]
    ric_h[..., 2:, 2:] = blocks["vertical"]
    return ric_h


def _beta12(k, alpha, beta, psi):
    ric_h = quotient_ricci_beta12(k, alpha, beta, psi)
    A = _a_tensor_beta12(k, alpha, beta, psi)
    # curvature form of the unit circle fibers: omega_1 = 2 * pullback volume
    div = 2.0 * div_pullback_volume(A[..., 0, 1, :])
    omega = np.zeros(psi.shape + (4, 4))
    omega[..., 0, 1], omega[..., 1, 0] = -2.0, 2.0
    d = SubmersionData(baseRicci=ric_h, f=np.ones_like(psi), gradF=np.zeros(psi.shape + (4,)),
                       hessF=np.zeros(psi.shape + (4, 4)), laplF=np.zeros_like(psi),
                       omega=omega, divOmega=div)
    return ricci_s1_bundle(d).matrix


def closed_form_matrix(k, alpha, beta, psi, stage: str | None = None):
    """Vectorised closed-form Ricci matrices, broadcasting (beta, psi).

    ``stage`` is one of "squish", "beta01", "beta12" (inferred from beta when
    omitted).  Stages beyond beta = 2 have no full closed form.
    """
    psi = _check(psi)
    if stage is None:
        stage = "squish" if beta is None else ("beta01" if np.all(np.asarray(beta) <= 1) else
                                                "beta12" if np.all(np.asarray(beta) <= 2) else "beta23")
    if stage == "squish":
        # g^alpha is the product metric; in the twisted frame U, F2 mix Z1 and dtheta
        return _beta01(k, alpha, np.zeros_like(psi), psi)
    beta, psi = np.broadcast_arrays(np.asarray(beta, dtype=float), psi)
    if stage == "beta01":
        return _beta01(k, alpha, beta, psi)
    if stage == "beta12":
        return _beta12(k, alpha, beta, psi)
    raise StageHasNoClosedForm(f"stage {stage} has only structural closed forms")


def closed_form_ricci(spec: StageSpec, psi) -> RicciReport:
    """Ricci in the stage frame at latitude psi.

    For beta in (2, 3] only Ric(U, U) = 2 and |omega_1|^2 = 4 are known in
    closed form (see :func:`structural_identities`); a full report raises
    StageHasNoClosedForm.
    """
    stage = spec.stage
    if stage == "post":
        raise StageHasNoClosedForm("post-squish frame Ricci is not tabulated")
    if stage == "beta23" and spec.beta > 2.0:
        raise StageHasNoClosedForm("beta in (2, 3] has only structural closed forms")
    st = "beta12" if stage == "beta23" else stage
    beta = 0.0 if spec.beta is None else spec.beta
    return RicciReport(closed_form_matrix(spec.k, spec.alpha, beta, psi, st))


def structural_identities(spec: StageSpec) -> dict:
    """The closed-form facts valid for every beta >= 1."""
    if spec.stage in ("squish", "beta01") and (spec.beta or 0.0) < 1.0:
        raise StageHasNoClosedForm("structural identities hold for beta >= 1")
    return {"Ric_UU": 2.0, "omega_norm_sq": 4.0}
