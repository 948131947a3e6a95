"""Coordinate tensor calculus on second-order jets.

A *metric function* takes a list of ``n`` coordinate jets (each batched over
points) and returns an ``n x n`` nested list of metric components.  Entries
may be jets or plain numbers; symmetry is imposed here, so a metric function
only has to fill the upper triangle correctly.

From one evaluation we get the metric together with its first and second
coordinate derivatives, which is all the Levi-Civita connection and the
Ricci tensor need.  Nothing in this module knows about the deformation
stages; it is the independent ground truth for the closed forms.
"""

from __future__ import annotations

import json

import numpy as np

from . import jets as J
from .errors import DegenerateMetric, FrameNotOrthonormal
from .report import FRAME_LABELS, RicciReport

COND_MAX = 1e12
GRAM_TOL = 1e-8


def _as_jet(x, shape, n):
    if isinstance(x, J.Jet):
        if x.v.shape != shape:
            return J.Jet(np.broadcast_to(x.v, shape), np.broadcast_to(x.g, shape + (n,)),
                         np.broadcast_to(x.h, shape + (n, n)))
        return x
    return J.Jet.constant(np.broadcast_to(np.asarray(x, dtype=float), shape), n)


def evaluate(metric, coords):
    """Metric and its derivatives at ``coords`` (shape (B, n)).

    Returns ``(G, dG, ddG)`` with ``dG[b, l, i, j] = d_l g_ij`` and
    ``ddG[b, l, m, i, j] = d_l d_m g_ij``.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    shape, n = coords.shape[:-1], coords.shape[-1]
    xs = [J.Jet.variable(coords[..., i], i, n) for i in range(n)]
    rows = metric(xs)
    rows = [[_as_jet(rows[min(i, j)][max(i, j)], shape, n) for j in range(n)] for i in range(n)]
    return J.stack_matrix(rows)


def check_metric(G):
    """Raise DegenerateMetric unless every G is positive definite and tame."""
    w = np.linalg.eigvalsh(G)
    lo, hi = w[..., 0], w[..., -1]
    bad = (lo <= 0) | (hi > COND_MAX * np.where(lo > 0, lo, np.inf))
    if np.any(bad):
        i = int(np.flatnonzero(bad.ravel())[0])
        raise DegenerateMetric(
            f"metric not positive definite or condition number above {COND_MAX:g} "
            f"(sample {i}, eigenvalues {w.reshape(-1, w.shape[-1])[i]})")
    return w


def _connection(G, dG):
    ginv = np.linalg.inv(G)
    # first kind: gam1[d, a, b] = 1/2 (d_a g_db + d_b g_da - d_d g_ab)
    gam1 = 0.5 * (np.einsum("...adb->...dab", dG) + np.einsum("...bda->...dab", dG) - dG)
    gam = np.einsum("...cd,...dab->...cab", ginv, gam1)
    return ginv, gam1, gam


def christoffel(metric, coords):
    """Gamma[b, c, a, b'] = Gamma^c_{a b'} at each point."""
    G, dG, _ = evaluate(metric, coords)
    check_metric(G)
    return _connection(G, dG)[2]


def _curvature(G, dG, ddG):
    ginv, gam1, gam = _connection(G, dG)
    # d_e ginv = -ginv (d_e g) ginv
    dginv = -np.einsum("...cp,...epq,...qd->...ecd", ginv, dG, ginv)
    dgam1 = 0.5 * (np.einsum("...eadb->...edab", ddG) + np.einsum("...ebda->...edab", ddG) - ddG)
    dgam = np.einsum("...ecd,...dab->...ecab", dginv, gam1) + np.einsum("...cd,...edab->...ecab", ginv, dgam1)
    # R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb} + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
    riem = (np.einsum("...cadb->...abcd", dgam) - np.einsum("...dacb->...abcd", dgam)
            + np.einsum("...ace,...edb->...abcd", gam, gam) - np.einsum("...ade,...ecb->...abcd", gam, gam))
    return ginv, gam, riem


def riemann(metric, coords):
    """R^a_{bcd} with the convention R(X,Y)Z = nabla_X nabla_Y Z - ... ."""
    G, dG, ddG = evaluate(metric, coords)
    check_metric(G)
    return _curvature(G, dG, ddG)[2]


def ricci_numeric(metric, coords):
    """Coordinate components R_{bd} = R^a_{bad}, shape (B, n, n)."""
    G, dG, ddG = evaluate(metric, coords)
    check_metric(G)
    riem = _curvature(G, dG, ddG)[2]
    ric = np.einsum("...abad->...bd", riem)
    return 0.5 * (ric + np.swapaxes(ric, -1, -2))


def ricci_in_frame(metric, coords, frame, labels=FRAME_LABELS) -> RicciReport:
    """Ricci components in a frame given as coordinate columns (B, n, m)."""
    G, dG, ddG = evaluate(metric, coords)
    check_metric(G)
    frame = np.asarray(frame, dtype=float).reshape(G.shape[:-2] + np.shape(frame)[-2:])
    gram = np.einsum("...ia,...ij,...jb->...ab", frame, G, frame)
    resid = np.max(np.abs(gram - np.eye(gram.shape[-1])))
    if resid > GRAM_TOL:
        raise FrameNotOrthonormal(f"frame Gram residual {resid:.3e} exceeds {GRAM_TOL:g}")
    riem = _curvature(G, dG, ddG)[2]
    ric = np.einsum("...abad->...bd", riem)
    ric = np.einsum("...ia,...ij,...jb->...ab", frame, ric, frame)
    ric = 0.5 * (ric + np.swapaxes(ric, -1, -2))
    return RicciReport(ric, tuple(labels[: ric.shape[-1]]))


def orthonormal_frame(metric, coords):
    """Some orthonormal frame (Cholesky-based), shape (B, n, n)."""
    G = evaluate(metric, coords)[0]
    L = np.linalg.cholesky(G)
    return np.swapaxes(np.linalg.inv(L), -1, -2)


def ricci_eigenvalues(metric, coords):
    """Eigenvalues of the Ricci endomorphism g^{-1} Ric, ascending."""
    G, dG, ddG = evaluate(metric, coords)
    check_metric(G)
    riem = _curvature(G, dG, ddG)[2]
    ric = np.einsum("...abad->...bd", riem)
    L = np.linalg.cholesky(G)
    Linv = np.linalg.inv(L)
    m = Linv @ ric @ np.swapaxes(Linv, -1, -2)
    return np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, -1, -2)))


def fd_derivative_residual(metric, coords, h: float = 1e-5):
    """Max relative gap between jet first derivatives and central differences."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    _, dG, _ = evaluate(metric, coords)
    n = coords.shape[-1]
    worst = 0.0
    for i in range(n):
        step = np.zeros(n)
        step[i] = h
        gp = evaluate(metric, coords + step)[0]
        gm = evaluate(metric, coords - step)[0]
        fd = (gp - gm) / (2 * h)
        scale = max(np.max(np.abs(dG[..., i, :, :])), 1.0)
        worst = max(worst, float(np.max(np.abs(fd - dG[..., i, :, :])) / scale))
    return worst


def bianchi_residual(metric, coords, h: float = 1e-4):
    """Contracted second Bianchi residual |div Ric - 1/2 d Scal|.

    Derivatives of the oracle Ricci are taken by central differences, so the
    residual carries an O(h^2) truncation floor; it is reported relative to
    the size of the Ricci tensor.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    n = coords.shape[-1]
    G, dG, _ = evaluate(metric, coords)
    ginv, _, gam = _connection(G, dG)
    ric = ricci_numeric(metric, coords)
    dric = np.empty(ric.shape[:-2] + (n, n, n))
    dscal = np.empty(ric.shape[:-2] + (n,))
    for i in range(n):
        step = np.zeros(n)
        step[i] = h
        rp, rm = ricci_numeric(metric, coords + step), ricci_numeric(metric, coords - step)
        gp, gm = evaluate(metric, coords + step)[0], evaluate(metric, coords - step)[0]
        dric[..., i, :, :] = (rp - rm) / (2 * h)
        sp = np.einsum("...ab,...ab->...", np.linalg.inv(gp), rp)
        sm = np.einsum("...ab,...ab->...", np.linalg.inv(gm), rm)
        dscal[..., i] = (sp - sm) / (2 * h)
    # nabla_c R_ab = d_c R_ab - Gamma^d_ca R_db - Gamma^d_cb R_ad
    nab = dric - np.einsum("...dca,...db->...cab", gam, ric) - np.einsum("...dcb,...ad->...cab", gam, ric)
    div = np.einsum("...ca,...cab->...b", ginv, nab)
    resid = div - 0.5 * dscal
    scale = max(float(np.max(np.abs(ric))), 1.0)
    return float(np.max(np.abs(resid))) / scale


def dump_json(metric, coords) -> str:
    """Christoffel symbols and Ricci components at the given points."""
    gam = christoffel(metric, coords)
    ric = ricci_numeric(metric, coords)
    return json.dumps({
        "coords": np.atleast_2d(coords).tolist(),
        "christoffel": gam.tolist(),
        "ricci": ric.tolist(),
    })
