"""Small dense symmetric eigenproblems by cyclic Jacobi rotations.

Everything here works on stacks of matrices of shape (..., n, n); each
rotation is applied to the whole stack at once, which is what makes grid
sweeps over tens of thousands of 5x5 Ricci matrices cheap.
"""

from __future__ import annotations

import numpy as np


def symmetrize(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 50, vectors: bool = False):
    """Eigenvalues (ascending) of symmetric matrices by cyclic Jacobi.

    Iteration stops once every off-diagonal entry is below ``tol`` times the
    Frobenius norm of its matrix.  With ``vectors=True`` the accumulated
    rotation is returned too, columns being eigenvectors.
    """
    a = symmetrize(a).copy()
    n = a.shape[-1]
    batch = a.shape[:-2]
    v = np.broadcast_to(np.eye(n), batch + (n, n)).copy() if vectors else None
    scale = np.sqrt(np.sum(a * a, axis=(-1, -2)))
    scale = np.where(scale > 0, scale, 1.0)
    off_mask = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        off = np.max(np.abs(a[..., off_mask]), axis=-1) if n > 1 else np.zeros(batch)
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[..., p, q]
                app = a[..., p, p]
                aqq = a[..., q, q]
                active = np.abs(apq) > 1e-300
                safe = np.where(active, apq, 1.0)
                theta = (aqq - app) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
                t = np.where(theta == 0, 1.0, t)
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # a <- J^T a J with J the (p, q) Givens rotation
                ap = a[..., :, p].copy()
                aq = a[..., :, q].copy()
                a[..., :, p] = c[..., None] * ap - s[..., None] * aq
                a[..., :, q] = s[..., None] * ap + c[..., None] * aq
                rp = a[..., p, :].copy()
                rq = a[..., q, :].copy()
                a[..., p, :] = c[..., None] * rp - s[..., None] * rq
                a[..., q, :] = s[..., None] * rp + c[..., None] * rq
                if v is not None:
                    vp = v[..., :, p].copy()
                    vq = v[..., :, q].copy()
                    v[..., :, p] = c[..., None] * vp - s[..., None] * vq
                    v[..., :, q] = s[..., None] * vp + c[..., None] * vq

    w = np.diagonal(a, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    if v is None:
        return w
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def min_eigenvalue(a, tol: float = 1e-12):
    return jacobi_eigh(a, tol=tol)[..., 0]
