"""Quaternion and complex-pair helpers.

Quaternions are stored as ``(q0, q1, q2, q3) = q0 + q1 i + q2 j + q3 k``.  The
complex-pair convention is ``u = u1 + u2 j`` with ``u1 = q0 + i q1`` and
``u2 = q2 + i q3``; in that convention ``(a + b j)(c + d j) = (ac - b conj(d)) +
(ad + b conj(c)) j``.

The ``*_c`` functions act on sequences of four components, each of which may be
a numpy array or a :class:`~twistcert.jets.Jet`.  The array functions act on
ndarrays with a trailing axis of length 4.
"""

from __future__ import annotations

import numpy as np

UNITS = np.eye(4)
E1, E2, E3 = UNITS[1], UNITS[2], UNITS[3]


def qmul_c(p, q):
    a0, a1, a2, a3 = p
    b0, b1, b2, b3 = q
    return [
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ]


def qconj_c(p):
    return [p[0], -p[1], -p[2], -p[3]]


def qmul(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p, q = np.broadcast_arrays(p, q)
    return np.stack(qmul_c(np.moveaxis(p, -1, 0), np.moveaxis(q, -1, 0)), axis=-1)


def qconj(p):
    p = np.asarray(p, dtype=float)
    return p * np.array([1.0, -1.0, -1.0, -1.0])


def expi(theta):
    """Unit quaternion e^{i theta}."""
    theta = np.asarray(theta, dtype=float)
    z = np.zeros_like(theta)
    return np.stack([np.cos(theta), np.sin(theta), z, z], axis=-1)


def to_pair(q):
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def from_pair(u1, u2):
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    return np.stack([u1.real, u1.imag, u2.real, u2.imag], axis=-1)


def pair_mul(a1, a2, b1, b2):
    """Quaternion product in complex-pair form."""
    return a1 * b1 - a2 * np.conj(b2), a1 * b2 + a2 * np.conj(b1)


# S^2 in R^3 <-> unit imaginary quaternions.  The rotation axis of the circle
# action (e_z) is matched with i so that conjugation by e^{i phi} rotates the
# (x, y) plane by 2 phi; the cyclic relabelling keeps orientation.

def vec_to_imag(s):
    s = np.asarray(s, dtype=float)
    z = np.zeros(s.shape[:-1])
    return np.stack([z, s[..., 2], s[..., 0], s[..., 1]], axis=-1)


def imag_to_vec(q):
    q = np.asarray(q, dtype=float)
    return np.stack([q[..., 2], q[..., 3], q[..., 1]], axis=-1)


def imag_to_vec_c(q):
    return [q[2], q[3], q[1]]


def rotation_matrix(g):
    """3x3 matrix of s -> g s conj(g) on R^3 (via the identification above)."""
    g = np.asarray(g, dtype=float)
    g = g / np.linalg.norm(g, axis=-1, keepdims=True)
    cols = []
    for e in np.eye(3):
        cols.append(imag_to_vec(qmul(qmul(g, vec_to_imag(e)), qconj(g))))
    return np.stack(cols, axis=-1)


def random_unit_quaternions(rng, size):
    q = rng.normal(size=(size, 4) if np.isscalar(size) else tuple(size) + (4,))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def random_unit_vectors(rng, size, dim=3):
    v = rng.normal(size=(size, dim) if np.isscalar(size) else tuple(size) + (dim,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)
