"""The equivariant twisting map and its descent to S^3 x S^2.

With ``u = u1 + u2 j`` and ``z = z1 + z2 j`` the twisting map is

    Phi_k(u, z) = (u, g_k(u) z),   g_k(u) = (conj(u1)^k - u2^k j) / sqrt(|u1|^2k + |u2|^2k),

which intertwines the (1, k) circle action (left multiplication by e^{i t}
on u and by e^{i k t} on z) with the (1, 0) action.  Quotienting the second
factor by the right Hopf action z -> z e^{i phi} gives

    Psi^_k(u, s) = (u, g_k(u) s conj(g_k(u))),

which intertwines the (1, 2k) action on S^3 x S^2 with the (1, 0) action.
The gauge functions below work on numpy arrays and on jets alike.
"""

from __future__ import annotations

import numpy as np

from . import jets as J
from .quaternion import (from_pair, imag_to_vec, imag_to_vec_c, pair_mul, qconj_c, qmul, qmul_c,
                         random_unit_quaternions, random_unit_vectors, rotation_matrix, to_pair,
                         vec_to_imag)


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _cpow(a, m):
    out = a
    for _ in range(m - 1):
        out = _cmul(out, a)
    return out


def gauge(u, m: int):
    """g_m(u) = (conj(u1)^m, -u2^m) / sqrt(|u1|^2m + |u2|^2m) as components.

    ``m = 0`` is the identity gauge.  Works on arrays or jets.
    """
    if m == 0:
        one = u[0] * 0.0 + 1.0
        zero = u[0] * 0.0
        return [one, zero, zero, zero]
    p1 = _cpow((u[0], -1.0 * u[1]), m)
    p2 = _cpow((u[2], u[3]), m)
    n1 = (u[0] * u[0] + u[1] * u[1]) ** m
    n2 = (u[2] * u[2] + u[3] * u[3]) ** m
    inv = 1.0 / J.sqrt(n1 + n2)
    return [p1[0] * inv, p1[1] * inv, -1.0 * p2[0] * inv, -1.0 * p2[1] * inv]


def gauge_differential(u, a, m: int):
    """d g_m(u)[a], the derivative of :func:`gauge` along a tangent vector."""
    if m == 0:
        z = u[0] * 0.0
        return [z, z, z, z]
    u1 = (u[0], -1.0 * u[1])       # conj(u1)
    a1 = (a[0], -1.0 * a[1])
    u2 = (u[2], u[3])
    a2 = (a[2], a[3])
    q1 = u[0] * u[0] + u[1] * u[1]
    q2 = u[2] * u[2] + u[3] * u[3]
    dq1 = 2.0 * (u[0] * a[0] + u[1] * a[1])
    dq2 = 2.0 * (u[2] * a[2] + u[3] * a[3])
    if m == 1:
        p1, p2 = u1, u2
        dp1, dp2 = a1, a2
        n2, dn2 = q1 + q2, dq1 + dq2
    else:
        pm1 = _cpow(u1, m - 1)
        pm2 = _cpow(u2, m - 1)
        p1, p2 = _cmul(pm1, u1), _cmul(pm2, u2)
        dp1 = tuple(float(m) * x for x in _cmul(pm1, a1))
        dp2 = tuple(float(m) * x for x in _cmul(pm2, a2))
        n2 = q1 ** m + q2 ** m
        dn2 = float(m) * (q1 ** (m - 1) * dq1 + q2 ** (m - 1) * dq2)
    n = J.sqrt(n2)
    inv = 1.0 / n
    # d(p / n) = dp / n - p dn2 / (2 n^3)
    c = -0.5 * dn2 * inv / n2
    g = [dp1[0] * inv + p1[0] * c, dp1[1] * inv + p1[1] * c,
         -1.0 * (dp2[0] * inv + p2[0] * c), -1.0 * (dp2[1] * inv + p2[1] * c)]
    return g


def omega_flat(u, a, m: int):
    """Omega_3(a) = 2 Im(conj(g) dg(a)) as a vector in R^3."""
    g = gauge(u, m)
    dg = gauge_differential(u, a, m)
    w = qmul_c(qconj_c(g), dg)
    return [2.0 * x for x in imag_to_vec_c(w)]


def hopf(z):
    """S^3 -> S^2 (unit sphere), z -> z i conj(z) read as a vector."""
    zi = qmul(qmul(z, np.array([0.0, 1.0, 0.0, 0.0])), z * np.array([1.0, -1, -1, -1]))
    return imag_to_vec(zi)


def hopf_lift(s):
    """A unit quaternion z with hopf(z) = s (fails only at s = -e_z)."""
    s = np.asarray(s, dtype=float)
    q = vec_to_imag(s)
    # z = (1 - q i) / |1 - q i| rotates i onto q: z i conj(z) = q
    z = qmul(-q, np.array([0.0, 1.0, 0.0, 0.0]))
    z[..., 0] += 1.0
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def gauge_array(u, m: int):
    u = np.asarray(u, dtype=float)
    return np.stack(gauge([u[..., i] for i in range(4)], m), -1)


def phi_k(k: int, u, z):
    """Phi_k on S^3 x S^3; returns (u, g_k(u) z)."""
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    if k == 0:
        return u.copy(), z.copy()
    u1, u2 = to_pair(u)
    z1, z2 = to_pair(z)
    n = np.sqrt(np.abs(u1) ** (2 * k) + np.abs(u2) ** (2 * k))
    g1, g2 = np.conj(u1) ** k / n, -(u2**k) / n
    w1, w2 = pair_mul(g1, g2, z1, z2)
    return u.copy(), from_pair(w1, w2)


def phi_k_inverse(k: int, u, w):
    """Inverse of :func:`phi_k`: (u, conj(g_k(u)) w)."""
    g = gauge_array(u, k)
    return np.asarray(u, dtype=float).copy(), qmul(g * np.array([1.0, -1, -1, -1]), w)


def circle_action_pair(theta, k: int, u, z):
    """(1, k) action on S^3 x S^3: (e^{i t} u, e^{i k t} z)."""
    e = np.stack([np.cos(theta), np.sin(theta), 0 * theta, 0 * theta], -1)
    ek = np.stack([np.cos(k * theta), np.sin(k * theta), 0 * theta, 0 * theta], -1)
    return qmul(e, u), qmul(ek, z)


def check_equivariance(k: int, samples: int = 1000, seed: int = 0):
    """Max residuals of the circle equivariance and the right S^3 action."""
    rng = np.random.default_rng(seed)
    u = random_unit_quaternions(rng, samples)
    z = random_unit_quaternions(rng, samples)
    h = random_unit_quaternions(rng, samples)
    theta = rng.uniform(0, 2 * np.pi, samples)
    lhs = phi_k(k, *circle_action_pair(theta, k, u, z))
    pu, pz = phi_k(k, u, z)
    rhs = circle_action_pair(theta, 0, pu, pz)
    circle = max(np.max(np.abs(lhs[0] - rhs[0])), np.max(np.abs(lhs[1] - rhs[1])))
    right = np.max(np.abs(phi_k(k, u, qmul(z, h))[1] - qmul(pz, h)))
    return {"circle": float(circle), "right": float(right)}


def psi_hat(k: int, u, s):
    """Descent of Phi_k: (u, s) -> (u, g_k(u) s conj(g_k(u)))."""
    if k < 0:
        raise ValueError("psi_hat is defined for k >= 0")
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    if k == 0:
        return u.copy(), s.copy()
    R = rotation_matrix(gauge_array(u, k))
    return u.copy(), np.einsum("...ij,...j->...i", R, s)


def well_definedness_residual(k: int, samples: int = 1000, seed: int = 0):
    """Two lifts z, z e^{i phi} of one S^2 point give the same image."""
    rng = np.random.default_rng(seed)
    u = random_unit_quaternions(rng, samples)
    z = random_unit_quaternions(rng, samples)
    phi = rng.uniform(0, 2 * np.pi, samples)
    z2 = qmul(z, np.stack([np.cos(phi), np.sin(phi), 0 * phi, 0 * phi], -1))
    a = hopf(phi_k(k, u, z)[1])
    b = hopf(phi_k(k, u, z2)[1])
    c = psi_hat(k, u, hopf(z))[1]
    return float(max(np.max(np.abs(a - b)), np.max(np.abs(a - c))))


def psi_hat_equivariance_residual(k: int, samples: int = 1000, seed: int = 0):
    """Psi^_k(t .(1,2k) p) against t .(1,0) Psi^_k(p)."""
    from .frames import ManifoldPoint, action

    rng = np.random.default_rng(seed)
    p = ManifoldPoint(random_unit_quaternions(rng, samples), random_unit_vectors(rng, samples))
    theta = rng.uniform(0, 2 * np.pi, samples)
    q = action(theta, 2 * k, p)
    lu, ls = psi_hat(k, q.u, q.s)
    ru, rs = psi_hat(k, p.u, p.s)
    r = action(theta, 0, ManifoldPoint(ru, rs))
    return float(max(np.max(np.abs(lu - r.u)), np.max(np.abs(ls - r.s))))


def fiberwise_rotation_residual(k: int, samples: int = 200, seed: int = 0):
    """For fixed u, s -> Psi^(u, s) is a rotation: |R^T R - I| and |det R - 1|."""
    rng = np.random.default_rng(seed)
    u = random_unit_quaternions(rng, samples)
    R = rotation_matrix(gauge_array(u, k)) if k else np.broadcast_to(np.eye(3), (samples, 3, 3))
    orth = np.max(np.abs(np.swapaxes(R, -1, -2) @ R - np.eye(3)))
    det = np.max(np.abs(np.linalg.det(R) - 1.0))
    return float(max(orth, det))


def _tangent_sample(rng, u, s):
    a = rng.normal(size=u.shape)
    a -= np.sum(a * u, -1, keepdims=True) * u
    b = rng.normal(size=s.shape)
    b -= np.sum(b * s, -1, keepdims=True) * s
    return np.concatenate([a, b], -1)


def _push_forward(k, u, s, v, h=1e-3):
    """d Psi^ (v) by a five-point stencil along normalised straight lines."""
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    v = v / norm

    def at(t):
        uu = u + t * v[..., :4]
        ss = s + t * v[..., 4:]
        uu /= np.linalg.norm(uu, axis=-1, keepdims=True)
        ss /= np.linalg.norm(ss, axis=-1, keepdims=True)
        pu, ps = psi_hat(k, uu, ss)
        return np.concatenate([pu, ps], -1)
    return norm * (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h)


def end_state_isometry_residual(alpha: float, k: int, delta_profile=None, samples: int = 200,
                                seed: int = 0, fiber_radius: float = 0.5):
    """Relative gap between g_3 and the Psi^-pullback of S^3_1 x S^2_rho.

    ``k`` is the (even) twisting index of the stage metric; the conjugating
    map is Psi^_{k/2}.  The residual is max |g_3(v,w) - Psi^* g(v,w)| over
    random tangent pairs, divided by max |Psi^* g(v,w)|.  The target is
    invariant under the (1, 0) action, so pointwise gauge rotations leave the
    pullback unchanged and the identity gauge is used.
    """
    from .errors import ProfileConstructionFailure
    from .frames import DeltaProfile, StageSpec, ambient_bilinear

    try:
        prof = delta_profile if delta_profile is not None else DeltaProfile(1.0, alpha)
        spec = StageSpec(k, alpha, 3.0, prof)
        scale = spec.delta_value() * alpha
    except Exception as exc:  # noqa: BLE001
        raise ProfileConstructionFailure(str(exc)) from exc
    if not np.isfinite(scale) or scale <= 0:
        raise ProfileConstructionFailure("end-state fiber scale is not positive")
    rng = np.random.default_rng(seed)
    u = random_unit_quaternions(rng, samples)
    s = random_unit_vectors(rng, samples)
    v = _tangent_sample(rng, u, s)
    w = _tangent_sample(rng, u, s)
    g3 = ambient_bilinear(spec, u, s, v, w)
    pv, pw = _push_forward(k // 2, u, s, v), _push_forward(k // 2, u, s, w)
    target = np.sum(pv[..., :4] * pw[..., :4], -1) + fiber_radius**2 * np.sum(pv[..., 4:] * pw[..., 4:], -1)
    return float(np.max(np.abs(g3 - target)) / np.max(np.abs(target)))


def omega_flat_fd_residual(m: int, samples: int = 50, seed: int = 0, h: float = 1e-5):
    """Analytic connection field Omega_3 against a central-difference dPsi^."""
    rng = np.random.default_rng(seed)
    u = random_unit_quaternions(rng, samples)
    a = rng.normal(size=u.shape)
    a -= np.sum(a * u, -1, keepdims=True) * u
    om = np.stack(omega_flat([u[..., i] for i in range(4)], [a[..., i] for i in range(4)], m), -1)

    def g_at(t):
        uu = u + t * a
        return gauge_array(uu / np.linalg.norm(uu, axis=-1, keepdims=True), m)

    g = gauge_array(u, m)
    dg = (g_at(h) - g_at(-h)) / (2 * h)
    fd = 2.0 * imag_to_vec(qmul(g * np.array([1.0, -1, -1, -1]), dg))
    return float(np.max(np.abs(om - fd)) / max(np.max(np.abs(fd)), 1.0))
