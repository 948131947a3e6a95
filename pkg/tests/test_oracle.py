import json

import numpy as np
import pytest

from twistcert import jets as J
from twistcert import oracle
from twistcert.charts import atlas_chart
from twistcert.oneill import closed_form_ricci
from twistcert.errors import DegenerateMetric, FrameNotOrthonormal
from twistcert.frames import (ManifoldPoint, StageSpec, action, chart_coords, default_chart,
                              metric_function, stage_frame)
from twistcert.quaternion import random_unit_quaternions


def euclid(xs):
    n = len(xs)
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def round_s2(xs):
    psi, _ = xs
    s = J.sin(psi)
    return [[1.0, 0.0], [0.0, s * s]]


def cone3(eps):
    a2 = (1.0 - eps) ** 2

    def metric(xs):
        r, th, _ = xs
        s = J.sin(th)
        return [[1.0, 0.0, 0.0], [0.0, a2 * r * r, 0.0], [0.0, 0.0, a2 * r * r * s * s]]
    return metric


def hyperspherical_product(alpha):
    """S^3_1 x S^2_alpha in (chi, th, ph, psi, theta)."""
    def metric(xs):
        chi, th, _, psi, _ = xs
        sc, st, sp = J.sin(chi), J.sin(th), J.sin(psi)
        d = [1.0, sc * sc, sc * sc * st * st, alpha**2, alpha**2 * sp * sp]
        return [[d[i] if i == j else 0.0 for j in range(5)] for i in range(5)]
    return metric


def random_points(n, seed=0, psi=None):
    rng = np.random.default_rng(seed)
    u = random_unit_quaternions(rng, n)
    psi = rng.uniform(0.2, np.pi - 0.2, n) if psi is None else np.full(n, psi)
    return ManifoldPoint.from_angles(u, psi, rng.uniform(0, 2 * np.pi, n)), rng


def stage_report(spec, p, chart=None):
    chart = chart or default_chart(p)
    x = np.atleast_2d(chart_coords(chart, p))
    frame = stage_frame(spec, p).in_chart(chart, x)
    return oracle.ricci_in_frame(metric_function(spec, chart), x, frame)


def test_euclidean_christoffel_vanish():
    gam = oracle.christoffel(euclid, np.random.default_rng(0).normal(size=(4, 5)))
    assert np.max(np.abs(gam)) == 0.0


def test_round_s2_christoffel():
    x = np.array([[0.7, 1.3], [2.0, 0.1]])
    gam = oracle.christoffel(round_s2, x)
    assert np.allclose(gam[:, 0, 1, 1], -np.sin(x[:, 0]) * np.cos(x[:, 0]), atol=1e-14)
    assert np.allclose(gam[:, 1, 0, 1], np.cos(x[:, 0]) / np.sin(x[:, 0]), atol=1e-14)


def test_christoffel_symmetric():
    p, _ = random_points(5, seed=3)
    spec = StageSpec(2, 0.3, 0.4)
    chart = default_chart(p)
    gam = oracle.christoffel(metric_function(spec, chart), chart_coords(chart, p))
    assert np.max(np.abs(gam - np.swapaxes(gam, -1, -2))) < 1e-12


@pytest.mark.parametrize("alpha", [1.0, 0.5, 0.1])
def test_round_product_eigenvalues(alpha):
    want = np.sort([2.0, 2.0, 2.0, 1 / alpha**2, 1 / alpha**2])
    x = np.array([[0.9, 1.1, 0.3, 1.2, 2.0], [2.1, 0.7, 4.0, 0.5, 0.1]])
    assert np.max(np.abs(oracle.ricci_eigenvalues(hyperspherical_product(alpha), x) - want)) < 1e-8
    p, _ = random_points(3, seed=1)
    rep = stage_report(StageSpec(0, alpha, None), p)
    assert np.max(np.abs(np.sort(rep.eigenvalues, -1) - want)) < 1e-8


def test_cone_radial_ricci_vanishes():
    eps = 0.3
    x = np.array([[1.5, 1.0, 0.4], [0.2, 2.0, 3.0]])
    w = oracle.ricci_eigenvalues(cone3(eps), x)
    K = 1 / (1 - eps) ** 2 - 1
    assert np.allclose(w[:, 0], 0.0, atol=1e-10)
    assert np.allclose(w[:, 1:], (K / x[:, 0] ** 2)[:, None], atol=1e-10)


def test_ricci_symmetric():
    p, _ = random_points(4, seed=7)
    spec = StageSpec(4, 0.2, 1.5)
    chart = default_chart(p)
    ric = oracle.ricci_numeric(metric_function(spec, chart), chart_coords(chart, p))
    assert np.max(np.abs(ric - np.swapaxes(ric, -1, -2))) < 1e-9


def test_chart_independence():
    spec = StageSpec(2, 0.3, 0.6)
    p, _ = random_points(6, seed=11)
    for i in range(6):
        q = ManifoldPoint(p.u[i], p.s[i])
        a = stage_report(spec, q).matrix
        b = stage_report(spec, q, atlas_chart(q.u, q.s)).matrix
        assert np.max(np.abs(a - b)) < 1e-9


def test_matches_closed_form_example():
    spec = StageSpec(2, 0.05, 0.5)
    p, _ = random_points(5, psi=1.0)
    rep = stage_report(spec, p)
    closed = closed_form_ricci(spec, np.full(5, 1.0)).matrix
    assert np.max(np.abs(rep.matrix - closed)) / np.max(np.abs(closed)) < 1e-6


def test_scaled_frame_rejected():
    spec = StageSpec(2, 0.3, 0.5)
    p, _ = random_points(2)
    chart = default_chart(p)
    x = chart_coords(chart, p)
    frame = stage_frame(spec, p).in_chart(chart, x)
    with pytest.raises(FrameNotOrthonormal):
        oracle.ricci_in_frame(metric_function(spec, chart), x, 2 * frame)


def test_degenerate_metric_rejected():
    def flat_direction(xs):
        return [[1.0, 0.0], [0.0, 0.0 * xs[0]]]

    def ill_conditioned(xs):
        return [[1.0, 0.0], [0.0, 1e-13 + 0.0 * xs[0]]]

    for m in (flat_direction, ill_conditioned):
        with pytest.raises(DegenerateMetric):
            oracle.ricci_numeric(m, np.array([[0.5, 0.5]]))


def test_isometry_invariance():
    spec = StageSpec(2, 0.3, 1.4)
    p, rng = random_points(4, seed=5)
    q = action(rng.uniform(0, 2 * np.pi, 4), spec.k, p)
    a = stage_report(spec, p).eigenvalues
    b = stage_report(spec, q).eigenvalues
    assert np.max(np.abs(a - b)) < 1e-9


def test_jet_derivatives_match_differences():
    spec = StageSpec(2, 0.3, 0.7)
    p, _ = random_points(3, seed=8)
    chart = default_chart(p)
    x = chart_coords(chart, p) + 0.05
    assert oracle.fd_derivative_residual(metric_function(spec, chart), x) < 1e-6


@pytest.mark.parametrize("beta", [0.3, 1.6, 2.5])
def test_contracted_bianchi(beta):
    spec = StageSpec(2, 0.3, beta)
    p, _ = random_points(2, seed=4)
    chart = default_chart(p)
    x = chart_coords(chart, p) + 0.02
    assert oracle.bianchi_residual(metric_function(spec, chart), x) < 1e-6


def test_orthonormal_frame_and_dump():
    x = np.array([[0.9, 1.1, 0.3, 1.2, 2.0]])
    m = hyperspherical_product(0.5)
    E = oracle.orthonormal_frame(m, x)
    G = oracle.evaluate(m, x)[0]
    assert np.allclose(np.swapaxes(E, -1, -2) @ G @ E, np.eye(5), atol=1e-12)
    d = json.loads(oracle.dump_json(round_s2, np.array([[0.7, 1.3]])))
    assert set(d) == {"coords", "christoffel", "ricci"}
    assert np.allclose(np.array(d["ricci"])[0], [[1.0, 0.0], [0.0, np.sin(0.7) ** 2]], atol=1e-12)
