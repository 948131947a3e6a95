import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistcert.asymptotics import (CASE_LIST, ConeOverProduct, Euclidean3, QuotientSphereTimesCone, ScaleSchedule,
                                   SphereTimesCone, ball_volume, check_decay_schedule, classify_tangent_cone,
                                   cone_ball_volume, generate_schedule, model_ricci, model_ricci_oracle,
                                   piece_from_dict, piece_to_dict, unit_ball_volume, volume_curve_csv,
                                   volume_growth_exponent)
from twistcert.errors import InsufficientRange, OutOfRange, UnknownRegime

RADII = np.geomspace(10, 1000, 12)


def test_model_ricci_examples():
    assert np.array_equal(model_ricci(SphereTimesCone(1.0, 0.0), 1.0), [0, 0, 0, 2, 2, 2])
    assert np.allclose(model_ricci(SphereTimesCone(1.0, 0.5), 1.0), [0, 2, 2, 2, 3, 3])
    assert np.allclose(model_ricci(ConeOverProduct(1 / np.sqrt(2), 0.5), 3.0), 0.0)
    assert np.array_equal(model_ricci(Euclidean3(), 5.0), np.zeros(3))
    with pytest.raises(OutOfRange):
        model_ricci(SphereTimesCone(1.0, 0.5), 1e-3)


@pytest.mark.parametrize("piece", [SphereTimesCone(1.0, 0.5), SphereTimesCone(0.3, 0.1, r1=50.0),
                                   QuotientSphereTimesCone(0.7, 0.3, 3), ConeOverProduct(0.5, 0.3),
                                   ConeOverProduct(0.7, 0.45)])
@pytest.mark.parametrize("r", [0.05, 1.0, 20.0])
def test_model_ricci_matches_oracle(piece, r):
    want = model_ricci(piece, r)
    got = model_ricci_oracle(piece, r, samples=3, seed=1)
    assert np.all(np.abs(got - want) <= 1e-6 * max(np.max(np.abs(want)), 1e-300) + 1e-12)


def test_model_ricci_nonnegative_on_grid():
    worst = np.inf
    for d in np.geomspace(1e-2, 10, 20):
        for e in np.linspace(0.01, 0.99, 20):
            p = SphereTimesCone(d, e)
            for r in np.geomspace(p.r0, 1e4, 20):
                worst = min(worst, model_ricci(p, r).min())
    assert worst >= -1e-10


def test_piece_validation_and_round_trip():
    for bad in (dict(delta=0, eps=0.1), dict(delta=1, eps=1.0), dict(delta=1, eps=0.1, r0=2, r1=1)):
        with pytest.raises(ValueError):
            SphereTimesCone(**bad)
    for p in (SphereTimesCone(1.0, 0.2), QuotientSphereTimesCone(1.0, 0.2, 4), ConeOverProduct(0.5, 0.3), Euclidean3()):
        assert piece_from_dict(piece_to_dict(p)) == p
    with pytest.raises(ValueError):
        piece_from_dict({"kind": "Torus"})


def test_euclidean_ball_volume_exact():
    R = np.array([0.5, 1.0, 3.0])
    assert np.allclose(ball_volume(Euclidean3(), R), 4 / 3 * np.pi * R**3, rtol=1e-12)
    assert np.allclose(ball_volume(Euclidean3(), R, basepoint=2.0), 4 / 3 * np.pi * R**3, rtol=1e-11)


def test_cone_ball_volume_from_tip():
    a = 0.6
    assert np.allclose(cone_ball_volume(a, 0.0, np.array([2.0])), a**2 * 4 / 3 * np.pi * 8, rtol=1e-12)


@pytest.mark.parametrize("piece,want,tol", [(ConeOverProduct(0.5, 0.4), 6, 0.05),
                                            (SphereTimesCone(1.0, 0.1), 3, 0.05),
                                            (QuotientSphereTimesCone(1.0, 0.1, 3), 3, 0.05),
                                            (Euclidean3(), 3, 0.01)])
def test_volume_growth_exponents(piece, want, tol):
    assert abs(volume_growth_exponent(piece, RADII) - want) < tol


@given(st.floats(0.1, 50.0), st.floats(0.0, 8.0))
def test_exponent_rescaling_invariance(c, t):
    p = SphereTimesCone(0.5, 0.3)
    a = volume_growth_exponent(p, RADII, basepoint=t)
    b = volume_growth_exponent(p.scaled(c), RADII * c, basepoint=t * c)
    assert abs(a - b) < 0.01


def test_insufficient_range():
    with pytest.raises(InsufficientRange):
        volume_growth_exponent(Euclidean3(), np.geomspace(1, 10, 12))
    with pytest.raises(InsufficientRange):
        volume_growth_exponent(Euclidean3(), np.geomspace(1, 1000, 5))


@given(st.floats(0.01, 1.0), st.floats(1.0, 100.0), st.floats(0.0, 0.95), st.floats(0.0, 20.0))
def test_unit_ball_volume_lower_bound(delta, dr, eps, t):
    assert unit_ball_volume(SphereTimesCone(delta, eps), dr / delta, t) > 1 / 100


def test_volume_csv():
    lines = volume_curve_csv(Euclidean3(), [1.0, 2.0]).splitlines()
    assert lines[0] == "r,vol" and float(lines[2].split(",")[1]) == pytest.approx(32 / 3 * np.pi)


@pytest.mark.parametrize("eta", [0.05, 0.1, 0.5, 1.0])
def test_generated_schedules_pass(eta):
    s = generate_schedule(eta, steps=5)
    assert len(s) == 5
    rep = check_decay_schedule(s)
    assert rep.feasible and len(rep.checks) == 4
    assert all(np.isfinite(s.r)) and all(c.separation > 1 for c in rep.checks)
    assert check_decay_schedule(ScaleSchedule(**s.to_dict())).to_dict() == rep.to_dict()


def test_schedule_infeasibility_flags():
    s = generate_schedule(0.1, steps=3)
    stuck = ScaleSchedule((s.r[0], s.r[0], s.r[0]), s.k, s.delta, s.eps, s.eta)
    rep = check_decay_schedule(stuck)
    assert not rep.feasible and not rep.checks[0].separated
    assert any("separation" in f for f in rep.checks[0].flags)
    short = check_decay_schedule(ScaleSchedule((1.0,), (2,), (0.1,), (0.1,), 0.1))
    assert not short.feasible and "shorter" in short.note
    small = ScaleSchedule((1.0, 100.0, 1e5), (2,) * 3, (0.1,) * 3, (0.1,) * 3, 0.1)
    assert not check_decay_schedule(small).feasible
    with pytest.raises(ValueError):
        ScaleSchedule((1.0, 2.0), (2,), (0.1,), (0.1,), 0.1)


def test_huge_scales_are_feasible():
    need = (1 + 2 - 2 * math.log10(0.1)) / 0.1
    r = (10.0 ** need, 10.0 ** (need + 5), 10.0 ** (need + 12))
    assert check_decay_schedule(ScaleSchedule(r, (2,) * 3, (0.1,) * 3, (0.1,) * 3, 0.1)).feasible


def test_tangent_cone_cases():
    c = classify_tangent_cone("s_j = r_j", "converges", k=3)
    assert str(c) == "C(S^2_1/Z_k)" and c.params["k"] == 3 and "3" in c.basepoint
    assert str(classify_tangent_cone("s=r, k->inf")) == "R^2 x S^1"
    assert str(classify_tangent_cone("r<s<kr", "diverges")) == "R^2"
    assert str(classify_tangent_cone("s_j ≈ k_j r_j", "diverges")) == "C([0,pi])"
    c = classify_tangent_cone("kr<s<rnext", "converges", k=2, s=0.4)
    assert str(c) == "C(S^2_s/Z_k)" and c.ranges["s"] == [0.0, 1.0]
    assert str(classify_tangent_cone("s->rnext")) == "R^3"
    for regime, kb in CASE_LIST:
        classify_tangent_cone(regime, kb)


@pytest.mark.parametrize("args", [("s=2r", "converges"), ("r<s<kr", "converges"), ("s~kr", "converges"),
                                  ("kr<s<rnext", "diverges"), ("s=r", None), ("s=r", "wobbles"), ("", None)])
def test_tangent_cone_rejects(args):
    with pytest.raises(UnknownRegime):
        classify_tangent_cone(*args)
    with pytest.raises(UnknownRegime):
        classify_tangent_cone("kr<s<rnext", "converges", s=1.5)
