import numpy as np
import pytest

from twistcert import jets as J
from twistcert import oracle
from twistcert.certify import oracle_stage_ricci
from twistcert.charts import S3Gnomonic
from twistcert.errors import MissingField, NonpositiveScale, PoleSingularity, StageHasNoClosedForm
from twistcert.frames import DeltaProfile, StageSpec, fiber_length, fiber_metric_function
from twistcert.oneill import (SubmersionData, assemble, closed_form_matrix, closed_form_ricci,
                              div_pullback_volume, fiber_curvature, quotient_ricci, ricci_canonical_variation,
                              ricci_s1_bundle, ricci_totally_geodesic, structural_identities)
from twistcert.quaternion import E1, E2, E3, qmul_c

ALPHA2 = 0.43198780774045936


def hopf_data(base_scale=4.0):
    """S^3 -> S^2_{1/2}: one vertical leg, A(Z2, Z3) of unit length."""
    A = np.zeros((2, 2, 1))
    A[0, 1, 0], A[1, 0, 0] = 1.0, -1.0
    return SubmersionData(fiberRicci=np.zeros((1, 1)), baseRicci=base_scale * np.eye(2), A=A)


def berger(t):
    """Round S^3 with the Hopf fibers scaled by t, in a gnomonic chart."""
    chart = S3Gnomonic(np.array([0.6, 0.0, 0.8, 0.0]))

    def metric(xs):
        u, tangents = chart.embed(xs)
        Z = [qmul_c(list(e), u) for e in (E1, E2, E3)]
        zeta = [[J.dot(z, v) for v in tangents] for z in Z]
        w = (t, 1.0, 1.0)
        return [[sum(w[a] * zeta[a][i] * zeta[a][j] for a in range(3)) for j in range(3)] for i in range(3)]
    return metric


def test_product_when_A_vanishes():
    d = SubmersionData(fiberRicci=np.diag([1.0, 2.0]), baseRicci=np.diag([3.0, 4.0, 5.0]), A=np.zeros((3, 3, 2)))
    rep = assemble(ricci_totally_geodesic(d))
    assert np.array_equal(rep.matrix, np.diag([1.0, 2.0, 3.0, 4.0, 5.0]))
    with pytest.raises(MissingField):
        ricci_totally_geodesic(SubmersionData(fiberRicci=np.eye(1)))


def test_hopf_fibration_matches_round_sphere():
    blocks = ricci_totally_geodesic(hopf_data())
    assert np.allclose(blocks["vertical"], 2.0)
    assert np.allclose(blocks["horizontal"], 2.0 * np.eye(2))
    assert np.allclose(blocks["mixed"], 0.0)
    x = np.array([[0.1, -0.2, 0.3], [0.0, 0.4, 0.1]])
    assert np.allclose(oracle.ricci_eigenvalues(berger(1.0), x), 2.0, atol=1e-10)


@pytest.mark.parametrize("t", [0.3, 0.7, 1.5])
def test_canonical_variation_matches_berger_sphere(t):
    blocks = ricci_canonical_variation(hopf_data(), t)
    want = np.sort([blocks["vertical"][0, 0] / t, *np.diag(blocks["horizontal"])])
    assert np.allclose(want, np.sort([2 * t, 4 - 2 * t, 4 - 2 * t]))
    x = np.array([[0.1, -0.2, 0.3], [0.2, 0.1, -0.4]])
    got = oracle.ricci_eigenvalues(berger(t), x)
    assert np.allclose(got, want[None], atol=1e-9)


def test_canonical_variation_limits():
    d = hopf_data()
    one = ricci_canonical_variation(d, 1.0)
    tg = ricci_totally_geodesic(d)
    assert all(np.array_equal(one[k], tg[k]) for k in tg)
    assert np.allclose(ricci_canonical_variation(d, 1e-9)["horizontal"], d.baseRicci)
    flat = SubmersionData(fiberRicci=np.eye(1), baseRicci=np.eye(2), A=np.zeros((2, 2, 1)))
    assert all(np.array_equal(ricci_canonical_variation(flat, 2.0)[k], ricci_totally_geodesic(flat)[k])
               for k in ("vertical", "horizontal"))
    for t in (0.0, -1.0):
        with pytest.raises(NonpositiveScale):
            ricci_canonical_variation(d, t)


def test_s1_bundle_formula_examples():
    z4 = np.zeros(4)
    flat = SubmersionData(baseRicci=np.diag([1.0, 2, 3, 4]), f=1.0, gradF=z4, hessF=np.zeros((4, 4)), laplF=0.0,
                          omega=np.zeros((4, 4)), divOmega=z4)
    m = ricci_s1_bundle(flat).matrix
    assert m[0, 0] == 0 and np.array_equal(m[1:, 1:], flat.baseRicci) and not np.any(m[0, 1:])
    om = np.zeros((4, 4))
    om[0, 1], om[1, 0] = -2.0, 2.0
    hopf = SubmersionData(baseRicci=4 * np.eye(4), f=1.0, gradF=z4, hessF=np.zeros((4, 4)), laplF=0.0,
                          omega=om, divOmega=z4)
    m = ricci_s1_bundle(hopf).matrix
    assert m[0, 0] == pytest.approx(2.0) and not np.any(m[0, 1:])
    assert np.allclose(np.diag(m)[1:], [2.0, 2.0, 4.0, 4.0])
    with pytest.raises(MissingField):
        ricci_s1_bundle(SubmersionData(f=1.0))


def test_div_pullback_volume():
    assert not np.any(div_pullback_volume(np.zeros(2)))
    out = div_pullback_volume(np.array([0.3, -1.0]), n_horizontal=2)
    assert np.array_equal(out, [0.0, 0.0, 0.6, -2.0])
    k, al, psi = 2, ALPHA2, 0.8
    r = fiber_length(al, k, psi) / fiber_length(al, k, psi)
    got = div_pullback_volume(np.array([0.0, -r * al * k * np.sin(psi)]))
    assert got[-1] == pytest.approx(-2 * k * r * al * np.sin(psi))


def test_quotient_ricci_examples():
    rz, _, _ = quotient_ricci(2, 0.3, np.array([0.0, 1.0]))
    f2 = 1 + (0.3 * 2 * np.sin(1.0)) ** 2
    assert rz[0] == pytest.approx(4.0) and rz[1] == pytest.approx(2 + 2 / f2)
    _, rf1, _ = quotient_ricci(2, 1.0, np.pi / 2)
    assert rf1 == pytest.approx(0.2, abs=1e-15)


def test_vertical_entry_at_beta_one():
    psi = np.linspace(0.1, 3.0, 17)
    for k, al in [(2, ALPHA2), (4, 0.15), (0, 1.0)]:
        m = closed_form_ricci(StageSpec(k, al, 1.0), psi).matrix
        assert np.allclose(m[:, 0, 0], 2.0, atol=1e-13)


@pytest.mark.parametrize("stage,par", [("squish", 0.6), ("beta01", 0.35), ("beta01", 0.9), ("beta12", 1.3),
                                       ("beta12", 2.0)])
@pytest.mark.parametrize("k,alpha", [(2, 0.05), (2, ALPHA2), (4, 0.15)])
def test_closed_form_matches_oracle(stage, par, k, alpha):
    rng = np.random.default_rng(17)
    psi = rng.uniform(1e-3, np.pi - 1e-3, 12)
    if stage == "squish":
        spec, C = StageSpec(k, par * alpha, None), closed_form_matrix(k, par * alpha, 0.0, psi, "beta01")
    else:
        spec, C = StageSpec(k, alpha, par), closed_form_matrix(k, alpha, par, psi, stage)
    O = oracle_stage_ricci(spec, psi, rng)
    assert np.max(np.abs(C - O)) / np.max(np.abs(O)) < 1e-6


def test_only_u_f2_off_diagonal_for_beta01():
    m = closed_form_matrix(2, 0.3, np.linspace(0, 1, 9)[:, None], np.linspace(0.1, 3, 11)[None], "beta01")
    off = m.copy()
    off[..., np.arange(5), np.arange(5)] = 0
    off[..., 0, 4] = off[..., 4, 0] = 0
    assert not np.any(off)


@pytest.mark.parametrize("k", [2, 4])
def test_small_alpha_vertical_lower_bound(k):
    beta = np.linspace(0, 1, 64)[:, None]
    psi = np.linspace(1e-3, np.pi - 1e-3, 512)[None]
    m = closed_form_matrix(k, 0.05, beta, psi, "beta01")
    assert np.all(m[..., 0, 0] >= 1 + (1 - beta) ** 2 * k**2 * np.sin(psi) ** 2)


@pytest.mark.parametrize("k,alpha", [(2, ALPHA2), (4, 0.15026959143158788)])
def test_u_f2_block_trace_and_determinant(k, alpha):
    m = closed_form_matrix(k, alpha, np.linspace(0, 1, 64)[:, None], np.linspace(1e-3, np.pi - 1e-3, 512)[None],
                           "beta01")
    B = alpha**2 * m[..., [0, 4], :][..., :, [0, 4]]
    tr, det = np.trace(B, axis1=-2, axis2=-1), np.linalg.det(B)
    assert tr.min() > 0 and det.min() > 0
    assert np.all((tr > 0) & (det > 0) == (np.linalg.eigvalsh(B)[..., 0] > 0))


def test_fiber_rounding_at_beta_two():
    psi = np.linspace(1e-3, np.pi - 1e-3, 512)
    for k, al in [(2, ALPHA2), (4, 0.15)]:
        K, r = fiber_curvature(k, al, 2.0, psi)
        assert np.ptp(K) < 1e-8 and np.allclose(r, 1.0)
        assert K[0] == pytest.approx(1 / al**2)


def test_fiber_curvature_matches_oracle():
    rng = np.random.default_rng(2)
    u = rng.normal(size=4)
    u /= np.linalg.norm(u)
    for beta in (1.0, 1.4, 2.0):
        spec = StageSpec(2, 0.3, beta)
        psi = np.array([0.4, 1.2, 2.5])
        x = np.column_stack([psi, np.full(3, 0.7)])
        w = oracle.ricci_eigenvalues(fiber_metric_function(spec, u), x)
        K, _ = fiber_curvature(2, 0.3, beta, psi)
        assert np.allclose(w, K[:, None], rtol=1e-8)


def test_divergence_of_omega_one_matches_oracle():
    k, al = 2, 0.3
    rng = np.random.default_rng(4)
    psi = rng.uniform(0.2, 2.9, 8)
    for beta in (1.2, 1.8):
        O = oracle_stage_ricci(StageSpec(k, al, beta), psi, rng)
        r = fiber_length(al, (beta - 1) * k, psi) / fiber_length(al, k, psi)
        div = 2 * div_pullback_volume((-r * al * k * np.sin(psi))[:, None], n_horizontal=0)[:, 0]
        # unit fibers with constant length: Ric(U, F2) = -1/2 div omega_1(F2)
        assert np.allclose(O[:, 0, 4], -0.5 * div, atol=1e-8)


def test_structural_stages():
    prof = DeltaProfile(0.5, 0.3)
    with pytest.raises(StageHasNoClosedForm):
        closed_form_ricci(StageSpec(2, 0.3, 2.5, prof), 1.0)
    with pytest.raises(StageHasNoClosedForm):
        closed_form_ricci(StageSpec(2, 0.3, 3.0, rho=0.8), 1.0)
    assert structural_identities(StageSpec(2, 0.3, 2.5, prof)) == {"Ric_UU": 2.0, "omega_norm_sq": 4.0}
    with pytest.raises(StageHasNoClosedForm):
        structural_identities(StageSpec(2, 0.3, 0.5))
    with pytest.raises(PoleSingularity):
        closed_form_ricci(StageSpec(2, 0.3, 0.5), 0.0)
