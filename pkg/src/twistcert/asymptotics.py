"""Large-scale geometry of the explicit model pieces.

Ricci eigenvalues of the product and cone models (closed form, with a 6-D
oracle cross-check), ball volumes by product Gauss-Legendre quadrature,
log-log growth exponents, the curvature-decay parameter bookkeeping, and a
lookup of tangent cones at infinity by scale regime.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import jets as J
from . import oracle
from .errors import InsufficientRange, OutOfRange, UnknownRegime

R_MIN_DEFAULT = 1e-2
GL_NODES = 96


# ---------------------------------------------------------------- model pieces

@dataclass(frozen=True)
class SphereTimesCone:
    """S^3_delta x C(S^2_{1-eps})."""
    delta: float
    eps: float
    r0: float = R_MIN_DEFAULT
    r1: float = math.inf

    def __post_init__(self):
        if self.delta <= 0 or not 0 <= self.eps < 1 or self.r0 <= 0 or self.r1 <= self.r0:
            raise ValueError(f"invalid piece parameters {self}")

    kind = "SphereTimesCone"

    def scaled(self, c: float):
        return replace(self, delta=c * self.delta, r0=c * self.r0, r1=c * self.r1)


@dataclass(frozen=True)
class QuotientSphereTimesCone:
    """(Z_k \\ S^3_delta) x C(S^2_{1-eps}), Z_k acting by left Hopf rotation."""
    delta: float
    eps: float
    k: int
    r0: float = R_MIN_DEFAULT
    r1: float = math.inf

    def __post_init__(self):
        if self.delta <= 0 or not 0 <= self.eps < 1 or self.k < 1 or self.r0 <= 0 or self.r1 <= self.r0:
            raise ValueError(f"invalid piece parameters {self}")

    kind = "QuotientSphereTimesCone"

    def scaled(self, c: float):
        return replace(self, delta=c * self.delta, r0=c * self.r0, r1=c * self.r1)


@dataclass(frozen=True)
class ConeOverProduct:
    """C(S^3_lam x S^2_xi)."""
    lam: float
    xi: float
    r0: float = R_MIN_DEFAULT
    r1: float = math.inf

    def __post_init__(self):
        if self.lam <= 0 or self.xi <= 0 or self.r0 <= 0 or self.r1 <= self.r0:
            raise ValueError(f"invalid piece parameters {self}")

    kind = "ConeOverProduct"

    def scaled(self, c: float):
        return replace(self, r0=c * self.r0, r1=c * self.r1)


@dataclass(frozen=True)
class Euclidean3:
    """Flat R^3 as the cone over the unit S^2; calibration fixture."""
    r0: float = R_MIN_DEFAULT
    r1: float = math.inf

    kind = "Euclidean3"

    def scaled(self, c: float):
        return replace(self, r0=c * self.r0, r1=c * self.r1)


PIECES = {cls.kind: cls for cls in (SphereTimesCone, QuotientSphereTimesCone, ConeOverProduct, Euclidean3)}


def piece_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind")
    if kind not in PIECES:
        raise ValueError(f"unknown piece kind {kind!r}")
    return PIECES[kind](**d)


def piece_to_dict(piece) -> dict:
    return {"kind": piece.kind, **asdict(piece)}


# ---------------------------------------------------------------- Ricci

def model_ricci(piece, r: float) -> np.ndarray:
    """Ricci eigenvalues (ascending) at cone distance r."""
    if not piece.r0 <= r <= piece.r1:
        raise OutOfRange(f"r={r} outside radial range [{piece.r0}, {piece.r1}]")
    if isinstance(piece, (SphereTimesCone, QuotientSphereTimesCone)):
        cone = (1.0 / (1.0 - piece.eps) ** 2 - 1.0) / r**2
        vals = [2.0 / piece.delta**2] * 3 + [0.0, cone, cone]
    elif isinstance(piece, ConeOverProduct):
        vals = [0.0] + [(2.0 / piece.lam**2 - 4.0) / r**2] * 3 + [(1.0 / piece.xi**2 - 4.0) / r**2] * 2
    elif isinstance(piece, Euclidean3):
        vals = [0.0, 0.0, 0.0]
    else:
        raise TypeError(f"not a model piece: {piece!r}")
    return np.sort(np.array(vals))


def _round_s3(chi, th, scale):
    s = J.sin(chi)
    return [scale * scale, scale * scale * s * s, scale * scale * s * s * J.sin(th) * J.sin(th)]


def _round_s2(th, scale):
    return [scale * scale, scale * scale * J.sin(th) * J.sin(th)]


def model_metric(piece):
    """Diagonal metric function in (chi, th1, ph1, r, th2, ph2) coordinates."""
    def metric(x):
        chi, th1, _, r, th2, _ = x
        if isinstance(piece, ConeOverProduct):
            d = [r * 0 + 1.0] + [r * r * e for e in _round_s3(chi, th1, piece.lam)] \
                + [r * r * e for e in _round_s2(th2, piece.xi)]
            order = [3, 0, 1, 2, 4, 5]
        else:
            a = 1.0 - piece.eps
            d = _round_s3(chi, th1, piece.delta) + [r * 0 + 1.0] + [r * r * e for e in _round_s2(th2, a)]
            order = [0, 1, 2, 3, 4, 5]
        diag = [None] * 6
        for slot, val in zip(order, d):
            diag[slot] = val
        return [[diag[i] if i == j else 0.0 for j in range(6)] for i in range(6)]
    return metric


def model_ricci_oracle(piece, r: float, samples: int = 4, seed: int = 0) -> np.ndarray:
    """Oracle Ricci eigenvalues at random angular positions, shape (samples, 6)."""
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0.3, math.pi - 0.3, size=(samples, 5))
    coords = np.column_stack([ang[:, 0], ang[:, 1], ang[:, 2], np.full(samples, r), ang[:, 3], ang[:, 4]])
    return oracle.ricci_eigenvalues(model_metric(piece), coords)


# ---------------------------------------------------------------- volumes

def _gl(a, b, n=GL_NODES):
    """Gauss-Legendre nodes and weights on [a, b] (broadcast over a, b)."""
    x, w = np.polynomial.legendre.leggauss(n)
    a, b = np.asarray(a, float)[..., None], np.asarray(b, float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def cone_ball_volume(a: float, t, s, n: int = GL_NODES):
    """Volume of the ball of radius s about a point at distance t from the tip of C(S^2_a)."""
    t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
    s = np.maximum(s, 0.0)
    out = 4.0 * math.pi * a * a * s**3 / 3.0
    off = t > 0
    if not np.any(off):
        return out
    tt, ss = t[off], s[off]
    lo, hi = np.maximum(tt - ss, 0.0), tt + ss
    # the whole cross-section is inside the ball once aθ reaches its maximum aπ
    ca = math.cos(a * math.pi)
    disc = np.sqrt(np.maximum(tt * tt * ca * ca - tt * tt + ss * ss, 0.0))
    cuts = np.stack([lo, tt * ca - disc, tt * ca + disc, hi], axis=-1)
    cuts = np.sort(np.clip(cuts, lo[:, None], hi[:, None]), axis=-1)
    total = np.zeros_like(tt)
    for i in range(3):
        x, w = _gl(cuts[:, i], cuts[:, i + 1], n)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            c = (tt[:, None] ** 2 + x * x - ss[:, None] ** 2) / (2.0 * tt[:, None] * x)
        theta = np.where(c <= ca, math.pi, np.arccos(np.clip(c, -1.0, 1.0)) / a)
        f = np.where(x > 0, 2.0 * math.pi * a * a * x * x * (1.0 - np.cos(theta)), 0.0)
        total += np.sum(w * f, axis=-1)
    out[off] = total
    return out


def _sphere_times_cone_volume(rho, a, R, t, n):
    R = np.asarray(R, float)
    out = np.empty_like(R)
    for i, Ri in np.ndenumerate(R):
        if Ri / rho <= math.pi:
            # phi = (R/rho) sin w keeps the integrand smooth at the rim
            w, wt = _gl(0.0, 0.5 * math.pi, n)
            phi = Ri / rho * np.sin(w)
            jac = Ri / rho * np.cos(w)
            s = Ri * np.cos(w)
        else:
            phi, wt = _gl(0.0, math.pi, n)
            jac = 1.0
            s = np.sqrt(Ri * Ri - (rho * phi) ** 2)
        f = 4.0 * math.pi * rho**3 * np.sin(phi) ** 2 * jac * cone_ball_volume(a, t, s, n)
        out[i] = np.sum(wt * f)
    return out


def _quotient_volume(rho, a, k, R, t, n):
    eta, weta = _gl(0.0, 0.5 * math.pi, n)
    xi, wxi = _gl(-math.pi / k, math.pi / k, n)
    eta, xi = eta[:, None], xi[None, :]
    w2 = weta[:, None] * wxi[None, :]
    phi = np.arccos(np.clip(np.cos(eta) * np.cos(xi), -1.0, 1.0))
    R = np.asarray(R, float)
    out = np.empty_like(R)
    for i, Ri in np.ndenumerate(R):
        s = np.sqrt(np.maximum(Ri * Ri - (rho * phi) ** 2, 0.0))
        vc = cone_ball_volume(a, t, s.ravel(), n).reshape(s.shape)
        out[i] = 2.0 * math.pi * rho**3 * np.sum(w2 * np.sin(eta) * np.cos(eta) * vc)
    return out


def _cone_over_product_volume(lam, xi, R, t, n):
    R = np.asarray(R, float)
    out = np.empty_like(R)
    for i, Ri in np.ndenumerate(R):
        # directions reachable from the basepoint: sin(d_Sigma) < R/t
        dmax = math.asin(Ri / t) if 0 < Ri < t else math.pi
        phi, wphi = _gl(0.0, min(math.pi, dmax / lam), n)
        th, wth = _gl(0.0, min(math.pi, dmax / xi), n)
        phi, th = phi[:, None], th[None, :]
        meas = (4.0 * math.pi * lam**3 * np.sin(phi) ** 2) * (2.0 * math.pi * xi * xi * np.sin(th))
        meas = meas * wphi[:, None] * wth[None, :]
        c = np.cos(np.minimum(np.hypot(lam * phi, xi * th), math.pi))
        # radial chord: t'^2 - 2 t t' c + t^2 - R^2 < 0
        disc = t * t * c * c - t * t + Ri * Ri
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.maximum(t * c - root, 0.0)
        hi = np.maximum(t * c + root, 0.0)
        out[i] = np.sum(meas * np.where(disc > 0, (hi**6 - lo**6) / 6.0, 0.0))
    return out


def ball_volume(piece, R, basepoint: float = 0.0, n: int = GL_NODES):
    """vol B_R(p) with p at cone distance ``basepoint`` (any sphere position)."""
    if isinstance(piece, SphereTimesCone):
        return _sphere_times_cone_volume(piece.delta, 1.0 - piece.eps, R, basepoint, n)
    if isinstance(piece, QuotientSphereTimesCone):
        return _quotient_volume(piece.delta, 1.0 - piece.eps, piece.k, R, basepoint, n)
    if isinstance(piece, ConeOverProduct):
        return _cone_over_product_volume(piece.lam, piece.xi, R, basepoint, n)
    if isinstance(piece, Euclidean3):
        return cone_ball_volume(1.0, basepoint, np.asarray(R, float), n)
    raise TypeError(f"not a model piece: {piece!r}")


def unit_ball_volume(piece: SphereTimesCone, r: float, t: float = 0.0, n: int = GL_NODES) -> float:
    """vol B_1(q) in S^3_{delta r} x C(S^2_{1-eps}), q at cone distance t."""
    return float(ball_volume(piece.scaled(r), np.array([1.0]), basepoint=t, n=n)[0])


def volume_growth_exponent(piece, radii, basepoint: float = 0.0, n: int = GL_NODES) -> float:
    """Least-squares slope of log vol(B_R) against log R."""
    radii = np.asarray(radii, float)
    if radii.size < 8 or np.any(radii <= 0) or radii.max() / radii.min() < 100.0 * (1 - 1e-12):
        raise InsufficientRange("need at least 8 positive radii spanning two decades")
    vols = ball_volume(piece, radii, basepoint=basepoint, n=n)
    return float(np.polyfit(np.log(radii), np.log(vols), 1)[0])


def volume_curve_csv(piece, radii, basepoint: float = 0.0) -> str:
    radii = np.asarray(radii, float)
    vols = ball_volume(piece, radii, basepoint=basepoint)
    return "r,vol\n" + "".join(f"{r!r},{v!r}\n" for r, v in zip(radii.tolist(), vols.tolist()))


# ---------------------------------------------------------------- decay schedule

CLAIM_I_CONST = 1e100
CLAIM_II_CONST = 1.0
PRODUCT_CONST = 10.0
GLUING_CONST = 1e-10
EPS_PRODUCT_MAX = 0.2
NECK_NOTE = "neck regions between product and cone annuli are treated as a black box satisfying the stated bounds"


@dataclass(frozen=True)
class ScaleSchedule:
    r: tuple
    k: tuple
    delta: tuple
    eps: tuple
    eta: float

    def __post_init__(self):
        for name in ("r", "k", "delta", "eps"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = len(self.r)
        if any(len(getattr(self, f)) != n for f in ("k", "delta", "eps")):
            raise ValueError("schedule sequences must have equal length")

    def __len__(self):
        return len(self.r)

    def to_dict(self):
        return asdict(self)


@dataclass
class IndexCheck:
    j: int
    separation: float
    separated: bool
    growing: bool
    params_ok: bool
    claim_i_ok: bool
    mu_min_product: float
    mu_min_gluing: float
    mu_max: float
    feasible: bool
    flags: list = field(default_factory=list)


@dataclass
class ScheduleReport:
    checks: list
    feasible: bool
    note: str = NECK_NOTE

    def to_dict(self):
        return {"feasible": self.feasible, "note": self.note, "checks": [asdict(c) for c in self.checks]}


def check_decay_schedule(s: ScaleSchedule) -> ScheduleReport:
    """Index-by-index consistency of the curvature-decay induction (log10 arithmetic)."""
    checks = []
    if len(s) < 2:
        return ScheduleReport([], False, NECK_NOTE + "; schedule prefix shorter than 2")
    prev_ratio = -math.inf
    for j in range(len(s) - 1):
        r0, r1 = s.r[j], s.r[j + 1]
        k0, k1 = s.k[j], s.k[j + 1]
        d1, e1 = s.delta[j + 1], s.eps[j + 1]
        flags = []
        ratio = math.log10(r1) - math.log10(k0 * r0)
        separated = ratio > 0
        growing = ratio > prev_ratio
        prev_ratio = ratio
        if not separated:
            flags.append("scale separation r_{j+1}/(k_j r_j) <= 1")
        if not growing:
            flags.append("scale separation not growing")
        params_ok = (min(k0, k1) >= 2 and 0 < d1 < 1 and 0 < e1 <= EPS_PRODUCT_MAX and s.eta > 0)
        if not params_ok:
            flags.append("parameter out of range")
        lr, ld = math.log10(r1), math.log10(d1)
        # product region: 10/(r d)^2 <= 1e100 / (k r)^(2-eta)
        claim_i = (math.log10(PRODUCT_CONST) - 2 * (lr + ld)
                   <= math.log10(CLAIM_I_CONST) - (2 - s.eta) * (math.log10(k1) + lr))
        if not claim_i:
            flags.append("product-region curvature exceeds the global bound")
        # curvature on the gluing annulus must sit under mu / r^(2-eta)
        mu_prod = 10 ** (math.log10(PRODUCT_CONST) - s.eta * lr - 2 * ld)
        mu_glue = 10 ** (math.log10(GLUING_CONST) - s.eta * lr - 2 * ld)
        mu_max = CLAIM_II_CONST
        if mu_prod > mu_max:
            flags.append("no admissible mu: product bound")
        if mu_glue > mu_max:
            flags.append("no admissible mu: gluing bound")
        feasible = not flags
        checks.append(IndexCheck(j, 10**ratio, separated, growing, params_ok, claim_i,
                                 mu_prod, mu_glue, mu_max, feasible, flags))
    return ScheduleReport(checks, all(c.feasible for c in checks))


def generate_schedule(eta: float, steps: int = 5, delta: float = 0.1, eps: float = 0.1,
                      k: int = 2, mu: float = 1e-2, r_start: float | None = None) -> ScaleSchedule:
    """Pick each r_{j+1} large enough that mu admits the product bound, with growing separation."""
    need = (math.log10(PRODUCT_CONST) - math.log10(mu) - 2 * math.log10(delta)) / eta
    # start just below the threshold so that separations stay modest and floats finite
    rs = [r_start if r_start is not None else 10 ** (need - 1.0) / k]
    sep = 0.0
    for _ in range(steps - 1):
        base = math.log10(k * rs[-1])
        sep = max(need - base, sep + 1.0)
        rs.append(10 ** (base + sep))
    return ScaleSchedule(tuple(rs), (k,) * steps, (delta,) * steps, (eps,) * steps, eta)


# ---------------------------------------------------------------- tangent cones

@dataclass(frozen=True)
class ConeDescriptor:
    tag: str
    params: dict
    ranges: dict
    basepoint: str

    def __str__(self):
        return self.tag

    def to_dict(self):
        return asdict(self)


def _norm(text: str) -> str:
    return re.sub(r"[\s_j]", "", text.lower()).replace("<<", "<").replace("≈", "~").replace("→", "->")


REGIMES = {
    "s=r": "s=r",
    "r<s<kr": "r<s<kr",
    "s~kr": "s~kr",
    "kr<s<r+1": "kr<s<rnext",
    "kr<s<rnext": "kr<s<rnext",
    "s->r+1": "s->rnext",
    "s->rnext": "s->rnext",
}


def _parse(regime: str, k_behavior):
    parts = [p for p in (_norm(x) for x in regime.split(",")) if p]
    scale, kb = None, None
    for p in parts:
        if p in REGIMES:
            scale = REGIMES[p]
        elif p in ("k->inf", "k->infty", "diverges", "k->∞"):
            kb = "diverges"
        elif p.startswith("k->") or p == "converges":
            kb = "converges"
        else:
            raise UnknownRegime(f"unrecognised regime component {p!r}")
    if k_behavior is not None:
        kb = {"inf": "diverges", "infinity": "diverges"}.get(str(k_behavior), str(k_behavior))
    if scale is None:
        raise UnknownRegime(f"no scale regime in {regime!r}")
    return scale, kb


def classify_tangent_cone(regime: str, k_behavior=None, k: int | None = None, s: float | None = None) -> ConeDescriptor:
    """Tangent cone at infinity of the quotient for a scale regime and limit of k_j."""
    scale, kb = _parse(regime, k_behavior)
    if scale == "s->rnext":
        return ConeDescriptor("R^3", {}, {}, "cone point; the previous action has become trivial")
    if kb not in ("converges", "diverges"):
        raise UnknownRegime(f"k behaviour must be 'converges' or 'diverges', got {kb!r}")
    if scale == "s=r":
        if kb == "diverges":
            return ConeDescriptor("R^2 x S^1", {}, {}, "any point; Z acts by unit translation")
        return ConeDescriptor("C(S^2_1/Z_k)", {"k": k}, {"k": [1, None]},
                              f"distance {k if k is not None else 'k'} from the cone point")
    if scale == "r<s<kr":
        if kb == "diverges":
            return ConeDescriptor("R^2", {}, {}, "any point; the action is by R translations")
        raise UnknownRegime("r_j << s_j << k_j r_j with bounded k_j is an empty scale window")
    if scale == "s~kr":
        if kb == "diverges":
            return ConeDescriptor("C([0,pi])", {}, {}, "distance about 1 from the boundary line; half-plane")
        raise UnknownRegime("s_j ~ k_j r_j is listed only for k_j -> infinity")
    if scale == "kr<s<rnext":
        if kb == "converges":
            if s is not None and not 0.0 <= s <= 1.0:
                raise UnknownRegime(f"cross-section radius s={s} outside [0, 1]")
            return ConeDescriptor("C(S^2_s/Z_k)", {"k": k, "s": s}, {"k": [1, None], "s": [0.0, 1.0]},
                                  "cone point; s = 0 is the half ray")
        raise UnknownRegime("k_j r_j << s_j << r_{j+1} is listed only for bounded k_j")
    raise UnknownRegime(regime)


CASE_LIST = (
    ("s=r", "converges"),
    ("s=r", "diverges"),
    ("r<s<kr", "diverges"),
    ("s~kr", "diverges"),
    ("kr<s<rnext", "converges"),
    ("s->rnext", None),
)
