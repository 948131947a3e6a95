"""Grid certification of Ricci positivity along the deformation path.

A sweep evaluates the minimum Ricci eigenvalue on a (psi, beta) grid.  Where
closed forms exist they are used on the whole grid and the oracle re-checks a
seeded random subsample; on beta in [2, 3] and the post-squish leg the oracle
is the only source and is run on every grid cell.  Those metrics are not
functions of psi alone, so each cell draws a fresh random (u, theta).
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import oracle
from .errors import (NoFeasibleProfile, NoPassingAlpha, StageConstructionFailure,
                     TwistCertError)
from .frames import DeltaProfile, ManifoldPoint, StageSpec, chart_coords, default_chart, \
    metric_function, stage_frame
from .linalg import jacobi_eigh
from .oneill import closed_form_matrix, quotient_ricci_beta12
from .quaternion import random_unit_quaternions

RESIDUAL_TOL = 1e-5
DEFAULT_BOUNDS = {"squish": 0.5, "beta01": 0.5, "beta12": 0.5, "beta23": 0.5, "post": 0.5}
TARGETS = {"beta12": ("ric_h", 3.0), "beta23": ("ric_g", 2.0)}
STAGE_RANGES = {"beta01": (0.0, 1.0), "beta12": (1.0, 2.0), "beta23": (2.0, 3.0), "post": (0.5, 1.0)}


@dataclass
class GridSpec:
    k: int
    alpha: float
    n_psi: int = 512
    n_beta: int = 64
    psi_min: float = 1e-3
    psi_max: float = np.pi - 1e-3
    seed: int = 0
    oracle_fraction: float = 0.05

    def __post_init__(self):
        if self.n_psi < 16 or self.n_beta < 16:
            raise ValueError("grid counts must be at least 16")
        if not 0 < self.psi_min < self.psi_max < np.pi:
            raise ValueError("psi bounds must lie inside (0, pi)")

    def psi(self):
        return np.linspace(self.psi_min, self.psi_max, self.n_psi)

    def params(self, stage: str):
        if stage == "squish":
            # alpha runs from 1 down to the grid's alpha
            return np.geomspace(1.0, self.alpha, self.n_beta)
        lo, hi = STAGE_RANGES[stage]
        return np.linspace(lo, hi, self.n_beta)

    def with_alpha(self, alpha):
        d = asdict(self)
        d["alpha"] = alpha
        return GridSpec(**d)

    def doubled(self):
        d = asdict(self)
        d["n_psi"] *= 2
        d["n_beta"] *= 2
        return GridSpec(**d)


@dataclass
class CertificationRecord:
    stage: str
    grid: GridSpec
    min_eigenvalue: float
    argmin: tuple
    oracle_residual_max: float
    bound: float
    passed: bool
    targets: dict = field(default_factory=dict)
    delta_min: float | None = None
    min_grid: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "grid": asdict(self.grid),
            "minEigenvalue": self.min_eigenvalue,
            "argmin": {"psi": self.argmin[0], "beta": self.argmin[1]},
            "oracleResidualMax": self.oracle_residual_max,
            "bound": self.bound,
            "pass": self.passed,
            "targets": self.targets,
            "deltaMin": self.delta_min,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["psi", "beta", "lambda_min"])
        psi, par = self.grid.psi(), self.grid.params(self.stage)
        for j, b in enumerate(par):
            for i, p in enumerate(psi):
                w.writerow([f"{p:.12g}", f"{b:.12g}", f"{self.min_grid[j, i]:.12g}"])
        return buf.getvalue()


def _spec(stage, k, alpha, par, delta=None):
    if stage == "squish":
        return StageSpec(k, float(par), None)
    if stage == "post":
        return StageSpec(k, alpha, 3.0, rho=float(par))
    return StageSpec(k, alpha, float(par), delta)


def oracle_stage_ricci(spec: StageSpec, psi, rng):
    """Oracle frame Ricci at latitudes psi with random (u, theta)."""
    psi = np.asarray(psi, dtype=float)
    n = psi.size
    p = ManifoldPoint.from_angles(random_unit_quaternions(rng, n), psi, rng.uniform(0, 2 * np.pi, n))
    chart = default_chart(p)
    x = chart_coords(chart, p)
    frame = stage_frame(spec, p).in_chart(chart, x)
    return oracle.ricci_in_frame(metric_function(spec, chart), x, frame).matrix


def closed_grid(stage, k, alpha, par, psi):
    """Closed-form Ricci on the (par, psi) grid, shape (n_par, n_psi, 5, 5)."""
    if stage == "squish":
        return np.stack([closed_form_matrix(k, a, 0.0, psi, "beta01") for a in par])
    return closed_form_matrix(k, alpha, par[:, None], psi[None, :], stage)


def formula_residuals(k: int, alpha: float, samples: int = 200, seed: int = 0, groups: int = 20) -> dict:
    """Closed form against oracle on seeded random points, per closed-form stage.

    Each stage draws ``groups`` parameter values and ``samples / groups``
    random points (psi, u, theta) for each.  The residual is
    max |closed - oracle| / max |oracle| over the stage.
    """
    rng = np.random.default_rng(seed)
    per = max(samples // groups, 1)
    out = {}
    for stage in ("squish", "beta01", "beta12"):
        if stage == "squish":
            pars = np.exp(rng.uniform(np.log(alpha), 0.0, groups))
        else:
            pars = rng.uniform(*STAGE_RANGES[stage], groups)
        num = den = 0.0
        for par in pars:
            psi = rng.uniform(1e-3, np.pi - 1e-3, per)
            if stage == "squish":
                C = closed_form_matrix(k, par, 0.0, psi, "beta01")
            else:
                C = closed_form_matrix(k, alpha, par, psi, stage)
            O = oracle_stage_ricci(_spec(stage, k, alpha, par), psi, rng)
            num = max(num, float(np.max(np.abs(C - O))))
            den = max(den, float(np.max(np.abs(O))))
        out[stage] = num / den
    return out


def _oracle_row(args):
    stage, k, alpha, par, delta_min, psi, seed = args
    delta = DeltaProfile(delta_min, alpha) if delta_min is not None else None
    spec = _spec(stage, k, alpha, par, delta)
    return oracle_stage_ricci(spec, psi, np.random.default_rng(seed))


def _map(fn, items, workers):
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def sweep_stage(stage: str, grid: GridSpec, bound: float | None = None, delta: DeltaProfile | None = None,
                use_oracle: bool = True, workers: int = 1) -> CertificationRecord:
    """Minimum Ricci eigenvalue over the stage grid, with oracle cross-checks."""
    bound = DEFAULT_BOUNDS[stage] if bound is None else bound
    psi, par = grid.psi(), grid.params(stage)
    k, alpha = grid.k, grid.alpha
    rng = np.random.default_rng(grid.seed)
    residual = 0.0
    targets = {}
    delta_min = delta.interior_min if delta is not None else None
    if stage == "beta23" and delta is None:
        delta_min = 1.0
    try:
        if stage in ("squish", "beta01", "beta12"):
            ric = closed_grid(stage, k, alpha, par, psi)
            if stage == "beta12":
                hmin = jacobi_eigh(quotient_ricci_beta12(k, alpha, par[:, None], psi[None, :]))[..., 0]
                targets["ric_h"] = {"target": 3.0, "min": float(hmin.min()), "met": bool(hmin.min() >= 3.0)}
            if use_oracle:
                n_total = ric.shape[0] * ric.shape[1]
                n_sub = max(int(np.ceil(grid.oracle_fraction * n_total)), 1)
                flat = rng.choice(n_total, size=n_sub, replace=False)
                jj, ii = np.unravel_index(np.sort(flat), ric.shape[:2])
                num = 0.0
                den = 0.0
                for j in np.unique(jj):
                    sel = ii[jj == j]
                    spec = _spec(stage, k, alpha, par[j], delta)
                    O = oracle_stage_ricci(spec, psi[sel], rng)
                    num = max(num, float(np.max(np.abs(ric[j, sel] - O))))
                    den = max(den, float(np.max(np.abs(O))))
                residual = num / den
        else:
            seeds = rng.integers(0, 2**63 - 1, size=len(par))
            rows = _map(_oracle_row, [(stage, k, alpha, b, delta_min, psi, int(sd))
                                      for b, sd in zip(par, seeds)], workers)
            ric = np.stack(rows)
            # the only closed forms here are Ric(U, U) = 2 and, at beta = 2, the whole matrix
            num = float(np.max(np.abs(ric[..., 0, 0] - 2.0)))
            if stage == "beta23":
                c2 = closed_form_matrix(k, alpha, 2.0, psi, "beta12")
                num = max(num, float(np.max(np.abs(ric[0] - c2))))
                eig_h = jacobi_eigh(ric[..., 1:, 1:] + np.diag([2.0, 2.0, 0.0, 0.0]))[..., 0]
                targets["ric_h"] = {"target": 3.0, "min": float(eig_h.min()), "met": bool(eig_h.min() >= 3.0)}
            residual = num / float(np.max(np.abs(ric)))
    except TwistCertError as exc:
        raise StageConstructionFailure(str(exc)) from exc
    eig = jacobi_eigh(ric)[..., 0]
    j, i = np.unravel_index(int(np.argmin(eig)), eig.shape)
    lam = float(eig[j, i])
    if stage in ("beta23", "post") or stage in TARGETS:
        targets.setdefault("ric_g", {"target": 2.0, "min": lam, "met": bool(lam >= 2.0)})
    passed = bool(lam >= bound and residual <= RESIDUAL_TOL)
    return CertificationRecord(stage, grid, lam, (float(psi[i]), float(par[j])), residual, bound, passed,
                               targets, delta_min, eig)


def _passes_closed(stage, k, alpha, grid, bound):
    rec = sweep_stage(stage, grid.with_alpha(alpha), bound, use_oracle=False)
    return rec.passed


def alpha_threshold(k: int, stages=("beta01",), bound: float = 0.5, tol: float = 0.01,
                    grid: GridSpec | None = None) -> float:
    """Largest alpha (to relative tol) for which every listed stage passes.

    Bisection uses closed-form-only sweeps; the caller certifies the result
    with the oracle.  Monotonicity in alpha is spot-checked at three interior
    points and, if violated, replaced by a geometric scan.
    """
    grid = grid or GridSpec(k, 1.0)
    grid = GridSpec(**{**asdict(grid), "k": k})

    def ok(a):
        return all(_passes_closed(st, k, a, grid, bound) for st in stages)

    if ok(1.0):
        return 1.0
    lo = None
    for m in range(1, 21):
        if ok(2.0 ** -m):
            lo = 2.0 ** -m
            break
    if lo is None:
        raise NoPassingAlpha(f"no passing alpha down to 2^-20 for k={k}")
    hi = min(2.0 * lo, 1.0)
    while hi / lo > 1.0 + tol:
        mid = np.sqrt(lo * hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    if not all(ok(lo * f) for f in (0.25, 0.5, 0.75)):
        scan = np.geomspace(2.0 ** -20, 1.0, 400)
        good = [a for a in scan if ok(a)]
        lo = float(max(good))
    return float(lo)


def delta_profile_search(alpha: float, k: int, grid: GridSpec | None = None, bound: float = 0.5,
                         max_halvings: int = 30, workers: int = 1):
    """Halve the interior minimum of delta until the beta in [2,3] sweep passes.

    Returns ``(DeltaProfile, CertificationRecord)``.
    """
    grid = grid or GridSpec(k, alpha)
    grid = GridSpec(**{**asdict(grid), "k": k, "alpha": alpha})
    dmin = 1.0
    for _ in range(max_halvings + 1):
        prof = DeltaProfile(dmin, alpha)
        try:
            rec = sweep_stage("beta23", grid, bound, prof, workers=workers)
        except StageConstructionFailure as exc:
            # fibers this thin leave the oracle's conditioning range; no smaller profile can be checked
            raise NoFeasibleProfile(f"interior minimum {dmin:.3g} is numerically degenerate: {exc}") from exc
        if rec.passed:
            return prof, rec
        dmin *= 0.5
    raise NoFeasibleProfile(f"no passing delta profile after {max_halvings} halvings (bound {bound})")


@dataclass
class PathReport:
    k: int
    alpha: float
    delta_min: float | None
    records: list
    end_state_residual: float | None
    passed: bool
    failures: list

    def to_dict(self):
        return {
            "k": self.k,
            "alpha": self.alpha,
            "deltaMin": self.delta_min,
            "legs": [r.to_dict() for r in self.records],
            "endStateResidual": self.end_state_residual,
            "pass": self.passed,
            "failures": self.failures,
        }


def certify_path(k: int, grid: GridSpec | None = None, bound: float = 0.5, tol: float = 0.01,
                 workers: int = 1, end_samples: int = 200) -> PathReport:
    """Squish, the three beta legs and the post-squish leg, plus the end-state check."""
    from .errors import InvalidStage
    from .twistmap import end_state_isometry_residual

    if int(k) != k or int(k) % 2:
        raise InvalidStage(f"twisting index must be an even integer, got {k}")
    grid = grid or GridSpec(k, 1.0)
    alpha = alpha_threshold(k, ("beta01", "beta12"), bound, tol, grid)
    g = GridSpec(**{**asdict(grid), "k": k, "alpha": alpha})
    records, failures = [], []
    for stage in ("squish", "beta01", "beta12"):
        records.append(sweep_stage(stage, g, bound, workers=workers))
    prof = None
    try:
        prof, rec = delta_profile_search(alpha, k, g, bound, workers=workers)
        records.append(rec)
    except NoFeasibleProfile as exc:
        failures.append({"stage": "beta23", "error": "NoFeasibleProfile", "message": str(exc)})
    records.append(sweep_stage("post", g, bound, workers=workers))
    end = None
    if prof is not None:
        end = end_state_isometry_residual(alpha, k, prof, samples=end_samples, seed=grid.seed)
        if end > 1e-6:
            failures.append({"stage": "end-state", "error": "IsometryResidual", "value": end})
    for r in records:
        if not r.passed:
            failures.append({"stage": r.stage, "error": "CertificationFailed",
                             "minEigenvalue": r.min_eigenvalue, "bound": r.bound,
                             "oracleResidualMax": r.oracle_residual_max})
    return PathReport(k, alpha, None if prof is None else prof.interior_min, records, end,
                      not failures, failures)


def default_workers() -> int:
    return os.cpu_count() or 1
