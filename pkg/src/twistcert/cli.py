"""Command-line front end.

Every subcommand builds a JSON report ``{"schema": 1, "command", "config",
"result", "pass", "failures", "meta"}``.  Only ``meta`` carries run-dependent
data (the timestamp), so reports from identical configs are byte-identical
outside it.  Exit status: 0 when every requested check passes, 1 on a failed
check, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
import tempfile

import numpy as np

from . import asymptotics as A
from . import certify as C
from .errors import (InsufficientRange, InvalidStage, NoFeasibleProfile, NoPassingAlpha, OutOfRange,
                     TwistCertError, UnknownRegime)

SCHEMA = 1
RESIDUAL_TOL = 1e-5
TWIST_TOL = 1e-12
WELL_DEFINED_TOL = 1e-10
END_STATE_TOL = 1e-6
MODEL_TOL = 1e-6
NONNEG_TOL = 1e-10

CONFIG_ERRORS = (InvalidStage, OutOfRange, InsufficientRange, UnknownRegime, ValueError, KeyError, TypeError)


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument errors become ConfigError so they get a JSON failure record."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_atomic(path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- subcommands

def _grid(a, alpha=1.0):
    return C.GridSpec(a.k, alpha, n_psi=a.n_psi, n_beta=a.n_beta, seed=a.seed)


def cmd_verify_formulas(a):
    res = C.formula_residuals(a.k, a.alpha, a.samples, a.seed)
    lines = [f"{st:8s} {r:.3e}" for st, r in res.items()]
    worst = max(res.values())
    failures = [] if worst < RESIDUAL_TOL else [
        {"error": "ResidualTooLarge", "stage": st, "value": r, "tol": RESIDUAL_TOL}
        for st, r in res.items() if r >= RESIDUAL_TOL]
    return {"residuals": res, "max": worst}, failures, lines


def cmd_certify(a):
    rep = C.certify_path(a.k, _grid(a), a.bound, a.tol, a.workers, a.end_samples)
    d = rep.to_dict()
    lines = [f"alpha* = {rep.alpha!r}", f"delta_min = {rep.delta_min!r}"]
    lines += [f"{r.stage:8s} min {r.min_eigenvalue:.6f} residual {r.oracle_residual_max:.2e} "
              f"{'PASS' if r.passed else 'FAIL'}" for r in rep.records]
    lines.append(f"end-state residual {rep.end_state_residual}")
    if a.csv:
        for r in rep.records:
            write_atomic(f"{a.csv}.{r.stage}.csv", r.to_csv())
    return d, rep.failures, lines


def cmd_threshold(a):
    stages = tuple(s for s in a.stages.split(",") if s)
    bad = [s for s in stages if s not in C.DEFAULT_BOUNDS or s in ("beta23", "post")]
    if bad:
        raise ConfigError(f"threshold search needs closed-form stages, got {bad}")
    try:
        alpha = C.alpha_threshold(a.k, stages, a.bound, a.tol, _grid(a))
    except NoPassingAlpha as exc:
        return {"alpha": None}, [{"error": "NoPassingAlpha", "message": str(exc)}], [str(exc)]
    recs = [C.sweep_stage(s, _grid(a, alpha), a.bound, workers=a.workers) for s in stages]
    failures = [{"error": "CertificationFailed", "stage": r.stage, "minEigenvalue": r.min_eigenvalue}
                for r in recs if not r.passed]
    lines = [f"alpha* = {alpha!r}"] + [f"{r.stage:8s} min {r.min_eigenvalue:.6f}" for r in recs]
    return {"alpha": alpha, "records": [r.to_dict() for r in recs]}, failures, lines


def cmd_delta_search(a):
    if a.alpha is None:
        raise ConfigError("delta-search needs --alpha")
    try:
        prof, rec = C.delta_profile_search(a.alpha, a.k, _grid(a, a.alpha), a.bound, workers=a.workers)
    except NoFeasibleProfile as exc:
        return {"profile": None}, [{"error": "NoFeasibleProfile", "message": str(exc)}], [str(exc)]
    lines = [f"delta_min = {prof.interior_min!r}", f"beta23 min {rec.min_eigenvalue:.6f}"]
    return {"profile": prof.to_dict(), "record": rec.to_dict()}, [], lines


def cmd_twist_check(a):
    from . import twistmap as T

    result, failures, lines = {}, [], []
    for k in a.ks:
        eq = T.check_equivariance(k, a.samples, a.seed)
        wd = T.well_definedness_residual(k, a.samples, a.seed)
        row = {"circle": eq["circle"], "right": eq["right"], "wellDefined": wd}
        if eq["circle"] >= TWIST_TOL or eq["right"] >= TWIST_TOL:
            failures.append({"error": "EquivarianceResidual", "k": k, **eq})
        if wd >= WELL_DEFINED_TOL:
            failures.append({"error": "WellDefinednessResidual", "k": k, "value": wd})
        if a.alpha is not None and k % 2 == 0:
            prof = C.DeltaProfile(a.delta_min, a.alpha)
            end = T.end_state_isometry_residual(a.alpha, k, prof, a.end_samples, a.seed)
            neg = T.end_state_isometry_residual(a.alpha, k, prof, a.end_samples, a.seed, fiber_radius=1.0)
            row.update(endState=end, negativeControl=neg)
            if end >= END_STATE_TOL:
                failures.append({"error": "IsometryResidual", "k": k, "value": end})
            if neg <= 0.1:
                failures.append({"error": "NegativeControlTooSmall", "k": k, "value": neg})
        result[str(k)] = row
        lines.append(f"k={k} " + " ".join(f"{n}={v:.2e}" for n, v in row.items()))
    return result, failures, lines


def _piece(a):
    if a.piece:
        return A.piece_from_dict(json.loads(a.piece))
    if a.kind == "SphereTimesCone":
        return A.SphereTimesCone(a.delta, a.eps)
    if a.kind == "QuotientSphereTimesCone":
        return A.QuotientSphereTimesCone(a.delta, a.eps, a.k_divisor)
    if a.kind == "ConeOverProduct":
        return A.ConeOverProduct(a.lam, a.xi)
    if a.kind == "Euclidean3":
        return A.Euclidean3()
    raise ConfigError(f"unknown piece kind {a.kind!r}")


def cmd_model_ricci(a):
    piece = _piece(a)
    closed = A.model_ricci(piece, a.r)
    orc = A.model_ricci_oracle(piece, a.r, seed=a.seed) if piece.kind != "Euclidean3" else closed[None]
    scale = max(float(np.max(np.abs(closed))), 1.0)
    resid = float(np.max(np.abs(orc - closed[None, : orc.shape[-1]]))) / scale
    failures = []
    if resid >= MODEL_TOL:
        failures.append({"error": "OracleMismatch", "value": resid})
    if piece.kind != "ConeOverProduct" and closed.min() < -NONNEG_TOL:
        failures.append({"error": "NegativeRicci", "value": float(closed.min())})
    lines = ["eigenvalues " + " ".join(f"{x:.10g}" for x in closed), f"oracle residual {resid:.2e}"]
    return {"piece": A.piece_to_dict(piece), "r": a.r, "eigenvalues": closed,
            "oracleResidual": resid}, failures, lines


def cmd_volume_growth(a):
    piece = _piece(a)
    radii = np.geomspace(a.rmin, a.rmax, a.n_radii)
    slope = A.volume_growth_exponent(piece, radii, basepoint=a.basepoint)
    if a.csv:
        write_atomic(a.csv, A.volume_curve_csv(piece, radii, a.basepoint))
    failures = []
    if a.expect is not None and abs(slope - a.expect) > a.expect_tol:
        failures.append({"error": "ExponentMismatch", "value": slope, "expected": a.expect})
    return {"piece": A.piece_to_dict(piece), "radii": radii, "exponent": slope}, failures, \
        [f"exponent {slope:.6f}"]


def cmd_decay_schedule(a):
    if a.schedule:
        with open(a.schedule) as fh:
            sched = A.ScaleSchedule(**json.load(fh))
    else:
        sched = A.generate_schedule(a.eta, a.steps, a.delta, a.eps, a.k_step)
    rep = A.check_decay_schedule(sched)
    failures = [{"error": "Infeasible", "j": c.j, "flags": c.flags} for c in rep.checks if not c.feasible]
    if not rep.checks:
        failures.append({"error": "Infeasible", "message": rep.note})
    lines = [f"j={c.j} separation={c.separation:.3g} mu in [{max(c.mu_min_product, c.mu_min_gluing):.3g}, "
             f"{c.mu_max:.3g}] {'ok' if c.feasible else 'INFEASIBLE ' + '; '.join(c.flags)}"
             for c in rep.checks]
    return {"schedule": sched.to_dict(), "report": rep.to_dict()}, failures, lines


def cmd_tangent_cone(a):
    desc = A.classify_tangent_cone(a.regime, a.k_behavior, a.k_limit, a.s)
    return desc.to_dict(), [], [str(desc)]


COMMANDS = {
    "verify-formulas": cmd_verify_formulas,
    "certify": cmd_certify,
    "threshold": cmd_threshold,
    "delta-search": cmd_delta_search,
    "twist-check": cmd_twist_check,
    "model-ricci": cmd_model_ricci,
    "volume-growth": cmd_volume_growth,
    "decay-schedule": cmd_decay_schedule,
    "tangent-cone": cmd_tangent_cone,
}


# ---------------------------------------------------------------- parser

def _common(p, k_default=2):
    p.add_argument("--config", help="JSON file with option values (flags override it)")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=C.default_workers())


def _grid_args(p):
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n-psi", type=int, default=512)
    p.add_argument("--n-beta", type=int, default=64)
    p.add_argument("--bound", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=0.01)


def _piece_args(p):
    p.add_argument("--kind", default="SphereTimesCone",
                   choices=sorted(A.PIECES))
    p.add_argument("--piece", help="piece as a JSON object with a 'kind' key")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--k-divisor", type=int, default=2)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--xi", type=float, default=0.25)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twistcert", allow_abbrev=False,
                     description="Ricci-positivity certification of equivariant twisting metrics")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-formulas", help="closed form against oracle on random points", allow_abbrev=False)
    _common(p)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=200)

    p = sub.add_parser("certify", help="full deformation path", allow_abbrev=False)
    _common(p)
    _grid_args(p)
    p.add_argument("--end-samples", type=int, default=200)
    p.add_argument("--csv", help="prefix for per-leg CSV grids")

    p = sub.add_parser("threshold", help="largest passing alpha", allow_abbrev=False)
    _common(p)
    _grid_args(p)
    p.add_argument("--stages", default="beta01")

    p = sub.add_parser("delta-search", help="delta profile for beta in [2,3]", allow_abbrev=False)
    _common(p)
    _grid_args(p)
    p.add_argument("--alpha", type=float)

    p = sub.add_parser("twist-check", help="twist map residuals", allow_abbrev=False)
    _common(p)
    p.add_argument("--ks", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--alpha", type=float, help="also run the end-state check for even k")
    p.add_argument("--delta-min", type=float, default=1.0)
    p.add_argument("--end-samples", type=int, default=200)

    p = sub.add_parser("model-ricci", help="Ricci eigenvalues of a model piece", allow_abbrev=False)
    _common(p)
    _piece_args(p)
    p.add_argument("--r", type=float, default=1.0)

    p = sub.add_parser("volume-growth", help="log-log ball volume exponent", allow_abbrev=False)
    _common(p)
    _piece_args(p)
    p.add_argument("--rmin", type=float, default=10.0)
    p.add_argument("--rmax", type=float, default=1000.0)
    p.add_argument("--n-radii", type=int, default=12)
    p.add_argument("--basepoint", type=float, default=0.0)
    p.add_argument("--expect", type=float)
    p.add_argument("--expect-tol", type=float, default=0.05)
    p.add_argument("--csv", help="write the (r, vol) curve here")

    p = sub.add_parser("decay-schedule", help="curvature-decay parameter bookkeeping", allow_abbrev=False)
    _common(p)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--k-step", type=int, default=2)
    p.add_argument("--schedule", help="JSON file with r, k, delta, eps, eta (checked instead of generated)")

    p = sub.add_parser("tangent-cone", help="tangent cone at infinity for a scale regime", allow_abbrev=False)
    _common(p)
    p.add_argument("--regime", required=True)
    p.add_argument("--k-behavior", choices=["converges", "diverges"])
    p.add_argument("--k-limit", type=int)
    p.add_argument("--s", type=float)
    return parser


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        given = {tok.split("=")[0].lstrip("-").replace("-", "_") for tok in argv if tok.startswith("--")}
        for key, val in cfg.items():
            dest = key.replace("-", "_")
            if dest in ("command", "config"):
                continue
            if not hasattr(args, dest):
                raise ConfigError(f"unknown config key {key!r} for {args.command}")
            if dest not in given:
                setattr(args, dest, val)
    return args


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}), file=sys.stderr)
        return 2
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "config", "workers")}
    report = {"schema": SCHEMA, "command": args.command, "config": config}
    try:
        result, failures, lines = COMMANDS[args.command](args)
        status = 0 if not failures else 1
    except (ConfigError, *CONFIG_ERRORS) as exc:
        result, lines, status = None, [], 2
        failures = [{"error": type(exc).__name__, "message": str(exc)}]
    except TwistCertError as exc:
        result, lines, status = None, [], 1
        failures = [{"error": type(exc).__name__, "message": str(exc)}]
    report.update(result=result, failures=failures, meta={"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()})
    report["pass"] = status == 0
    for line in lines:
        print(line)
    for f in failures:
        print(json.dumps(_jsonable(f), sort_keys=True), file=sys.stderr)
    if args.out:
        write_atomic(args.out, render(report))
    return status


def main():
    sys.exit(run())
