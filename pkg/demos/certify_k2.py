"""Certify the k = 2 deformation path and print one line per leg."""

from twistcert.certify import certify_path

rep = certify_path(2)
print(f"alpha* = {rep.alpha:.6f}, delta_min = {rep.delta_min}")
for r in rep.records:
    print(f"{r.stage:8s} min eigenvalue {r.min_eigenvalue:.4f} at psi={r.argmin[0]:.3f}, "
          f"param={r.argmin[1]:.3f}; oracle residual {r.oracle_residual_max:.1e}; "
          f"{'pass' if r.passed else 'FAIL'}")
print(f"end-state isometry residual {rep.end_state_residual:.1e}")
