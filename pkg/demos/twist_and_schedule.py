"""Twist-map residuals, a generated decay schedule, and the tangent-cone table."""

from twistcert.asymptotics import CASE_LIST, check_decay_schedule, classify_tangent_cone, generate_schedule
from twistcert.twistmap import check_equivariance, psi_hat_equivariance_residual, well_definedness_residual

for k in (1, 2, 3):
    print(k, check_equivariance(k), well_definedness_residual(k), psi_hat_equivariance_residual(k))

s = generate_schedule(0.1)
for c in check_decay_schedule(s).checks:
    print(f"j={c.j} separation {c.separation:.0e} mu in [{c.mu_min_product:.2e}, {c.mu_max}] "
          f"{'ok' if c.feasible else c.flags}")

for regime, kb in CASE_LIST:
    print(f"{regime:12s} {str(kb):10s} -> {classify_tangent_cone(regime, kb, k=2)}")
