"""Ball-volume exponents of the model pieces, from the tip and from off-tip basepoints."""

import numpy as np

from twistcert.asymptotics import ConeOverProduct, Euclidean3, SphereTimesCone, volume_growth_exponent

pieces = [ConeOverProduct(0.5, 0.4), SphereTimesCone(1.0, 0.1), Euclidean3()]
for lo, hi in [(0.1, 100.0), (10.0, 1e3), (1e2, 1e4)]:
    radii = np.geomspace(lo, hi, 16)
    for p in pieces:
        slopes = [volume_growth_exponent(p, radii, basepoint=t) for t in (0.0, 1.0)]
        print(f"R in [{lo:g}, {hi:g}]  {p.kind:16s} tip {slopes[0]:.4f}  off-tip {slopes[1]:.4f}")
