"""Numerical curvature certification for circle-invariant metrics on S^3 x S^2."""

__version__ = "0.1.0"
