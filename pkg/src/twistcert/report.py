"""Ricci data expressed in an orthonormal frame."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import jacobi_eigh, symmetrize

FRAME_LABELS = ("U", "Z2", "Z3", "F1", "F2")


@dataclass
class RicciReport:
    """5x5 Ricci components in a frame, possibly stacked over a batch.

    ``matrix`` has shape (..., n, n); ``eigenvalues`` are ascending.
    """

    matrix: np.ndarray
    labels: tuple = FRAME_LABELS
    eigenvalues: np.ndarray = field(default=None)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.eigenvalues is None:
            self.eigenvalues = jacobi_eigh(symmetrize(self.matrix))

    @property
    def min_eigenvalue(self):
        return self.eigenvalues[..., 0]

    def entry(self, a: str, b: str):
        i, j = self.labels.index(a), self.labels.index(b)
        return self.matrix[..., i, j]

    def __getitem__(self, idx):
        return RicciReport(self.matrix[idx], self.labels, self.eigenvalues[idx])

    def to_dict(self) -> dict:
        if self.matrix.ndim != 2:
            raise ValueError("only single-point reports serialize")
        return {
            "labels": list(self.labels),
            "matrix": self.matrix.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RicciReport":
        return cls(np.array(d["matrix"]), tuple(d["labels"]), np.array(d["eigenvalues"]))
