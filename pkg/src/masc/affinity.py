"""Gaussian affinity graph over pairwise dataset distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from masc.discrepancy import DistanceMatrix

DEFAULT_GAMMA = 10.0


@dataclass(frozen=True)
class AffinityMatrix:
    values: np.ndarray
    gamma: float
    dataset_ids: tuple[str, ...]

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dataset_ids", tuple(self.dataset_ids))

    def to_dict(self) -> dict:
        return {"dataset_ids": list(self.dataset_ids), "gamma": self.gamma, "values": self.values.tolist()}

    def to_csv(self) -> str:
        from masc.io import csv_text

        return csv_text(self.dataset_ids, [[float(v) for v in row] for row in self.values])


def to_affinity(w: DistanceMatrix, gamma: float = DEFAULT_GAMMA) -> AffinityMatrix:
    """A[i, j] = exp(-gamma * W[i, j]**2) off the diagonal, 0 on it.

    The kernel acts on the scalar distance of each pair.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    values = np.asarray(w.values, dtype=float)
    if not np.allclose(values, values.T, atol=1e-12, rtol=0):
        raise ValueError("distance matrix is not symmetric")
    a = np.exp(-gamma * values**2)
    np.fill_diagonal(a, 0.0)
    return AffinityMatrix(a, float(gamma), w.dataset_ids)
