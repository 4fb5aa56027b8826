"""Local contact space: the linear cone J q >= c stacked from contact planes,
with redundant-row repair keeping the plane Gram matrix positive definite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .proximity import ContactFeature, DEFAULT_FEATURE_CAP

# A row is redundant when appending it drops the smallest Cholesky pivot of
# J J^T below this (rows are unit-norm).
PIVOT_TOL = 1e-10


@dataclass
class LocalContactSpace:
    """Cone J q >= c around a contact placement.

    `features` is the source feature list (what the projection was built
    from, and what contact counting reports); J holds only the independent
    rows that survived repair.
    """

    J: np.ndarray
    c: np.ndarray
    features: list[ContactFeature]
    kept: list[int] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.J.shape[0]

    def gram(self) -> np.ndarray:
        return self.J @ self.J.T


def _min_pivot(g: np.ndarray) -> float:
    try:
        l = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        return -1.0
    return float((np.diag(l) ** 2).min())


def build_lcs(features: list[ContactFeature],
              feature_cap: int = DEFAULT_FEATURE_CAP,
              pivot_tol: float = PIVOT_TOL) -> LocalContactSpace:
    """Stack contact planes in their given (distance-sorted) order, greedily
    dropping rows that would make the Gram matrix lose positive definiteness."""
    if not features:
        raise ValueError("cannot build a contact space from zero features")
    features = list(features[:feature_cap])
    rows: list[np.ndarray] = []
    biases: list[float] = []
    kept: list[int] = []
    for i, f in enumerate(features):
        j = np.asarray(f.plane_row, dtype=np.float64)
        nrm = float(np.linalg.norm(j))
        if nrm == 0.0:
            continue
        cand = np.array(rows + [j / nrm])
        if _min_pivot(cand @ cand.T) < pivot_tol:
            continue
        rows.append(j / nrm)
        biases.append(float(f.plane_bias) / nrm)
        kept.append(i)
    if not rows:
        raise ValueError("all candidate planes were degenerate or redundant")
    return LocalContactSpace(J=np.array(rows), c=np.array(biases),
                             features=features, kept=kept)
