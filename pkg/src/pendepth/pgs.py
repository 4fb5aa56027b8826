"""Projected Gauss-Seidel solver for the contact projection.

Finds the least-norm translation satisfying the cone J q >= c by solving
the complementarity system over multipliers lambda:

    w = (1/4) J J^T lambda - c >= 0,   lambda >= 0,   lambda^T w = 0

then q = (1/4) J^T lambda. Componentwise sweeps clamp negative multipliers
to zero; the sweep objective is monotone for positive-semidefinite Gram
matrices, so the iteration converges whenever the cone is feasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lcs import LocalContactSpace

MAX_SWEEPS = 200


class NonSpdError(ValueError):
    """The Gram matrix is unusable (asymmetric or nonpositive diagonal)."""


@dataclass
class PgsSolution:
    lam: np.ndarray
    q: np.ndarray
    iterations: int
    residual: float
    converged: bool


def default_tol(c: np.ndarray) -> float:
    return 1e-10 * (1.0 + (float(np.abs(c).max()) if len(c) else 0.0))


def solve_lcp(g: np.ndarray, c: np.ndarray, tol: float | None = None,
              max_sweeps: int = MAX_SWEEPS):
    """Sweep the multipliers of the scaled complementarity system.

    Returns (lam, sweeps, residual, converged). `g` must be symmetric with a
    strictly positive diagonal (unit plane rows guarantee this).
    """
    g = np.asarray(g, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    n = g.shape[0]
    if g.shape != (n, n) or not np.allclose(g, g.T, atol=1e-9):
        raise NonSpdError("Gram matrix is not symmetric")
    diag = np.diag(g)
    if n and diag.min() <= 0.0:
        raise NonSpdError("Gram matrix has a nonpositive diagonal entry")
    if tol is None:
        tol = default_tol(c)
    lam = np.zeros(n)
    residual = np.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for i in range(n):
            lam[i] = max(0.0, lam[i] + (4.0 * c[i] - float(g[i] @ lam)) / diag[i])
        w = 0.25 * (g @ lam) - c
        residual = max(float(np.maximum(-w, 0.0).max(initial=0.0)),
                       float(np.abs(lam * w).max(initial=0.0)))
        if residual <= tol:
            return lam, sweeps, residual, True
    return lam, sweeps, residual, False


def solve(space: LocalContactSpace, tol: float | None = None,
          max_sweeps: int = MAX_SWEEPS) -> PgsSolution:
    """Least-norm translation onto the cone: q = (1/4) J^T lambda."""
    g = space.gram()
    lam, sweeps, residual, converged = solve_lcp(g, space.c, tol, max_sweeps)
    q = 0.25 * (space.J.T @ lam)
    return PgsSolution(lam=lam, q=q, iterations=sweeps,
                       residual=residual, converged=converged)
