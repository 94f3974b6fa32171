"""Projection QP ``min ||u - center||^2  s.t.  a_i @ u >= rhs_i``.

Problems here have m <= 2 controls and a handful of rows, so the KKT point is
found exactly by enumerating candidate active sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


class Infeasible(Exception):
    """The constraint set is empty."""


@dataclass
class QpProblem:
    objective_center: np.ndarray
    rows: list = field(default_factory=list)

    def __post_init__(self):
        self.objective_center = np.asarray(self.objective_center, dtype=float).ravel()
        if self.objective_center.size < 1:
            raise ValueError("QP needs at least one variable")
        rows = []
        for a, rhs in self.rows:
            a = np.asarray(a, dtype=float).ravel()
            if a.shape != self.objective_center.shape:
                raise ValueError("row dimension does not match the objective center")
            rows.append((a, float(rhs)))
        self.rows = rows
        if not np.all(np.isfinite(self.objective_center)) or not all(
            np.all(np.isfinite(a)) and np.isfinite(r) for a, r in rows
        ):
            raise ValueError("QP data must be finite")


def solve_qp(p: QpProblem, tol: float = 1e-10) -> np.ndarray:
    c = p.objective_center
    if not p.rows:
        return c.copy()
    A = np.array([a for a, _ in p.rows])
    r = np.array([rhs for _, rhs in p.rows])
    scale = max(1.0, float(np.abs(r).max()), float(np.abs(A).max()))

    def feasible(u):
        return bool(np.all(A @ u - r >= -tol * scale))

    if feasible(c):
        return c.copy()

    best, best_val = None, np.inf
    m = c.size
    for k in range(1, min(m, len(r)) + 1):
        for S in combinations(range(len(r)), k):
            AS = A[list(S)]
            gram = AS @ AS.T
            if abs(np.linalg.det(gram)) < 1e-14 * max(1.0, np.abs(gram).max()) ** k:
                continue
            lam = np.linalg.solve(gram, r[list(S)] - AS @ c)
            if np.any(lam < -tol * scale):
                continue
            u = c + AS.T @ lam
            if not feasible(u):
                continue
            val = float(np.sum((u - c) ** 2))
            if val < best_val:
                best, best_val = u, val
    if best is None:
        raise Infeasible("QP constraint polyhedron is empty")
    return best
