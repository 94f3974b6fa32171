"""Trust-region reshaping of a Gaussian sampling distribution.

Given a reference ``N(mu0, P0 P0^T)`` and barrier rows ``A_j u >= b_j``, find
the closest ``(mu, P)`` in the cost ``||mu - mu0||_1 + ||P - P0||`` such that
every row satisfies ``A_j mu - c ||A_j P||^2 >= b_j``.  By the Schur
complement this is the block condition

    [[I, sqrt(c) (A_j P)^T], [sqrt(c) A_j P, A_j mu - b_j]] >= 0.

P is kept lower triangular with a non-negative diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from . import _kernels
from .lmi import AffineLmi, AffineMatrixMap, InequalitySdp, lift_norm_epigraph, solve_inequality_sdp

STATUS_NAMES = {
    _kernels.OPTIMAL: "optimal",
    _kernels.INFEASIBLE: "infeasible",
    _kernels.MAX_ITERATIONS: "max_iterations",
}


@dataclass
class TrustRegionSdp:
    mu0: np.ndarray
    P0: np.ndarray
    rows: List = field(default_factory=list)  # BarrierRow or (A, b) pairs
    c: float = 1.0
    norm_p: str = "frobenius"

    def __post_init__(self):
        self.mu0 = np.asarray(self.mu0, dtype=float).ravel()
        self.P0 = np.asarray(self.P0, dtype=float)
        m = self.mu0.size
        if self.P0.shape != (m, m):
            raise ValueError("P0 must be m x m")
        if np.any(np.triu(self.P0, 1) != 0) or np.any(np.diag(self.P0) < 0):
            raise ValueError("P0 must be lower triangular with non-negative diagonal")
        if not self.c > 0:
            raise ValueError("trust-region scale c must be positive")
        if self.norm_p not in ("frobenius", "spectral"):
            raise ValueError(f"unknown norm {self.norm_p!r}")

    @property
    def A(self) -> np.ndarray:
        m = self.mu0.size
        return np.array([np.asarray(r[0], dtype=float).ravel() for r in self.rows]).reshape(-1, m)

    @property
    def b(self) -> np.ndarray:
        return np.array([float(r[1]) for r in self.rows])


@dataclass
class SdpSolution:
    mu: np.ndarray
    P: np.ndarray
    cost: float
    status: str

    @property
    def Sigma(self) -> np.ndarray:
        return self.P @ self.P.T


def trust_region_cost(mu, P, mu0, P0, norm_p: str = "frobenius") -> float:
    D = np.asarray(P) - np.asarray(P0)
    pn = np.linalg.norm(D, 2) if norm_p == "spectral" else np.linalg.norm(D)
    return float(np.abs(np.asarray(mu) - np.asarray(mu0)).sum() + pn)


def schur_residuals(A, b, mu, P, c) -> np.ndarray:
    """``A_j mu - b_j - c ||A_j P||^2`` per row (non-negative when feasible)."""
    A = np.atleast_2d(A)
    AP = A @ P
    return A @ mu - np.asarray(b) - c * np.sum(AP**2, axis=1)


def schur_block(A_row, b_row, mu, P, c) -> np.ndarray:
    A_row = np.asarray(A_row, dtype=float).ravel()
    m = A_row.size
    v = np.sqrt(c) * (A_row @ P)
    M = np.eye(m + 1)
    M[:m, m] = v
    M[m, :m] = v
    M[m, m] = A_row @ mu - b_row
    return M


# ----------------------------------------------------------------- layout


def _tril_index(m):
    return [(i, k) for i in range(m) for k in range(i + 1)]


def trust_region_lmis(s: TrustRegionSdp) -> InequalitySdp:
    """The program as LMI blocks over z = [mu, vec_tril(P), s, t]."""
    m = s.mu0.size
    tri = _tril_index(m)
    npp = len(tri)
    n = 2 * m + npp + 1
    o_p, o_s, o_t = m, m + npp, m + npp + m
    c = np.zeros(n)
    c[o_s:o_t] = 1.0
    c[o_t] = 1.0
    blocks = []
    for i in range(m):
        for sign in (-1.0, 1.0):
            F = np.zeros((n, 1, 1))
            F[o_s + i] = 1.0
            F[i] = sign
            blocks.append(AffineLmi([[-sign * s.mu0[i]]], F))
    # ||P - P0|| epigraph on the lower-triangular entries
    As = np.zeros((npp, m, m))
    for q, (i, k) in enumerate(tri):
        As[q, i, k] = 1.0
    epi = lift_norm_epigraph(AffineMatrixMap(-s.P0, As), s.norm_p)
    if s.norm_p == "frobenius":
        epi = epi.as_lmi()
    F = np.zeros((n,) + epi.F0.shape)
    F[o_p : o_p + npp] = epi.F[:npp]
    F[o_t] = epi.F[npp]
    blocks.append(AffineLmi(epi.F0, F))
    for i in range(m):
        F = np.zeros((n, 1, 1))
        F[o_p + tri.index((i, i))] = 1.0
        blocks.append(AffineLmi([[0.0]], F))
    rc = np.sqrt(s.c)
    for A_row, b_row in zip(s.A, s.b):
        F0 = np.eye(m + 1)
        F0[m, m] = -b_row
        F = np.zeros((n, m + 1, m + 1))
        for i in range(m):
            F[i, m, m] = A_row[i]
        for q, (i, k) in enumerate(tri):
            # (A P)_k picks up A_i P_ik
            F[o_p + q, m, k] = F[o_p + q, k, m] = rc * A_row[i]
        blocks.append(AffineLmi(F0, F))
    return InequalitySdp(c, blocks)


def _unpack(z, m):
    tri = _tril_index(m)
    mu = z[:m].copy()
    P = np.zeros((m, m))
    for q, (i, k) in enumerate(tri):
        P[i, k] = z[m + q]
    return mu, P


# ----------------------------------------------------------------- solvers


def solve_trust_region_sdp(s: TrustRegionSdp, method: str = "auto") -> SdpSolution:
    """Solve one instance.

    ``method="kernel"`` uses the compiled Frobenius barrier solver,
    ``method="lmi"`` the generic log-det path; ``"auto"`` picks the kernel
    whenever the norm is Frobenius.
    """
    m = s.mu0.size
    A, b = s.A, s.b
    if len(b) == 0 or np.all(schur_residuals(A, b, s.mu0, s.P0, s.c) >= 0):
        return SdpSolution(s.mu0.copy(), s.P0.copy(), 0.0, "optimal")
    if method == "auto":
        method = "kernel" if s.norm_p == "frobenius" else "lmi"
    if method == "kernel":
        if s.norm_p != "frobenius":
            raise ValueError("the compiled kernel handles the Frobenius norm only")
        mu = np.empty(m)
        P = np.empty((m, m))
        st, _, _ = _kernels.solve_one(
            np.ascontiguousarray(A), b, np.ones(len(b), dtype=np.bool_), s.mu0, s.P0, float(s.c), mu, P
        )
        status = STATUS_NAMES[st]
    elif method == "lmi":
        z, status = solve_inequality_sdp(trust_region_lmis(s))
        if z is None:
            mu, P = np.full(m, np.nan), np.full((m, m), np.nan)
        else:
            mu, P = _unpack(z, m)
    else:
        raise ValueError(f"unknown method {method!r}")
    if status == "infeasible":
        return SdpSolution(mu, P, float("nan"), status)
    return SdpSolution(mu, P, trust_region_cost(mu, P, s.mu0, s.P0, s.norm_p), status)


def solve_trust_region_batch(A, b, active, mu0, P0, c: float):
    """Frobenius-norm instances sharing (mu0, P0, c).

    ``A``: (K, J, m), ``b``/``active``: (K, J).  Returns ``(mu, P, status)``
    with integer status codes from ``STATUS_NAMES``.
    """
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    active = np.ascontiguousarray(active, dtype=np.bool_)
    K, _, m = A.shape
    mu = np.empty((K, m))
    P = np.empty((K, m, m))
    status = np.empty(K, dtype=np.int8)
    _kernels.solve_batch(
        A, b, active, np.ascontiguousarray(mu0, dtype=float), np.ascontiguousarray(P0, dtype=float),
        float(c), mu, P, status,
    )
    return mu, P, status
