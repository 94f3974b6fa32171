"""Inequality-form semidefinite programs ``min c @ z  s.t.  F_j(z) >= 0``.

Each block ``F_j(z) = F0 + sum_i z_i F_i`` is a small dense affine symmetric
matrix.  The solver is a plain log-det barrier method; it is the reference
path for the spectral-norm trust region and the cross-check for the compiled
Frobenius kernel.  ``to_standard_sdp`` rewrites a problem in equality form
``min C.X  s.t.  A_i.X = b_i, X >= 0`` by splitting free variables and adding
slack blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

GAP_TOL = 1e-6
NEWTON_CAP = 100
OUTER_CAP = 20


@dataclass
class AffineLmi:
    F0: np.ndarray
    F: np.ndarray  # (n, k, k)

    def __post_init__(self):
        self.F0 = np.atleast_2d(np.asarray(self.F0, dtype=float))
        k = self.F0.shape[0]
        self.F = np.asarray(self.F, dtype=float).reshape(-1, k, k)

    @property
    def size(self) -> int:
        return self.F0.shape[0]

    def __call__(self, z) -> np.ndarray:
        return self.F0 + np.tensordot(np.asarray(z, dtype=float), self.F, axes=1)


@dataclass
class SecondOrderCone:
    """``z[t_index] >= ||v0 + V z||`` for an affine vector map."""

    t_index: int
    v0: np.ndarray
    V: np.ndarray  # (n, len(v0))
    n_vars: int

    def as_lmi(self) -> AffineLmi:
        # arrow matrix [[t, v^T], [v, t I]] is PSD iff t >= ||v||
        q = self.v0.size
        F0 = np.zeros((q + 1, q + 1))
        F0[0, 1:] = F0[1:, 0] = self.v0
        F = np.zeros((self.n_vars, q + 1, q + 1))
        for i in range(self.n_vars):
            F[i, 0, 1:] = F[i, 1:, 0] = self.V[i]
        F[self.t_index] += np.eye(q + 1)
        return AffineLmi(F0, F)


@dataclass
class AffineMatrixMap:
    """A(x) = A0 + sum_i x_i A_i with A0 of shape (p, q)."""

    A0: np.ndarray
    As: np.ndarray  # (n, p, q)

    def __post_init__(self):
        self.A0 = np.atleast_2d(np.asarray(self.A0, dtype=float))
        self.As = np.asarray(self.As, dtype=float).reshape((-1,) + self.A0.shape)

    @property
    def n_vars(self) -> int:
        return self.As.shape[0]


@dataclass
class InequalitySdp:
    c: np.ndarray
    blocks: List[AffineLmi] = field(default_factory=list)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()


@dataclass
class StandardSdp:
    """``min C.X + offset  s.t.  A_i.X = b_i,  X >= 0`` with block layout."""

    C: np.ndarray
    A: np.ndarray  # (p, N, N)
    b: np.ndarray
    offset: float
    n_vars: int
    block_sizes: List[int]

    def recover(self, X: np.ndarray) -> np.ndarray:
        """Inequality-form variables from a standard-form solution."""
        n = self.n_vars
        d = np.diag(X)
        return d[:n] - d[n : 2 * n]


def lift_norm_epigraph(Amap: AffineMatrixMap, norm_p: str = "spectral"):
    """Epigraph ``t >= ||A(x)||`` over variables ``(x, t)``.

    Spectral: the LMI [[t I, A(x)], [A(x)^T, t I]] >= 0.  Frobenius: the
    equivalent second-order cone on vec(A(x)).
    """
    n = Amap.n_vars
    p, q = Amap.A0.shape
    if norm_p == "spectral":
        k = p + q
        F0 = np.zeros((k, k))
        F0[:p, p:] = Amap.A0
        F0[p:, :p] = Amap.A0.T
        F = np.zeros((n + 1, k, k))
        for i in range(n):
            F[i, :p, p:] = Amap.As[i]
            F[i, p:, :p] = Amap.As[i].T
        F[n] = np.eye(k)
        return AffineLmi(F0, F)
    if norm_p == "frobenius":
        V = np.zeros((n + 1, p * q))
        V[:n] = Amap.As.reshape(n, p * q)
        return SecondOrderCone(t_index=n, v0=Amap.A0.ravel().copy(), V=V, n_vars=n + 1)
    raise ValueError(f"unknown norm {norm_p!r}")


def _barrier_terms(blocks, z, n):
    """Value, gradient and Hessian of -sum log det F_j(z); None outside domain."""
    val = 0.0
    g = np.zeros(n)
    H = np.zeros((n, n))
    for blk in blocks:
        M = blk(z)
        try:
            L = np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            return None
        val -= 2.0 * np.sum(np.log(np.diag(L)))
        # W_i = L^{-1} F_i L^{-T}
        Linv = np.linalg.inv(L)
        W = Linv @ blk.F @ Linv.T
        g -= np.trace(W, axis1=1, axis2=2)
        Wf = W.reshape(n, -1)
        H += Wf @ Wf.T
    return val, g, H


def _value(blocks, z):
    val = 0.0
    for blk in blocks:
        try:
            L = np.linalg.cholesky(blk(z))
        except np.linalg.LinAlgError:
            return np.inf
        val -= 2.0 * np.sum(np.log(np.diag(L)))
    return val


def _centre(c, blocks, z, tb, newton_cap, stop=None):
    n = z.size
    for _ in range(newton_cap):
        terms = _barrier_terms(blocks, z, n)
        val, g, H = terms
        g = tb * c + g
        try:
            dz = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            return z, True
        lam2 = -g @ dz
        if lam2 / 2 <= 1e-10:
            return z, True
        f0 = tb * c @ z + val
        s = 1.0
        while s > 1e-16:
            zt = z + s * dz
            f1 = tb * c @ zt + _value(blocks, zt)
            if f1 <= f0 - 0.25 * s * lam2:
                break
            s *= 0.5
        else:
            return z, True
        z = zt
        if f1 >= f0:
            # no decrease representable at this barrier weight: centred to precision
            return z, True
        if stop is not None and stop(z):
            return z, True
    return z, False


def _is_interior(blocks, z):
    return np.isfinite(_value(blocks, z))


def find_interior_point(blocks: List[AffineLmi], n: int, z0=None, box: float = 1e4) -> Optional[np.ndarray]:
    """Phase 1: minimise s subject to F_j(z) + s I >= 0 within a box."""
    z0 = np.zeros(n) if z0 is None else np.asarray(z0, dtype=float)
    if _is_interior(blocks, z0):
        return z0
    worst = min(np.linalg.eigvalsh(blk(z0))[0] for blk in blocks)
    aug = []
    for blk in blocks:
        F = np.concatenate([blk.F, np.eye(blk.size)[None]], axis=0)
        aug.append(AffineLmi(blk.F0, F))
    for i in range(n):
        e = np.zeros(n + 1)
        e[i] = 1.0
        aug.append(AffineLmi([[box]], -e))
        aug.append(AffineLmi([[box]], e))
    floor = np.zeros(n + 1)
    floor[n] = 1.0
    aug.append(AffineLmi([[1.0]], floor))  # s >= -1 keeps phase 1 bounded
    c = np.zeros(n + 1)
    c[n] = 1.0
    y = np.concatenate([z0, [1.0 - worst]])
    nu = sum(b.size for b in aug)
    tb = 1.0
    for _ in range(2 * OUTER_CAP):
        y, _ = _centre(c, aug, y, tb, NEWTON_CAP, stop=lambda v: v[n] < 0)
        if y[n] < 0:
            return y[:n]
        if nu / tb < 1e-10:
            return None
        tb *= 10.0
    return None


def solve_inequality_sdp(problem: InequalitySdp, z0=None, gap_tol: float = GAP_TOL):
    """Barrier method; returns ``(z, status)`` with status in
    {"optimal", "infeasible", "max_iterations"}."""
    n = problem.c.size
    z = find_interior_point(problem.blocks, n, z0)
    if z is None:
        return None, "infeasible"
    nu = sum(b.size for b in problem.blocks)
    tb = 1.0
    for _ in range(OUTER_CAP):
        z, ok = _centre(problem.c, problem.blocks, z, tb, NEWTON_CAP)
        if not ok:
            return z, "max_iterations"
        if nu / tb <= gap_tol:
            return z, "optimal"
        tb *= 10.0
    return z, "max_iterations"


def to_standard_sdp(problem: InequalitySdp) -> StandardSdp:
    """Equality form via z = z_plus - z_minus and one slack block per LMI.

    Each block contributes ``sum_i z_i (-F_i) + S_j = F0`` entrywise over its
    upper triangle, i.e. the inequality form ``sum z_i A_i <= B`` with
    ``A_i = -F_i`` and ``B = F0``.
    """
    n = problem.c.size
    sizes = [n, n] + [blk.size for blk in problem.blocks]
    N = sum(sizes)
    C = np.zeros((N, N))
    C[np.arange(n), np.arange(n)] = problem.c
    C[np.arange(n, 2 * n), np.arange(n, 2 * n)] = -problem.c
    rows_A, rows_b = [], []
    off = 2 * n
    for blk in problem.blocks:
        k = blk.size
        for p in range(k):
            for q in range(p, k):
                M = np.zeros((N, N))
                for i in range(n):
                    coef = -blk.F[i, p, q]
                    M[i, i] += coef
                    M[n + i, n + i] -= coef
                if p == q:
                    M[off + p, off + p] = 1.0
                else:
                    M[off + p, off + q] = M[off + q, off + p] = 0.5
                rows_A.append(M)
                rows_b.append(blk.F0[p, q])
        off += k
    return StandardSdp(
        C=C,
        A=np.array(rows_A).reshape(-1, N, N),
        b=np.array(rows_b),
        offset=0.0,
        n_vars=n,
        block_sizes=sizes,
    )
