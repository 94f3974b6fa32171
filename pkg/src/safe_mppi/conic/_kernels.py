"""Compiled log-barrier interior-point kernel for the trust-region program

    min  ||mu - mu0||_1 + ||P - P0||_F
    s.t. A_j mu - c ||A_j P||^2 >= b_j        (one per active row)
         P lower triangular, diag(P) >= 0

Variables are packed as z = [mu (m), p (m(m+1)/2, row-major lower triangle),
s (m), t] with s_i >= |mu_i - mu0_i| and t >= ||p - p0||.  The barrier of each
row is -log(A_j mu - b_j - c ||A_j P||^2), which equals minus the log
determinant of the (m+1)x(m+1) Schur block [[I, sqrt(c) (A_j P)^T],
[sqrt(c) A_j P, A_j mu - b_j]].
"""

from math import log, sqrt

import numpy as np
from numba import njit

OPTIMAL = 0
INFEASIBLE = 1
MAX_ITERATIONS = 2

GAP_TOL = 1e-6
NEWTON_CAP = 100
OUTER_CAP = 20
BARRIER_GROWTH = 10.0
TB0 = 1.0
_NEWTON_EPS = 1e-10
_LS_ALPHA = 0.25
_LS_BETA = 0.5
_PHASE1_BOX = 1e6


@njit(cache=True, nogil=True)
def _chol_solve(H, g, n, L, out):
    """Solve H out = -g by Cholesky; False if H is not numerically PD."""
    for j in range(n):
        s = H[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if s <= 0.0:
            return False
        L[j, j] = sqrt(s)
        for i in range(j + 1, n):
            s = H[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / L[j, j]
    for i in range(n):
        s = -g[i]
        for k in range(i):
            s -= L[i, k] * out[k]
        out[i] = s / L[i, i]
    for i in range(n - 1, -1, -1):
        s = out[i]
        for k in range(i + 1, n):
            s -= L[k, i] * out[k]
        out[i] = s / L[i, i]
    return True


# ---------------------------------------------------------------- phase 1
# maximise sigma s.t. A_j mu - b_j >= sigma, |mu_i - mu0_i| <= box


@njit(cache=True, nogil=True)
def _p1_value(y, tb, A, b, rows, nr, m, mu0):
    sig = y[m]
    f = -tb * sig
    for r in range(nr):
        j = rows[r]
        g = -b[j] - sig
        for i in range(m):
            g += A[j, i] * y[i]
        if g <= 0.0:
            return np.inf
        f -= log(g)
    for i in range(m):
        d = y[i] - mu0[i]
        u1 = _PHASE1_BOX - d
        u2 = _PHASE1_BOX + d
        if u1 <= 0.0 or u2 <= 0.0:
            return np.inf
        f -= log(u1) + log(u2)
    return f


@njit(cache=True, nogil=True)
def _p1_derivs(y, tb, A, b, rows, nr, m, mu0, g, H):
    n = m + 1
    for i in range(n):
        g[i] = 0.0
        for k in range(n):
            H[i, k] = 0.0
    g[m] = -tb
    sig = y[m]
    for r in range(nr):
        j = rows[r]
        val = -b[j] - sig
        for i in range(m):
            val += A[j, i] * y[i]
        inv = 1.0 / val
        for i in range(m):
            g[i] -= A[j, i] * inv
        g[m] += inv
        inv2 = inv * inv
        for i in range(m):
            for k in range(m):
                H[i, k] += A[j, i] * A[j, k] * inv2
            H[i, m] -= A[j, i] * inv2
            H[m, i] -= A[j, i] * inv2
        H[m, m] += inv2
    for i in range(m):
        d = y[i] - mu0[i]
        i1 = 1.0 / (_PHASE1_BOX - d)
        i2 = 1.0 / (_PHASE1_BOX + d)
        g[i] += i1 - i2
        H[i, i] += i1 * i1 + i2 * i2


@njit(cache=True, nogil=True)
def _phase1(A, b, rows, nr, m, mu0, mu_out):
    """Find mu with A_j mu > b_j for every active row; False if none exists."""
    n = m + 1
    y = np.empty(n)
    for i in range(m):
        y[i] = mu0[i]
    worst = np.inf
    scale = 1.0
    for r in range(nr):
        j = rows[r]
        val = -b[j]
        for i in range(m):
            val += A[j, i] * mu0[i]
        worst = min(worst, val)
        scale = max(scale, abs(b[j]))
    if worst > 0.0:
        for i in range(m):
            mu_out[i] = mu0[i]
        return True
    y[m] = worst - 1.0
    g = np.empty(n)
    H = np.empty((n, n))
    L = np.zeros((n, n))
    dy = np.empty(n)
    yt = np.empty(n)
    nu = nr + 2.0 * m
    tb = 1.0 / scale
    for _outer in range(OUTER_CAP * 2):
        for _it in range(NEWTON_CAP):
            _p1_derivs(y, tb, A, b, rows, nr, m, mu0, g, H)
            if not _chol_solve(H, g, n, L, dy):
                break
            lam2 = 0.0
            for i in range(n):
                lam2 -= g[i] * dy[i]
            if lam2 * 0.5 <= _NEWTON_EPS:
                break
            f0 = _p1_value(y, tb, A, b, rows, nr, m, mu0)
            step = 1.0
            while True:
                for i in range(n):
                    yt[i] = y[i] + step * dy[i]
                f1 = _p1_value(yt, tb, A, b, rows, nr, m, mu0)
                if f1 <= f0 - _LS_ALPHA * step * lam2:
                    break
                step *= _LS_BETA
                if step < 1e-14:
                    break
            if step < 1e-14:
                break
            for i in range(n):
                y[i] = yt[i]
            if y[m] > 0.0 or f1 >= f0:
                break
        if y[m] > 0.0:
            for i in range(m):
                mu_out[i] = y[i]
            return True
        if nu / tb < 1e-10 * scale:
            break
        tb *= BARRIER_GROWTH
    return False


# ---------------------------------------------------------------- phase 2
# Reduced layout: only mean components and factor entries that some active
# row touches are free; everything else stays at the reference, which is
# optimal because the cost is minimised there and no row depends on it.
# z = [mu_r (nm), p_r (npp), s (nm), t]


@njit(cache=True, nogil=True)
def _row_value(z, A, b, j, nm, npp, mi, pi, pk, c, vk, m):
    o_p = nm
    gv = -b[j]
    for a in range(nm):
        gv += A[j, mi[a]] * z[a]
    for k in range(m):
        vk[k] = 0.0
    for q in range(npp):
        vk[pk[q]] += A[j, pi[q]] * z[o_p + q]
    for k in range(m):
        gv -= c * vk[k] * vk[k]
    return gv


@njit(cache=True, nogil=True)
def _p2_value(z, tb, A, b, rows, nr, nm, npp, mi, pi, pk, dq, mu0, p0, c, vk, m):
    o_p = nm
    o_s = nm + npp
    o_t = nm + npp + nm
    t = z[o_t]
    f = 0.0
    for a in range(nm):
        f += z[o_s + a]
    f = tb * (f + t)
    for a in range(nm):
        d = z[a] - mu0[mi[a]]
        u1 = z[o_s + a] - d
        u2 = z[o_s + a] + d
        if u1 <= 0.0 or u2 <= 0.0:
            return np.inf
        f -= log(u1) + log(u2)
    w = t * t
    for q in range(npp):
        e = z[o_p + q] - p0[q]
        w -= e * e
    if t <= 0.0 or w <= 0.0:
        return np.inf
    f -= log(w)
    for d in range(dq.shape[0]):
        pv = z[o_p + dq[d]]
        if pv <= 0.0:
            return np.inf
        f -= log(pv)
    for r in range(nr):
        gv = _row_value(z, A, b, rows[r], nm, npp, mi, pi, pk, c, vk, m)
        if gv <= 0.0:
            return np.inf
        f -= log(gv)
    return f


@njit(cache=True, nogil=True)
def _p2_derivs(z, tb, A, b, rows, nr, nm, npp, mi, pi, pk, dq, mu0, p0, c, g, H, grad_row, vk, m):
    n = 2 * nm + npp + 1
    o_p = nm
    o_s = nm + npp
    o_t = nm + npp + nm
    for i in range(n):
        g[i] = 0.0
        for k in range(n):
            H[i, k] = 0.0
    for a in range(nm):
        g[o_s + a] = tb
    g[o_t] = tb
    # l1 epigraph pairs
    for a in range(nm):
        d = z[a] - mu0[mi[a]]
        i1 = 1.0 / (z[o_s + a] - d)
        i2 = 1.0 / (z[o_s + a] + d)
        g[o_s + a] += -i1 - i2
        g[a] += i1 - i2
        h1 = i1 * i1 + i2 * i2
        h2 = -i1 * i1 + i2 * i2
        H[o_s + a, o_s + a] += h1
        H[a, a] += h1
        H[o_s + a, a] += h2
        H[a, o_s + a] += h2
    # second-order cone t >= ||p - p0||
    t = z[o_t]
    w = t * t
    for q in range(npp):
        e = z[o_p + q] - p0[q]
        w -= e * e
    iw = 1.0 / w
    iw2 = iw * iw
    g[o_t] += -2.0 * t * iw
    H[o_t, o_t] += 4.0 * t * t * iw2 - 2.0 * iw
    for q in range(npp):
        eq = z[o_p + q] - p0[q]
        g[o_p + q] += 2.0 * eq * iw
        cross = -4.0 * t * eq * iw2
        H[o_t, o_p + q] += cross
        H[o_p + q, o_t] += cross
        for r in range(npp):
            H[o_p + q, o_p + r] += 4.0 * eq * (z[o_p + r] - p0[r]) * iw2
        H[o_p + q, o_p + q] += 2.0 * iw
    # positive diagonal of P
    for d in range(dq.shape[0]):
        q = o_p + dq[d]
        inv = 1.0 / z[q]
        g[q] -= inv
        H[q, q] += inv * inv
    # barrier rows
    nv = nm + npp
    for r in range(nr):
        j = rows[r]
        gv = _row_value(z, A, b, j, nm, npp, mi, pi, pk, c, vk, m)
        inv = 1.0 / gv
        inv2 = inv * inv
        for a in range(nm):
            grad_row[a] = A[j, mi[a]]
        for q in range(npp):
            grad_row[o_p + q] = -2.0 * c * vk[pk[q]] * A[j, pi[q]]
        for q in range(nv):
            gq = grad_row[q]
            g[q] -= gq * inv
            if gq != 0.0:
                for r2 in range(nv):
                    H[q, r2] += gq * grad_row[r2] * inv2
        for q in range(npp):
            for r2 in range(npp):
                if pk[q] == pk[r2]:
                    H[o_p + q, o_p + r2] += 2.0 * c * A[j, pi[q]] * A[j, pi[r2]] * inv


@njit(cache=True, nogil=True)
def _row_slack(A, b, j, m, mu, P, c):
    gv = -b[j]
    for i in range(m):
        gv += A[j, i] * mu[i]
    for k in range(m):
        v = 0.0
        for i in range(k, m):
            v += A[j, i] * P[i, k]
        gv -= c * v * v
    return gv


@njit(cache=True, nogil=True)
def solve_one(A, b, active, mu0, P0, c, mu_out, P_out):
    """Solve one instance; returns (status, outer iterations, newton steps)."""
    m = mu0.shape[0]
    J = A.shape[0]
    rows = np.empty(J, dtype=np.int64)
    nr = 0
    for j in range(J):
        if active[j]:
            rows[nr] = j
            nr += 1
    for i in range(m):
        mu_out[i] = mu0[i]
        for k in range(m):
            P_out[i, k] = P0[i, k]
    feasible0 = True
    for r in range(nr):
        if _row_slack(A, b, rows[r], m, mu0, P0, c) < 0.0:
            feasible0 = False
            break
    if feasible0:
        return OPTIMAL, 0, 0

    used = np.zeros(m, dtype=np.bool_)
    for r in range(nr):
        for i in range(m):
            if A[rows[r], i] != 0.0:
                used[i] = True
    nm = 0
    mi = np.empty(m, dtype=np.int64)
    for i in range(m):
        if used[i]:
            mi[nm] = i
            nm += 1
    mi = mi[:nm]
    npp = 0
    for a in range(nm):
        npp += mi[a] + 1
    pi = np.empty(npp, dtype=np.int64)
    pk = np.empty(npp, dtype=np.int64)
    p0 = np.empty(npp)
    dq = np.empty(nm, dtype=np.int64)
    q = 0
    for a in range(nm):
        i = mi[a]
        for k in range(i + 1):
            pi[q] = i
            pk[q] = k
            p0[q] = P0[i, k]
            if k == i:
                dq[a] = q
            q += 1

    mu_start = np.empty(m)
    if not _phase1(A, b, rows, nr, m, mu0, mu_start):
        for i in range(m):
            mu_out[i] = np.nan
            for k in range(m):
                P_out[i, k] = np.nan
        return INFEASIBLE, 0, 0

    # interior start: used factor rows scaled to eps keep every row strictly feasible
    eps = 1.0
    for r in range(nr):
        j = rows[r]
        slack = -b[j]
        an = 0.0
        for i in range(m):
            slack += A[j, i] * mu_start[i]
            an += A[j, i] * A[j, i]
        if an > 0.0:
            eps = min(eps, sqrt(0.5 * slack / (c * an)))
    n = 2 * nm + npp + 1
    o_p = nm
    o_s = nm + npp
    o_t = nm + npp + nm
    z = np.zeros(n)
    for a in range(nm):
        z[a] = mu_start[mi[a]]
        z[o_p + dq[a]] = eps
        z[o_s + a] = abs(mu_start[mi[a]] - mu0[mi[a]]) + 1.0
    en = 0.0
    for q in range(npp):
        e = z[o_p + q] - p0[q]
        en += e * e
    z[o_t] = sqrt(en) + 1.0

    g = np.empty(n)
    H = np.empty((n, n))
    L = np.zeros((n, n))
    dz = np.empty(n)
    zt = np.empty(n)
    grad_row = np.empty(n)
    vk = np.empty(m)
    nu = 3.0 * nm + 2.0 + nr
    tb = TB0
    newton_total = 0
    status = MAX_ITERATIONS
    outer = 0
    for outer in range(1, OUTER_CAP + 1):
        converged = False
        f0 = _p2_value(z, tb, A, b, rows, nr, nm, npp, mi, pi, pk, dq, mu0, p0, c, vk, m)
        for _it in range(NEWTON_CAP):
            _p2_derivs(z, tb, A, b, rows, nr, nm, npp, mi, pi, pk, dq, mu0, p0, c, g, H, grad_row, vk, m)
            if not _chol_solve(H, g, n, L, dz):
                converged = True
                break
            lam2 = 0.0
            for i in range(n):
                lam2 -= g[i] * dz[i]
            if lam2 * 0.5 <= _NEWTON_EPS:
                converged = True
                break
            newton_total += 1
            step = 1.0
            while True:
                for i in range(n):
                    zt[i] = z[i] + step * dz[i]
                f1 = _p2_value(zt, tb, A, b, rows, nr, nm, npp, mi, pi, pk, dq, mu0, p0, c, vk, m)
                if f1 <= f0 - _LS_ALPHA * step * lam2:
                    break
                step *= _LS_BETA
                if step < 1e-16:
                    break
            if step < 1e-16:
                converged = True
                break
            for i in range(n):
                z[i] = zt[i]
            if f1 >= f0:
                # the decrement is below the resolution of f at this barrier weight
                converged = True
                break
            f0 = f1
        if not converged:
            break
        if nu / tb <= GAP_TOL:
            status = OPTIMAL
            break
        tb *= BARRIER_GROWTH

    for a in range(nm):
        mu_out[mi[a]] = z[a]
    for q in range(npp):
        P_out[pi[q], pk[q]] = z[o_p + q]
    return status, outer, newton_total


@njit(cache=True, nogil=True)
def solve_batch(A, b, active, mu0, P0, c, mu_out, P_out, status_out):
    """Solve K independent instances; A has shape (K, J, m)."""
    K = A.shape[0]
    for k in range(K):
        st, _o, _n = solve_one(A[k], b[k], active[k], mu0, P0, c, mu_out[k], P_out[k])
        status_out[k] = st
