"""MPPI planners: vanilla, CBF-shielded, and trust-region sampling.

All three share the same sampling law ``du = mu + P xi`` with ``xi`` drawn from
per-sample counter-based streams, so with no obstacles and no penalty term
they produce identical controls for identical seeds.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.stats import norm

from .barrier import DEGENERATE_ROW_NORM, CircularObstacle, ClassKappa, barrier_rows, min_h
from .conic import Infeasible, QpProblem, solve_qp, solve_trust_region_batch
from .conic._kernels import INFEASIBLE
from .dynamics import ControlAffineModel, _euler
from .rng import StepStreams

VARIANTS = ("mppi", "shielded", "trust_region")
NOT_SOLVED = -1


def covariance_factor(Sigma) -> np.ndarray:
    """Lower-triangular P with non-negative diagonal and P P^T = Sigma."""
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    try:
        return np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError:
        pass
    w, V = np.linalg.eigh((Sigma + Sigma.T) / 2)
    if w.min() < -1e-12 * max(1.0, abs(w).max()):
        raise ValueError("covariance must be positive semidefinite")
    B = V * np.sqrt(np.clip(w, 0.0, None))
    # B = L Q  <=>  B^T = Q^T L^T, so L is the transposed R factor of B^T
    _, R = np.linalg.qr(B.T)
    L = R.T
    signs = np.where(np.diag(L) < 0, -1.0, 1.0)
    L = L * signs
    L[np.abs(L) < 1e-15] = 0.0
    return np.tril(L)


@dataclass
class GaussianControlDistribution:
    mu: np.ndarray
    P: np.ndarray

    @property
    def Sigma(self) -> np.ndarray:
        return self.P @ self.P.T

    def transform(self, xi) -> np.ndarray:
        """Map standard normals (..., m) to draws from N(mu, P P^T)."""
        return _affine_draw(self.mu, self.P, xi)


def _affine_draw(mu, P, xi):
    # broadcasting keeps per-sample arithmetic identical for shared or per-sample (mu, P)
    return mu + (P * np.asarray(xi)[..., None, :]).sum(axis=-1)


@dataclass
class TrackingCost:
    """``w_p ||p_d - p||^2 + w_v (v_d - v)^2`` for a unicycle-like state."""

    target: Sequence[float]
    v_desired: float
    position_weight: float = 10.0
    velocity_weight: float = 1.0

    def __call__(self, states, controls):
        states = np.asarray(states)
        controls = np.asarray(controls)
        dx = self.target[0] - states[..., 0]
        dy = self.target[1] - states[..., 1]
        dv = self.v_desired - controls[..., 0]
        return self.position_weight * (dx * dx + dy * dy) + self.velocity_weight * dv * dv


@dataclass
class CostModel:
    state_cost: Callable
    terminal_cost: Optional[Callable] = None
    control_cost_weight: Optional[np.ndarray] = None
    penalty: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("temperature lambda must be positive")
        if self.penalty < 0:
            raise ValueError("penalty must be non-negative")
        if self.control_cost_weight is not None:
            R = np.atleast_2d(np.asarray(self.control_cost_weight, dtype=float))
            if np.linalg.eigvalsh((R + R.T) / 2).min() < -1e-12:
                raise ValueError("control cost weight must be PSD")
            self.control_cost_weight = R


@dataclass
class PlannerConfig:
    variant: str = "mppi"
    samples: int = 100
    horizon: int = 20
    dt: float = 0.05
    mu0: np.ndarray = field(default_factory=lambda: np.zeros(2))
    Sigma0: np.ndarray = field(default_factory=lambda: np.eye(2))
    trust_c: Optional[float] = None
    delta: float = 0.002
    alpha: ClassKappa = field(default_factory=ClassKappa)
    seed: int = 0
    # shielded QP only: True tightens by z*sqrt(a S a), False by the variance form c*a S a
    exact_chance: bool = True
    shared_sdp: bool = False
    workers: int = 1
    u_init: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.samples < 1 or self.horizon < 1:
            raise ValueError("samples and horizon must be at least 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        self.mu0 = np.asarray(self.mu0, dtype=float).ravel()
        self.Sigma0 = np.atleast_2d(np.asarray(self.Sigma0, dtype=float))
        if self.u_init is None:
            self.u_init = np.zeros_like(self.mu0)
        self.u_init = np.asarray(self.u_init, dtype=float)

    @property
    def quantile(self) -> float:
        return float(norm.ppf(1.0 - self.delta))

    @property
    def c(self) -> float:
        return self.quantile if self.trust_c is None else float(self.trust_c)

    @property
    def P0(self) -> np.ndarray:
        return covariance_factor(self.Sigma0)


@dataclass
class SampleBatch:
    perturbations: np.ndarray  # (K, T, m)
    trajectories: np.ndarray  # (K, T+1, n)
    costs: np.ndarray  # (K,)
    weights: np.ndarray  # (K,)
    sample_fallback: np.ndarray = None  # (K,) bool
    fallback: bool = False
    # trust-region bookkeeping, (K, T, ...) with NOT_SOLVED status where no program was solved
    sdp_status: Optional[np.ndarray] = None
    safe_mu: Optional[np.ndarray] = None
    safe_P: Optional[np.ndarray] = None
    rows_A: Optional[np.ndarray] = None
    rows_b: Optional[np.ndarray] = None
    rows_active: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.sample_fallback is None:
            self.sample_fallback = np.zeros(len(self.costs), dtype=bool)

    def safe_fraction(self, obstacles: Sequence[CircularObstacle]) -> float:
        if not obstacles:
            return 1.0
        X = self.trajectories
        ok = (min_h(obstacles, X[..., 0], X[..., 1]) >= 0).all(axis=-1)
        return float(ok.mean())


# ---------------------------------------------------------------- MPPI pieces


def cost_to_go(cost_model: CostModel, trajectory, controls, dt: float, obstacles=()) -> np.ndarray:
    """phi(x_T) + sum_t [q(x_t, u_{t-1}) + u'Ru/2 + penalty 1{x_t unsafe}] dt.

    ``trajectory`` is (..., T+1, n) and ``controls`` (..., T, m); returns (...).
    """
    X = np.asarray(trajectory, dtype=float)
    U = np.asarray(controls, dtype=float)
    Xs = X[..., 1:, :]
    q = cost_model.state_cost(Xs, U)
    if cost_model.control_cost_weight is not None:
        R = cost_model.control_cost_weight
        q = q + 0.5 * ((U @ R) * U).sum(axis=-1)
    if cost_model.penalty > 0 and len(obstacles):
        unsafe = min_h(obstacles, Xs[..., 0], Xs[..., 1]) < 0
        q = q + cost_model.penalty * unsafe
    S = q.sum(axis=-1) * dt
    if cost_model.terminal_cost is not None:
        S = S + cost_model.terminal_cost(X[..., -1, :])
    return S


def compute_weights(costs, lam: float) -> np.ndarray:
    """Normalised exp(-(S - min S) / lambda)."""
    S = np.asarray(costs, dtype=float)
    beta = S.min()
    w = np.exp(-(S - beta) / lam)
    return w / w.sum()


def update_controls(mean_controls, perturbations, weights) -> np.ndarray:
    U = np.asarray(mean_controls, dtype=float)
    dU = np.asarray(perturbations, dtype=float)
    return U + np.tensordot(np.asarray(weights, dtype=float), dU, axes=1)


def shift_horizon(mean_controls, u_init) -> np.ndarray:
    U = np.asarray(mean_controls, dtype=float)
    out = np.empty_like(U)
    out[:-1] = U[1:]
    out[-1] = u_init
    return out


def _chunks(K: int, workers: int):
    workers = max(1, min(int(workers), K))
    edges = np.linspace(0, K, workers + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _parallel_map(fn, K: int, workers: int):
    parts = _chunks(K, workers)
    if len(parts) == 1:
        return [fn(parts[0])]
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        return list(pool.map(fn, parts))


def _rollout_batch(model: ControlAffineModel, x0, U, dU, dt):
    K, T, _ = dU.shape
    X = np.empty((K, T + 1, model.state_dim))
    X[:, 0] = x0
    for t in range(T):
        X[:, t + 1] = _euler(model, X[:, t], U[t] + dU[:, t], dt)
    return X


def _finish(config, cost_model, obstacles, U, dU, X, **extra):
    V = U[None] + dU
    S = cost_to_go(cost_model, X, V, config.dt, obstacles)
    w = compute_weights(S, cost_model.lam)
    U_new = update_controls(U, dU, w)
    batch = SampleBatch(perturbations=dU, trajectories=X, costs=S, weights=w, **extra)
    return U_new[0].copy(), shift_horizon(U_new, config.u_init), batch


def plan_step_mppi(config: PlannerConfig, model, cost_model, obstacles, x0, mean_controls, rng: StepStreams):
    U = np.asarray(mean_controls, dtype=float)
    K, T, m = config.samples, U.shape[0], model.control_dim
    xi = rng.normals(K, T, m)
    mu0, P0 = config.mu0, config.P0

    def work(sl):
        dU = _affine_draw(mu0, P0, xi[sl])
        return dU, _rollout_batch(model, x0, U, dU, config.dt)

    parts = _parallel_map(work, K, config.workers)
    dU = np.concatenate([p[0] for p in parts])
    X = np.concatenate([p[1] for p in parts])
    return _finish(config, cost_model, obstacles, U, dU, X)


# ---------------------------------------------------------------- shield


def tightened_rows(config: PlannerConfig, A, b, hv):
    """Chance-tightened QP rows at one state; returns (rows, must_brake)."""
    Sigma0 = config.Sigma0
    rows = []
    for a, bj, hj in zip(A, b, hv):
        if np.linalg.norm(a) < DEGENERATE_ROW_NORM:
            if hj <= 0:
                return [], True
            continue
        var = float(a @ Sigma0 @ a)
        if config.exact_chance:
            rhs = bj + config.quantile * np.sqrt(var)
        else:
            rhs = bj + config.c * var
        rows.append((a, rhs))
    return rows, False


def plan_step_shielded(config: PlannerConfig, model, cost_model, obstacles, x0, mean_controls, rng: StepStreams):
    u_mppi, U_next, batch = plan_step_mppi(config, model, cost_model, obstacles, x0, mean_controls, rng)
    if not obstacles:
        return u_mppi, U_next, batch
    A, b, hv = barrier_rows(model, obstacles, np.asarray(x0, dtype=float), config.alpha)
    rows, brake = tightened_rows(config, A, b, hv)
    if brake:
        batch.fallback = True
        return np.zeros_like(u_mppi), U_next, batch
    try:
        u = solve_qp(QpProblem(u_mppi, rows))
    except Infeasible:
        batch.fallback = True
        return np.zeros_like(u_mppi), U_next, batch
    return u, U_next, batch


# ---------------------------------------------------------------- trust region


def _tr_rollouts(config, model, obstacles, x0, U, xi, x_shared=None):
    """Roll out samples, reshaping each step's distribution through the SDP."""
    K, T, m = xi.shape
    J = len(obstacles)
    mu0, P0, c = config.mu0, config.P0, config.c
    X = np.empty((K, T + 1, model.state_dim))
    X[:, 0] = x0
    dU = np.empty((K, T, m))
    braking = np.zeros(K, dtype=bool)
    status = np.full((K, T), NOT_SOLVED, dtype=np.int8)
    safe_mu = np.empty((K, T, m))
    safe_P = np.empty((K, T, m, m))
    rows_A = np.zeros((K, T, J, m))
    rows_b = np.zeros((K, T, J))
    rows_active = np.zeros((K, T, J), dtype=bool)
    for t in range(T):
        x = X[:, t]
        mu = np.broadcast_to(mu0, (K, m)).copy()
        P = np.broadcast_to(P0, (K, m, m)).copy()
        if J:
            at = x if x_shared is None else np.broadcast_to(x_shared[t], x.shape)
            A, b, hv = barrier_rows(model, obstacles, at, config.alpha)
            # rows constrain the total input U[t] + du, i.e. du itself against b - A U[t]
            b = b - (A * U[t]).sum(axis=-1)
            active = np.linalg.norm(A, axis=-1) >= DEGENERATE_ROW_NORM
            braking |= (~active & (hv <= 0)).any(axis=-1)
            rows_A[:, t], rows_b[:, t], rows_active[:, t] = A, b, active
            todo = ~braking & active.any(axis=-1)
            if todo.any():
                if x_shared is None:
                    mu_s, P_s, st = solve_trust_region_batch(A[todo], b[todo], active[todo], mu0, P0, c)
                else:
                    first = np.flatnonzero(todo)[0]
                    mu_1, P_1, st_1 = solve_trust_region_batch(
                        A[first : first + 1], b[first : first + 1], active[first : first + 1], mu0, P0, c
                    )
                    n_todo = int(todo.sum())
                    mu_s = np.repeat(mu_1, n_todo, axis=0)
                    P_s = np.repeat(P_1, n_todo, axis=0)
                    st = np.repeat(st_1, n_todo)
                idx = np.flatnonzero(todo)
                status[idx, t] = st
                bad = st == INFEASIBLE
                braking[idx[bad]] = True
                ok = idx[~bad]
                mu[ok] = mu_s[~bad]
                P[ok] = P_s[~bad]
        safe_mu[:, t] = mu
        safe_P[:, t] = P
        du = _affine_draw(mu, P, xi[:, t])
        du[braking] = -U[t]
        dU[:, t] = du
        X[:, t + 1] = _euler(model, x, U[t] + du, config.dt)
    return X, dU, braking, status, safe_mu, safe_P, rows_A, rows_b, rows_active


def plan_step_trust_region(config: PlannerConfig, model, cost_model, obstacles, x0, mean_controls, rng: StepStreams):
    U = np.asarray(mean_controls, dtype=float)
    K, T, m = config.samples, U.shape[0], model.control_dim
    xi = rng.normals(K, T, m)
    x_shared = None
    if config.shared_sdp:
        x_shared = _rollout_batch(model, x0, U, np.zeros((1, T, m)), config.dt)[0]

    def work(sl):
        return _tr_rollouts(config, model, obstacles, x0, U, xi[sl], x_shared)

    parts = _parallel_map(work, K, config.workers)
    X, dU, braking, status, safe_mu, safe_P, rA, rb, ract = (np.concatenate(p) for p in zip(*parts))
    return _finish(
        config, cost_model, obstacles, U, dU, X,
        sample_fallback=braking, fallback=bool(braking.any()),
        sdp_status=status, safe_mu=safe_mu, safe_P=safe_P,
        rows_A=rA, rows_b=rb, rows_active=ract,
    )


PLANNERS = {
    "mppi": plan_step_mppi,
    "shielded": plan_step_shielded,
    "trust_region": plan_step_trust_region,
}


def plan_step(config: PlannerConfig, model, cost_model, obstacles, x0, mean_controls, rng: StepStreams):
    return PLANNERS[config.variant](config, model, cost_model, obstacles, x0, mean_controls, rng)
