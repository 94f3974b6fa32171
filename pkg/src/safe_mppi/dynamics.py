"""Control-affine dynamics and explicit Euler propagation.

States and controls are plain numpy arrays with the coordinate on the last
axis, so every function here accepts a single vector or a batch of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np


class State(NamedTuple):
    x: float
    y: float
    theta: float


class ControlInput(NamedTuple):
    v: float
    omega: float


@dataclass(frozen=True)
class ControlAffineModel:
    """dx = f(x) dt + G(x) (u + noise) dt.

    ``drift`` maps states of shape (..., n) to (..., n) and ``input_matrix``
    maps them to (..., n, m).  ``u_bounds`` optionally clamps the effective
    input (after noise is added) to a box given as an (m, 2) array.
    """

    drift: Callable[[np.ndarray], np.ndarray]
    input_matrix: Callable[[np.ndarray], np.ndarray]
    state_dim: int
    control_dim: int
    noise_dim: int
    u_bounds: Optional[np.ndarray] = None


def _unicycle_drift(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(x, dtype=float))


def _unicycle_input_matrix(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    theta = x[..., 2]
    G = np.zeros(x.shape[:-1] + (3, 2))
    G[..., 0, 0] = np.cos(theta)
    G[..., 1, 0] = np.sin(theta)
    G[..., 2, 1] = 1.0
    return G


def unicycle_model(u_bounds=None) -> ControlAffineModel:
    """Driftless unicycle with state (x, y, theta) and input (v, omega)."""
    bounds = None if u_bounds is None else np.asarray(u_bounds, dtype=float).reshape(2, 2)
    return ControlAffineModel(
        drift=_unicycle_drift,
        input_matrix=_unicycle_input_matrix,
        state_dim=3,
        control_dim=2,
        noise_dim=2,
        u_bounds=bounds,
    )


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")


def step(model: ControlAffineModel, state, u, noise, dt: float) -> np.ndarray:
    """One Euler step ``x + (f(x) + G(x)(u + noise)) dt``.

    Batched inputs broadcast over leading axes.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.asarray(state, dtype=float)
    u = np.asarray(u, dtype=float)
    n = np.asarray(noise, dtype=float)
    _check_finite("state", x)
    _check_finite("control", u)
    _check_finite("noise", n)
    if u.shape[-1] != model.control_dim or n.shape[-1] != model.control_dim:
        raise ValueError(
            f"control and noise must have dimension {model.control_dim}, "
            f"got {u.shape[-1]} and {n.shape[-1]}"
        )
    return _euler(model, x, u + n, dt)


def _euler(model: ControlAffineModel, x: np.ndarray, u_eff: np.ndarray, dt: float) -> np.ndarray:
    # unchecked inner step used by the rollout hot loops
    if model.u_bounds is not None:
        u_eff = np.clip(u_eff, model.u_bounds[:, 0], model.u_bounds[:, 1])
    G = model.input_matrix(x)
    Gu = (G * u_eff[..., None, :]).sum(axis=-1)
    return x + (model.drift(x) + Gu) * dt


def rollout(model: ControlAffineModel, x0, mean_controls: Sequence, noises: Sequence, dt: float) -> np.ndarray:
    """Propagate ``x0`` through T Euler steps; returns an array of T+1 states."""
    U = np.asarray(mean_controls, dtype=float).reshape(-1, model.control_dim)
    N = np.asarray(noises, dtype=float).reshape(-1, model.control_dim)
    if len(U) != len(N):
        raise ValueError(f"got {len(U)} controls but {len(N)} noise vectors")
    x = np.asarray(x0, dtype=float)
    out = [x]
    for u, n in zip(U, N):
        x = step(model, x, u, n, dt)
        out.append(x)
    return np.array(out)
