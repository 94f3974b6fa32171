"""Control barrier functions for circular obstacles.

A row (A, b) encodes the linearised barrier condition ``A @ u >= b`` with
``A = L_g h(x)`` and ``b = -alpha(h(x)) - L_f h(x)``.  Positions are read from
the first two state coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .dynamics import ControlAffineModel

DEGENERATE_ROW_NORM = 1e-9


@dataclass(frozen=True)
class CircularObstacle:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"obstacle radius must be positive, got {self.r}")


@dataclass(frozen=True)
class ClassKappa:
    """Extended class-K function, ``gamma * h`` or ``gamma * h**3``."""

    kind: str = "linear"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "cubic"):
            raise ValueError(f"unknown class-K kind {self.kind!r}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        if self.kind == "linear":
            return self.gamma * h
        return self.gamma * h**3


class BarrierRow(NamedTuple):
    A: np.ndarray
    b: float
    h_value: float

    @property
    def degenerate(self) -> bool:
        return bool(np.linalg.norm(self.A) < DEGENERATE_ROW_NORM)


def h(obstacle: CircularObstacle, x, y):
    """Squared-distance barrier; non-negative outside the disc."""
    return (np.asarray(x) - obstacle.cx) ** 2 + (np.asarray(y) - obstacle.cy) ** 2 - obstacle.r**2


def _grad_h(obstacle: CircularObstacle, states: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(states)
    grad[..., 0] = 2.0 * (states[..., 0] - obstacle.cx)
    grad[..., 1] = 2.0 * (states[..., 1] - obstacle.cy)
    return grad


def barrier_rows(model: ControlAffineModel, obstacles: Sequence[CircularObstacle], states, alpha: ClassKappa):
    """Batched rows for every obstacle.

    Returns ``(A, b, h)`` with shapes (..., J, m), (..., J) and (..., J).
    """
    states = np.asarray(states, dtype=float)
    G = model.input_matrix(states)
    f = model.drift(states)
    lead = states.shape[:-1]
    J = len(obstacles)
    A = np.empty(lead + (J, model.control_dim))
    b = np.empty(lead + (J,))
    hv = np.empty(lead + (J,))
    for j, obs in enumerate(obstacles):
        grad = _grad_h(obs, states)
        hj = h(obs, states[..., 0], states[..., 1])
        A[..., j, :] = (grad[..., :, None] * G).sum(axis=-2)
        b[..., j] = -alpha(hj) - (grad * f).sum(axis=-1)
        hv[..., j] = hj
    return A, b, hv


def barrier_row(model: ControlAffineModel, obstacle: CircularObstacle, state, alpha: ClassKappa) -> BarrierRow:
    A, b, hv = barrier_rows(model, [obstacle], np.asarray(state, dtype=float), alpha)
    return BarrierRow(A=A[0], b=float(b[0]), h_value=float(hv[0]))


def min_h(obstacles: Iterable[CircularObstacle], x, y):
    """Smallest barrier value over obstacles (``inf`` when there are none)."""
    out = np.full(np.shape(x), np.inf)
    for obs in obstacles:
        out = np.minimum(out, h(obs, x, y))
    return out


def safe_set_membership(obstacles: Sequence[CircularObstacle], x, y):
    return min_h(obstacles, x, y) >= 0
