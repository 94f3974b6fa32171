"""Receding-horizon episode loop and per-step records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..barrier import min_h
from ..controller import PlannerConfig, SampleBatch, plan_step
from ..dynamics import step as dynamics_step
from ..dynamics import unicycle_model
from ..rng import StepStreams
from .scenarios import Scenario, ScenarioParams


@dataclass
class StepRow:
    step: int
    t: float
    x: float
    y: float
    theta: float
    v: float
    omega: float
    q: float
    min_h: float
    safe_frac: float
    fallback: bool


@dataclass
class SnapshotRecord:
    time: float
    step: int
    trajectories: np.ndarray  # (K, T+1, n)
    costs: np.ndarray  # (K,)
    safe: np.ndarray  # (K,) bool

    @property
    def safe_fraction(self) -> float:
        return float(self.safe.mean()) if len(self.safe) else 1.0


@dataclass
class EpisodeRecord:
    rows: List[StepRow] = field(default_factory=list)
    completed: bool = False
    start_min_h: float = float("inf")
    snapshot: Optional[SnapshotRecord] = None
    seed: int = 0
    variant: str = ""
    samples: int = 0

    @property
    def steps(self) -> int:
        return len(self.rows)

    def total_cost(self, dt: float) -> float:
        return float(sum(r.q for r in self.rows) * dt)

    @property
    def min_h(self) -> float:
        return float(min([self.start_min_h] + [r.min_h for r in self.rows]))

    @property
    def violations(self) -> int:
        return sum(1 for r in self.rows if r.min_h < 0)

    @property
    def fallbacks(self) -> int:
        return sum(1 for r in self.rows if r.fallback)

    @property
    def mean_safe_fraction(self) -> float:
        return float(np.mean([r.safe_frac for r in self.rows])) if self.rows else 1.0

    def summary(self, dt: float) -> dict:
        return {
            "variant": self.variant,
            "samples": self.samples,
            "seed": self.seed,
            "completed": self.completed,
            "steps": self.steps,
            "total_cost": self.total_cost(dt),
            "min_h": self.min_h,
            "violations": self.violations,
            "fallbacks": self.fallbacks,
            "mean_safe_frac": self.mean_safe_fraction,
        }


def capture_snapshot(batch: SampleBatch, obstacles, time: float = 0.0, step: int = 0) -> SnapshotRecord:
    X = batch.trajectories
    if len(obstacles):
        safe = (min_h(obstacles, X[..., 0], X[..., 1]) >= 0).all(axis=-1)
    else:
        safe = np.ones(X.shape[0], dtype=bool)
    return SnapshotRecord(time=time, step=step, trajectories=X.copy(), costs=np.asarray(batch.costs).copy(), safe=safe)


def run_episode(
    scenario: Scenario,
    config: PlannerConfig,
    params: ScenarioParams,
    snapshot_step: Optional[int] = None,
    model=None,
) -> EpisodeRecord:
    """Plan, apply the first control with execution noise, repeat until the goal."""
    model = unicycle_model() if model is None else model
    cost_model = params.cost_model(scenario, config.variant)
    snapshot_step = params.snapshot_step if snapshot_step is None else snapshot_step
    obstacles = list(scenario.obstacles)
    P0 = config.P0
    zero = np.zeros(model.control_dim)
    x = np.array(scenario.start, dtype=float)
    U = np.tile(config.u_init, (config.horizon, 1))
    rec = EpisodeRecord(seed=config.seed, variant=config.variant, samples=config.samples)
    rec.start_min_h = float(min_h(obstacles, x[0], x[1]))
    if scenario.distance_to_target(x) <= scenario.goal_tolerance:
        rec.completed = True
        return rec
    for k in range(scenario.max_steps):
        rng = StepStreams(config.seed, k)
        u, U, batch = plan_step(config, model, cost_model, obstacles, x, U, rng)
        if k == snapshot_step:
            rec.snapshot = capture_snapshot(batch, obstacles, time=k * config.dt, step=k)
        noise = rng.execution_noise(zero, P0)
        x = dynamics_step(model, x, u, noise, config.dt)
        q = float(cost_model.state_cost(x, u))
        rec.rows.append(
            StepRow(
                step=k + 1,
                t=(k + 1) * config.dt,
                x=float(x[0]),
                y=float(x[1]),
                theta=float(x[2]),
                v=float(u[0]),
                omega=float(u[1]),
                q=q,
                min_h=float(min_h(obstacles, x[0], x[1])),
                safe_frac=batch.safe_fraction(obstacles),
                fallback=bool(batch.fallback),
            )
        )
        if scenario.distance_to_target(x) <= scenario.goal_tolerance:
            rec.completed = True
            break
    return rec
