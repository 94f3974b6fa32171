"""Scenario definitions, built-in experiments and config-file loading."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..barrier import CircularObstacle, ClassKappa, safe_set_membership
from ..controller import VARIANTS, CostModel, PlannerConfig, TrackingCost
from ..dynamics import State

DEFAULT_SNAPSHOT_STEP = 7  # t = 0.35 s at dt = 0.05
# gamma * dt = 0.5: the Euler-discretised barrier may at most halve per step
EXPERIMENT_ALPHA = ClassKappa("linear", 10.0)


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configuration."""


@dataclass
class Scenario:
    start: State
    target: Tuple[float, float]
    v_desired: float
    obstacles: List[CircularObstacle] = field(default_factory=list)
    goal_tolerance: float = 0.2
    max_steps: int = 400
    name: str = "custom"

    def __post_init__(self):
        self.start = State(*map(float, self.start))
        self.target = tuple(float(v) for v in self.target)
        if not self.goal_tolerance > 0:
            raise ConfigError("goal_tolerance must be positive")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        if not safe_set_membership(self.obstacles, self.start.x, self.start.y):
            raise ConfigError("start state lies inside an obstacle")

    def distance_to_target(self, state) -> float:
        return float(np.hypot(state[0] - self.target[0], state[1] - self.target[1]))


@dataclass
class ScenarioParams:
    """Cost and planner defaults that travel with a scenario."""

    position_weight: float = 10.0
    velocity_weight: float = 1.0
    penalty: float = 10000.0  # only used by the plain MPPI variant
    lam: float = 1.0
    dt: float = 0.05
    mu0: Tuple[float, ...] = (0.0, 0.0)
    Sigma0: Tuple[Tuple[float, ...], ...] = ((1.0, 0.0), (0.0, 1.0))
    delta: float = 0.002
    horizons: Dict[str, int] = field(default_factory=lambda: {v: 20 for v in VARIANTS})
    snapshot_step: int = DEFAULT_SNAPSHOT_STEP
    alpha: ClassKappa = field(default_factory=ClassKappa)

    def cost_model(self, scenario: Scenario, variant: str) -> CostModel:
        q = TrackingCost(scenario.target, scenario.v_desired, self.position_weight, self.velocity_weight)
        penalty = self.penalty if variant == "mppi" else 0.0
        return CostModel(state_cost=q, penalty=penalty, lam=self.lam)


def make_planner_config(params: ScenarioParams, variant: str, samples: int, seed: int, **overrides) -> PlannerConfig:
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    kw = dict(
        variant=variant,
        samples=samples,
        horizon=params.horizons.get(variant, 20),
        dt=params.dt,
        mu0=np.array(params.mu0, dtype=float),
        Sigma0=np.array(params.Sigma0, dtype=float),
        delta=params.delta,
        alpha=params.alpha,
        seed=seed,
    )
    kw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return PlannerConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def builtin_scenarios() -> Dict[str, Tuple[Scenario, ScenarioParams]]:
    single = Scenario(
        start=State(0.0, 0.0, 0.0),
        target=(4.0, 4.0),
        v_desired=2.0,
        obstacles=[CircularObstacle(2.2, 2.0, 0.5)],
        name="single_obstacle",
    )
    narrow = Scenario(
        start=State(0.0, 0.0, 0.0),
        target=(4.0, 4.0),
        v_desired=2.0,
        obstacles=[
            CircularObstacle(1.5, 2.3, 0.47),
            CircularObstacle(2.4, 1.6, 0.47),
            CircularObstacle(3.3, 0.9, 0.47),
        ],
        name="narrow_passage",
    )
    narrow_params = ScenarioParams(
        horizons={"mppi": 40, "shielded": 20, "trust_region": 20}, alpha=EXPERIMENT_ALPHA
    )
    return {
        "single_obstacle": (single, ScenarioParams(alpha=EXPERIMENT_ALPHA)),
        "narrow_passage": (narrow, narrow_params),
    }


def get_scenario(name: str) -> Tuple[Scenario, ScenarioParams]:
    table = builtin_scenarios()
    if name not in table:
        raise ConfigError(f"unknown scenario {name!r}; available: {', '.join(sorted(table))}")
    return table[name]


# ----------------------------------------------------------------- config files

_SCENARIO_KEYS = {"name", "base", "start", "target", "v_desired", "obstacles", "goal_tolerance", "max_steps"}
_CONTROLLER_KEYS = {
    "variant", "samples", "horizon", "dt", "mu0", "Sigma0", "trust_c", "delta", "alpha",
    "seed", "exact_chance", "shared_sdp", "workers",
}
_COST_KEYS = {"position_weight", "velocity_weight", "penalty", "lambda"}
_RUN_KEYS = {"seed", "snapshot_step", "workers"}


@dataclass
class Experiment:
    scenario: Scenario
    params: ScenarioParams
    planner: PlannerConfig


def _check_keys(section: str, table: dict, allowed: set):
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def _parse_alpha(value) -> ClassKappa:
    if isinstance(value, str):
        return ClassKappa(kind=value)
    if isinstance(value, dict):
        return ClassKappa(kind=value.get("kind", "linear"), gamma=float(value.get("gamma", 1.0)))
    return ClassKappa(gamma=float(value))


def experiment_from_dict(doc: dict) -> Experiment:
    """Build an experiment from a parsed config document.

    ``[scenario] base = "<builtin>"`` starts from a built-in scenario and the
    remaining keys override it.
    """
    _check_keys("top level", doc, {"scenario", "controller", "cost", "run"})
    sc = dict(doc.get("scenario", {}))
    ctl = dict(doc.get("controller", {}))
    cost = dict(doc.get("cost", {}))
    run = dict(doc.get("run", {}))
    _check_keys("scenario", sc, _SCENARIO_KEYS)
    _check_keys("controller", ctl, _CONTROLLER_KEYS)
    _check_keys("cost", cost, _COST_KEYS)
    _check_keys("run", run, _RUN_KEYS)
    try:
        base = sc.pop("base", None)
        if base is not None:
            scenario, params = get_scenario(base)
        else:
            scenario = Scenario(start=(0.0, 0.0, 0.0), target=(4.0, 4.0), v_desired=2.0)
            params = ScenarioParams()
        if "obstacles" in sc:
            sc["obstacles"] = [CircularObstacle(float(o["x"]), float(o["y"]), float(o["r"])) for o in sc["obstacles"]]
        scenario = replace(scenario, **sc)
        if "lambda" in cost:
            cost["lam"] = cost.pop("lambda")
        params = replace(params, **{k: float(v) for k, v in cost.items()})
        if "snapshot_step" in run:
            params = replace(params, snapshot_step=int(run["snapshot_step"]))
        seed = int(run.get("seed", ctl.pop("seed", 0)))
        workers = int(run.get("workers", ctl.pop("workers", 1)))
        if "alpha" in ctl:
            ctl["alpha"] = _parse_alpha(ctl["alpha"])
        variant = ctl.pop("variant", "trust_region")
        samples = int(ctl.pop("samples", 100))
        planner = make_planner_config(params, variant, samples, seed, workers=workers, **ctl)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return Experiment(scenario, params, planner)


def load_experiment(path) -> Experiment:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return experiment_from_dict(doc)
