"""Scenarios, episode execution, persistence and figures."""

from .artifacts import PLOT_KINDS, render_from_run_dir, write_run_outputs
from .episode import EpisodeRecord, SnapshotRecord, StepRow, capture_snapshot, run_episode
from .io import (
    EPISODE_HEADER,
    SNAPSHOT_HEADER,
    read_episode_csv,
    read_snapshot_csv,
    write_episode_csv,
    write_snapshot_csv,
)
from .plotting import rank_colors, render_cost_svg, render_svg
from .scenarios import (
    ConfigError,
    Experiment,
    Scenario,
    ScenarioParams,
    builtin_scenarios,
    experiment_from_dict,
    get_scenario,
    load_experiment,
    make_planner_config,
)

__all__ = [
    "PLOT_KINDS", "render_from_run_dir", "write_run_outputs",
    "EpisodeRecord", "SnapshotRecord", "StepRow", "capture_snapshot", "run_episode",
    "EPISODE_HEADER", "SNAPSHOT_HEADER", "read_episode_csv", "read_snapshot_csv",
    "write_episode_csv", "write_snapshot_csv",
    "rank_colors", "render_cost_svg", "render_svg",
    "ConfigError", "Experiment", "Scenario", "ScenarioParams", "builtin_scenarios",
    "experiment_from_dict", "get_scenario", "load_experiment", "make_planner_config",
]
