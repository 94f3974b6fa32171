"""The set of files produced for one episode and how to re-read them."""

from __future__ import annotations

import os

import numpy as np

from ..barrier import CircularObstacle
from .episode import EpisodeRecord
from .io import (
    read_episode_csv,
    read_jsonl,
    read_snapshot_csv,
    write_episode_csv,
    write_jsonl,
    write_snapshot_csv,
)
from .plotting import render_cost_svg, render_svg
from .scenarios import Scenario, ScenarioParams

EPISODE_FILE = "episode.csv"
SNAPSHOT_FILE = "snapshot.csv"
TRAJECTORY_FILE = "trajectory.svg"
SUMMARY_FILE = "summary.jsonl"
PLOT_KINDS = ("trajectory", "samples", "cost")


def scenario_record(scenario: Scenario) -> dict:
    return {
        "record": "scenario",
        "name": scenario.name,
        "start": list(scenario.start),
        "target": list(scenario.target),
        "v_desired": scenario.v_desired,
        "goal_tolerance": scenario.goal_tolerance,
        "max_steps": scenario.max_steps,
        "obstacles": [{"x": o.cx, "y": o.cy, "r": o.r} for o in scenario.obstacles],
    }


def write_run_outputs(out_dir, scenario: Scenario, params: ScenarioParams, record: EpisodeRecord, extra=None) -> dict:
    """Write episode.csv, snapshot.csv, trajectory.svg and summary.jsonl."""
    summary = {"record": "summary", "scenario": scenario.name, **record.summary(params.dt)}
    if extra:
        summary.update(extra)
    write_episode_csv(record, os.path.join(out_dir, EPISODE_FILE))
    write_snapshot_csv(record.snapshot, os.path.join(out_dir, SNAPSHOT_FILE))
    write_jsonl(os.path.join(out_dir, SUMMARY_FILE), [scenario_record(scenario), summary])
    render_from_run_dir(out_dir, "trajectory", os.path.join(out_dir, TRAJECTORY_FILE))
    return summary


def _require(run_dir, name):
    path = os.path.join(run_dir, name)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"missing {name} in {run_dir}")
    return path


def render_from_run_dir(run_dir, kind: str, out_path) -> None:
    """Re-render a figure from the files of a finished run (no recomputation)."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {', '.join(PLOT_KINDS)}")
    rows = read_episode_csv(_require(run_dir, EPISODE_FILE))
    meta = read_jsonl(_require(run_dir, SUMMARY_FILE))
    sc = next((m for m in meta if m.get("record") == "scenario"), None)
    if sc is None:
        raise ValueError(f"{SUMMARY_FILE} in {run_dir} has no scenario record")
    summ = next((m for m in meta if m.get("record") == "summary"), {})
    label = summ.get("variant") or "episode"
    obstacles = [CircularObstacle(o["x"], o["y"], o["r"]) for o in sc["obstacles"]]
    if kind == "cost":
        steps = np.array([r["step"] for r in rows])
        q = np.array([r["q"] for r in rows])
        render_cost_svg(out_path, {label: (steps, q)})
        return
    X, costs, _ = read_snapshot_csv(_require(run_dir, SNAPSHOT_FILE))
    if kind == "samples":
        render_svg(out_path, obstacles, sc["target"], samples=X, sample_costs=costs)
        return
    path = np.array([sc["start"][:2]] + [[r["x"], r["y"]] for r in rows])
    render_svg(out_path, obstacles, sc["target"], episodes={label: path}, samples=X, sample_costs=costs)
