"""Vector-graphic figures: trajectories, sample fans and cost curves.

Figures are built on the object-oriented matplotlib API (no pyplot state) and
saved as SVG with a fixed hash salt and no date stamp, so identical inputs give
identical bytes.  Every drawn series carries a ``gid`` (``traj-k``,
``episode-<label>``, ``cost-<label>``, ``obstacle-j``, ``target``) that becomes
the ``id`` of its SVG group.
"""

from __future__ import annotations

import io
from typing import Dict, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402
import numpy as np  # noqa: E402

from .io import atomic_write_bytes  # noqa: E402

_STYLE = {
    "svg.hashsalt": "safe-mppi",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def rank_colors(costs) -> np.ndarray:
    """RGBA per trajectory: blue for the cheapest, red for the most expensive."""
    costs = np.asarray(costs, dtype=float)
    n = costs.size
    if n == 0:
        return np.zeros((0, 4))
    ranks = np.empty(n)
    ranks[np.argsort(costs, kind="stable")] = np.arange(n)
    frac = ranks / max(n - 1, 1)
    return matplotlib.colormaps["coolwarm"](frac)


def _save(fig: Figure, path) -> None:
    buf = io.BytesIO()
    FigureCanvasSVG(fig)
    fig.savefig(buf, format="svg", metadata={"Date": None})
    atomic_write_bytes(path, buf.getvalue())


def _scene(ax, obstacles, target):
    for j, obs in enumerate(obstacles):
        ax.add_patch(Circle((obs.cx, obs.cy), obs.r, facecolor="0.15", edgecolor="black", gid=f"obstacle-{j}"))
    if target is not None:
        ax.plot([target[0]], [target[1]], marker="o", markersize=9, color="tab:blue", linestyle="none", gid="target")
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def render_svg(
    path,
    obstacles: Sequence,
    target: Optional[Tuple[float, float]] = None,
    episodes: Optional[Dict[str, np.ndarray]] = None,
    samples: Optional[np.ndarray] = None,
    sample_costs=None,
    title: str = "",
) -> None:
    """Obstacles, target, executed paths (``label -> (N, >=2) xy``) and sample trajectories."""
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(5.0, 5.0))
        ax = fig.add_subplot(1, 1, 1)
        _scene(ax, obstacles, target)
        if samples is not None and len(samples):
            colors = rank_colors(sample_costs if sample_costs is not None else np.zeros(len(samples)))
            for k, traj in enumerate(samples):
                ax.plot(traj[:, 0], traj[:, 1], color=colors[k], linewidth=0.6, alpha=0.8, gid=f"traj-{k}")
        for label, xy in (episodes or {}).items():
            xy = np.asarray(xy)
            if len(xy):
                ax.plot(xy[:, 0], xy[:, 1], color="black", linewidth=1.6, label=label, gid=f"episode-{label}")
        if episodes:
            ax.legend(loc="upper left")
        if title:
            ax.set_title(title)
        _autoscale(ax, obstacles, target, episodes, samples)
        _save(fig, path)


def _autoscale(ax, obstacles, target, episodes, samples):
    pts = [np.zeros((1, 2))]
    for obs in obstacles:
        pts.append(np.array([[obs.cx - obs.r, obs.cy - obs.r], [obs.cx + obs.r, obs.cy + obs.r]]))
    if target is not None:
        pts.append(np.array([target[:2]]))
    for xy in (episodes or {}).values():
        if len(xy):
            pts.append(np.asarray(xy)[:, :2])
    if samples is not None and len(samples):
        pts.append(np.asarray(samples)[..., :2].reshape(-1, 2))
    P = np.concatenate(pts)
    lo, hi = P.min(axis=0) - 0.5, P.max(axis=0) + 0.5
    ax.set_xlim(lo[0], hi[0])
    ax.set_ylim(lo[1], hi[1])


def render_cost_svg(path, series: Dict[str, Tuple[np.ndarray, np.ndarray]], title: str = "") -> None:
    """Overlaid running cost against step, one line per label."""
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(6.0, 4.0))
        ax = fig.add_subplot(1, 1, 1)
        for i, (label, (steps, q)) in enumerate(series.items()):
            ax.plot(steps, q, color=f"C{i}", linewidth=1.4, label=label, gid=f"cost-{label}")
        ax.set_xlabel("step")
        ax.set_ylabel("running cost q")
        if series:
            ax.legend(loc="upper right")
        if title:
            ax.set_title(title)
        _save(fig, path)
