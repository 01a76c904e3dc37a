# ui/plots.py
"""
NetGame QL — Static Figures
===========================
SVG renderings of harness output. CSV stays the canonical result; figures
are skipped with a warning when matplotlib is missing.
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from agents.q_learning import TrajectoryRecord

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"svg.hashsalt": "netgame-ql", "font.size": 9})
    MATPLOTLIB_AVAILABLE = True
except ImportError:
    MATPLOTLIB_AVAILABLE = False

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


# ========================================
# HELPERS
# ========================================
def _save(fig, path: PathLike) -> Path:
    target = Path(path)
    fig.tight_layout()
    fig.savefig(target, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("🖼️ wrote %s", target)
    return target


def _unavailable(what: str) -> None:
    logger.warning("⚠️ matplotlib not installed; skipping %s figure", what)


# ========================================
# TRAJECTORY
# ========================================
def plot_trajectory(record: TrajectoryRecord, path: PathLike, title: str = "") -> Optional[Path]:
    """
    First-action probability against time for every agent; 3-agent
    2-action games get a second panel projecting agent 0 against agent 1.
    """
    if not MATPLOTLIB_AVAILABLE:
        _unavailable("trajectory")
        return None
    series = record.first_action_series()
    projected = record.action_counts == (2, 2, 2)
    fig, axes = plt.subplots(1, 2 if projected else 1, figsize=(10 if projected else 6, 4), squeeze=False)

    ax = axes[0][0]
    for k in range(series.shape[1]):
        ax.plot(record.time_points, series[:, k], linewidth=0.8, label=f"agent {k}")
    ax.set_xlabel("iteration" if record.mode == "discrete" else "time")
    ax.set_ylabel("P(first action)")
    ax.set_ylim(0.0, 1.0)
    if series.shape[1] <= 10:
        ax.legend(loc="upper right", fontsize=7)
    ax.set_title(title or ("converged" if record.converged else "not converged"))

    if projected:
        ax = axes[0][1]
        ax.plot(series[:, 0], series[:, 1], linewidth=0.6)
        ax.scatter(series[0, 0], series[0, 1], marker="o", s=12, label="start")
        ax.scatter(series[-1, 0], series[-1, 1], marker="x", s=16, label="end")
        ax.set_xlim(0.0, 1.0)
        ax.set_ylim(0.0, 1.0)
        ax.set_xlabel("agent 0: P(first action)")
        ax.set_ylabel("agent 1: P(first action)")
        ax.legend(loc="upper right", fontsize=7)
    return _save(fig, path)


# ========================================
# BOXPLOT
# ========================================
def plot_boxplot(table: pd.DataFrame, path: PathLike, title: str = "") -> Optional[Path]:
    """One panel per recorded agent; one box per T over all final-window samples."""
    if not MATPLOTLIB_AVAILABLE:
        _unavailable("boxplot")
        return None
    agents = sorted(table["agent"].unique())
    grid = sorted(table["T"].unique())
    fig, axes = plt.subplots(1, len(agents), figsize=(4 * len(agents), 3.5), squeeze=False, sharey=True)
    for ax, agent in zip(axes[0], agents):
        rows = table[table["agent"] == agent]
        data = [rows.loc[rows["T"] == rate, "prob"].to_numpy() for rate in grid]
        ax.boxplot(data, showfliers=False)
        ax.set_xticks(np.arange(1, len(grid) + 1), [f"{rate:g}" for rate in grid], rotation=45)
        ax.set_xlabel("T")
        ax.set_title(f"agent {agent}")
    axes[0][0].set_ylabel("P(first action)")
    if title:
        fig.suptitle(title)
    return _save(fig, path)


# ========================================
# BOUNDARY
# ========================================
def plot_boundary(frame: pd.DataFrame, path: PathLike, title: str = "") -> Optional[Path]:
    """Empirical boundary (solid) and threshold (dashed) against N, per network."""
    if not MATPLOTLIB_AVAILABLE:
        _unavailable("boundary")
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    for network, rows in frame.groupby("network", sort=False):
        rows = rows.sort_values("n")
        line, = ax.plot(rows["n"], rows["empirical_boundary_T"], marker="o", markersize=3, label=f"{network} (empirical)")
        ax.plot(
            rows["n"], rows["theoretical_threshold"], linestyle="--", color=line.get_color(),
            linewidth=0.8, label=f"{network} (threshold)",
        )
    ax.set_xlabel("N")
    ax.set_ylabel("T")
    ax.set_yscale("symlog", linthresh=0.01)
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title)
    return _save(fig, path)
