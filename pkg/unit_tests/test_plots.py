# unit_tests/test_plots.py
"""
Unit Tests for Static Figures
=============================
Run with: python -m pytest unit_tests/test_plots.py -v
"""

import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

pytest.importorskip("matplotlib")


def _trajectory():
    from agents.q_learning import simulate_q_learning
    from games.catalog import make_chakraborty
    from games.network_game import ExplorationRates, JointStrategy

    game = make_chakraborty(3, 0.0, 0.0)
    x0 = JointStrategy(tuple(np.array([0.6, 0.4]) for _ in range(3)))
    return simulate_q_learning(game, ExplorationRates.uniform(1.0, 3), x0, iterations=100, stride=5, window=5)


def test_trajectory_figure(tmp_path):
    print("\n" + "=" * 60)
    print("TEST 1: Trajectory figure")
    print("=" * 60)

    from ui.plots import plot_trajectory

    record = _trajectory()
    path = plot_trajectory(record, tmp_path / "trajectory.svg")
    assert path == tmp_path / "trajectory.svg"
    text = path.read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text
    print("✅ SVG with time panel and 2-D projection")


def test_figures_are_reproducible(tmp_path):
    from ui.plots import plot_trajectory

    record = _trajectory()
    first = plot_trajectory(record, tmp_path / "a.svg", title="run")
    second = plot_trajectory(record, tmp_path / "b.svg", title="run")
    assert first.read_bytes() == second.read_bytes()


def test_boxplot_and_boundary_figures(tmp_path):
    from ui.plots import plot_boundary, plot_boxplot

    table = pd.DataFrame({
        "T": [0.5, 0.5, 1.0, 1.0] * 2,
        "init": [0, 1, 0, 1] * 2,
        "agent": [0] * 4 + [2] * 4,
        "sample_index": [0] * 8,
        "prob": [0.2, 0.8, 0.5, 0.5, 0.3, 0.6, 0.5, 0.5],
    })
    assert plot_boxplot(table, tmp_path / "box.svg", title="ring N=3").exists()

    frame = pd.DataFrame({
        "network": ["ring", "ring", "full", "full"],
        "n": [3, 5, 3, 5],
        "empirical_boundary_T": [0.02, 0.02, 0.03, 0.06],
        "theoretical_threshold": [0.05, 0.05, 0.05, 0.1],
    })
    assert plot_boundary(frame, tmp_path / "boundary.svg").exists()


def test_missing_matplotlib_skips(tmp_path, monkeypatch, caplog):
    import ui.plots as plots

    monkeypatch.setattr(plots, "MATPLOTLIB_AVAILABLE", False)
    assert plots.plot_trajectory(_trajectory(), tmp_path / "none.svg") is None
    assert not (tmp_path / "none.svg").exists()
    assert "matplotlib not installed" in caplog.text
