"""Matplotlib rendering for traces, training curves, and comparison tables.

Figures are rendered headlessly to image files next to the CSV outputs;
every plot function returns the path it wrote.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGSIZE = (9.0, 4.0)
DPI = 150


def plot_trace(trace, path, title: str = "Flow forecast") -> Path:
    """Actual vs predicted flow over the test anchors."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(trace.anchors, trace.actual, label="actual", color="0.3", lw=1.0)
    ax.plot(trace.anchors, trace.predicted, label="predicted", color="tab:red", lw=1.0)
    ax.set_xlabel("time slot (15 min)")
    ax.set_ylabel("flow (veh/h)")
    ax.set_title(title)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def plot_histories(histories: dict, path, error_goal: float | None = None) -> Path:
    """Training error per accepted epoch, one curve per label, log scale."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for label, history in histories.items():
        epochs = [row[0] for row in history]
        errors = [row[1] for row in history]
        ax.semilogy(epochs, errors, label=label, lw=1.2)
    if error_goal is not None:
        ax.axhline(error_goal, color="0.5", ls="--", lw=1.0, label="error goal")
    ax.set_xlabel("epoch")
    ax.set_ylabel("normalized MSE")
    ax.set_title("Training error")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def plot_improvements(reports, path) -> Path:
    """Bar chart of the per-link RMSE improvement percentages."""
    path = Path(path)
    links = [r.link_id for r in reports]
    values = [r.improvement_pct for r in reports]
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.bar(range(len(links)), values, color="tab:blue")
    ax.axhline(0.0, color="0.3", lw=0.8)
    ax.set_xticks(range(len(links)), links)
    ax.set_xlabel("road link")
    ax.set_ylabel("improvement (%)")
    ax.set_title("Multitask RMSE improvement over single-task")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path
