"""Figures written next to the CSV reports."""

from __future__ import annotations

from contextlib import contextmanager
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.bbox": "tight",
}
COLORS = {"fnn": "#7f7f7f", "lstm": "#1f77b4", "gru": "#d62728"}
# Keeps PNG bytes stable across runs.
PNG_METADATA = {"Software": None}


@contextmanager
def _figure(width: float = 4.5, height: float = 3.0):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, height))
        try:
            yield fig, ax
        finally:
            plt.close(fig)


def _save(fig, path) -> None:
    fig.savefig(path, metadata=PNG_METADATA)


def plot_loss_curves(histories: dict, path) -> None:
    with _figure() as (fig, ax):
        for kind, hist in histories.items():
            losses = hist.epoch_losses
            ax.plot(range(1, len(losses) + 1), losses, label=kind.upper(),
                    color=COLORS.get(kind), lw=1.2)
        ax.set_xlabel("Epoch")
        ax.set_ylabel("Training MAE")
        ax.set_yscale("log")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_comparison(rows: Sequence, path) -> None:
    with _figure(3.5, 2.8) as (fig, ax):
        names = [r.model.upper() for r in rows]
        vals = [r.mape for r in rows]
        bars = ax.bar(names, vals, color=[COLORS.get(r.model, "#444444") for r in rows], width=0.6)
        for bar, v in zip(bars, vals):
            ax.annotate(f"{v:.2f}", (bar.get_x() + bar.get_width() / 2, v), ha="center", va="bottom",
                        fontsize=8, xytext=(0, 2), textcoords="offset points")
        ax.set_ylabel("Test MAPE (%)")
        _save(fig, path)


def plot_grid(results: Sequence, path) -> None:
    with _figure(5.0, 3.0) as (fig, ax):
        labels = [", ".join(f"{k}={v}" for k, v in r.params.items()) for r in results]
        ax.barh(range(len(results)), [r.mape for r in results], color="#1f77b4")
        ax.set_yticks(range(len(results)), labels)
        ax.invert_yaxis()
        ax.set_xlabel("Test MAPE (%)")
        _save(fig, path)


def plot_ranking(entries: Sequence[tuple[str, float]], path, top: int = 20) -> None:
    shown = list(entries[:top])
    with _figure(4.5, max(2.0, 0.18 * len(shown) + 0.8)) as (fig, ax):
        ax.barh(range(len(shown)), [p for _, p in shown], color="#2ca02c")
        ax.set_yticks(range(len(shown)), [c for c, _ in shown])
        ax.invert_yaxis()
        ax.set_xlabel("Predicted next-quarter EBIT/EV")
        _save(fig, path)
