"""Delimited and aligned-text writers for every run artifact."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from yieldseq.datapipe import FEATURES, FeatureScaler
from yieldseq.evaluation import ComparisonRow, StockRanking
from yieldseq.training import GridResult, TrainingHistory


def _num(v: float) -> str:
    return "%.10g" % v


def _write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def aligned(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Left-aligned text columns, two spaces apart."""
    cols = [list(header)] + [list(r) for r in rows]
    widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cols]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_comparison(rows: Sequence[ComparisonRow], csv_path, txt_path) -> None:
    header = ("model", "mape_percent", "scored", "excluded", "best")
    body = [(r.model, _num(r.mape), str(r.m), str(r.excluded_count), "yes" if r.best else "")
            for r in rows]
    _write_csv(csv_path, header, body)
    text = [(r.model.upper(), f"{r.mape:.2f}", str(r.m), str(r.excluded_count), "*" if r.best else "")
            for r in rows]
    Path(txt_path).write_text(aligned(("Model", "MAPE (%)", "Scored", "Excluded", "Best"), text),
                              encoding="utf-8")


def write_ranking(ranking: StockRanking, csv_path, txt_path) -> None:
    body = [(str(i), cid, _num(p)) for i, (cid, p) in enumerate(ranking.entries, start=1)]
    _write_csv(csv_path, ("rank", "company_id", "predicted_ebit_ev"), body)
    text = aligned(("Rank", "Company", "Predicted EBIT/EV"),
                   [(str(i), cid, f"{p:.4f}") for i, (cid, p) in enumerate(ranking.entries, start=1)])
    if ranking.omitted:
        text += "\nOmitted (no 8 consecutive recent quarters): " + ", ".join(ranking.omitted) + "\n"
    Path(txt_path).write_text(text, encoding="utf-8")


def write_grid(results: Sequence[GridResult], best_index: int, csv_path, txt_path) -> None:
    axes = list(results[0].params) if results else []
    body = [[str(r.params[a]) for a in axes] + [_num(r.mape), _num(r.final_loss),
                                               "yes" if i == best_index else ""]
            for i, r in enumerate(results)]
    _write_csv(csv_path, axes + ["mape_percent", "final_train_loss", "best"], body)
    text = [[str(r.params[a]) for a in axes] + [f"{r.mape:.2f}", f"{r.final_loss:.5f}",
                                               "*" if i == best_index else ""]
            for i, r in enumerate(results)]
    Path(txt_path).write_text(aligned(axes + ["MAPE (%)", "Train MAE", "Best"], text), encoding="utf-8")


def write_losses(histories: dict[str, TrainingHistory], path) -> None:
    kinds = list(histories)
    n = max((len(h.epoch_losses) for h in histories.values()), default=0)
    body = []
    for e in range(n):
        row = [str(e + 1)]
        for k in kinds:
            losses = histories[k].epoch_losses
            row.append(_num(losses[e]) if e < len(losses) else "")
        body.append(row)
    _write_csv(path, ["epoch"] + [f"{k}_train_mae" for k in kinds], body)


def write_scaler(scaler: FeatureScaler, path) -> None:
    _write_csv(path, ("feature", "mean", "std"),
               [(f, "%.17g" % m, "%.17g" % s) for f, m, s in zip(FEATURES, scaler.mean, scaler.std)])


def read_scaler(path) -> FeatureScaler:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if [r["feature"] for r in rows] != list(FEATURES):
        raise ValueError(f"{path}: scaler features do not match the fourteen fundamentals")
    return FeatureScaler(np.array([float(r["mean"]) for r in rows]),
                         np.array([float(r["std"]) for r in rows]))


def write_dataset(path, X: np.ndarray, y: np.ndarray, meta: Sequence[tuple[str, str, str, str]]) -> None:
    """One row per window: split, company, first and target period, target, then T*F features."""
    T, F = X.shape[1:] if X.ndim == 3 else (0, 0)
    header = ["split", "company_id", "start_period", "target_period", "target"]
    header += [f"t{t + 1}_{FEATURES[f]}" for t in range(T) for f in range(F)]
    rows = ([*m, "%.17g" % tgt, *("%.17g" % v for v in x.reshape(-1))]
            for m, x, tgt in zip(meta, X, y))
    _write_csv(path, header, rows)


def write_rejections(rejections, path) -> None:
    _write_csv(path, ("reason", "count"), sorted((k, str(v)) for k, v in rejections.items()))
