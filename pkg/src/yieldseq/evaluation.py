"""MAPE scoring, model comparison and the EBIT/EV stock ranking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from yieldseq.datapipe import FeatureScaler
from yieldseq.models.engine import predict
from yieldseq.models.network import Network

MIN_ACTUAL = 1e-8


class NoScorableSamples(ValueError):
    pass


@dataclass(frozen=True)
class EvaluationReport:
    model: str
    m: int
    mape: float
    excluded_count: int = 0


def mape(forecast, actual, model: str = "") -> EvaluationReport:
    """Mean absolute percentage error, in percent.

    Samples with |actual| < 1e-8 are left out and counted.
    """
    F = np.asarray(forecast, dtype=np.float64)
    A = np.asarray(actual, dtype=np.float64)
    if F.shape != A.shape or F.ndim != 1 or F.size == 0:
        raise ValueError(f"forecast and actual must be equal-length non-empty sequences, "
                         f"got {F.shape} and {A.shape}")
    keep = np.abs(A) >= MIN_ACTUAL
    m = int(keep.sum())
    if m == 0:
        raise NoScorableSamples("no scorable samples")
    value = float(np.mean(np.abs(A[keep] - F[keep]) / np.abs(A[keep])) * 100.0)
    return EvaluationReport(model, m, value, int(F.size - m))


@dataclass(frozen=True)
class ComparisonRow:
    model: str
    mape: float
    m: int
    excluded_count: int
    best: bool


def compare_models(reports: Sequence[EvaluationReport]) -> list[ComparisonRow]:
    """Rows by ascending MAPE (model name breaks ties); the first is flagged best."""
    if not reports:
        raise ValueError("nothing to compare")
    ordered = sorted(reports, key=lambda r: (r.mape, r.model))
    return [ComparisonRow(r.model, r.mape, r.m, r.excluded_count, i == 0) for i, r in enumerate(ordered)]


@dataclass(frozen=True)
class StockRanking:
    entries: list[tuple[str, float]]
    omitted: list[str]


def order_predictions(predictions: Mapping[str, float]) -> list[tuple[str, float]]:
    return sorted(predictions.items(), key=lambda kv: (-kv[1], kv[0]))


def rank_stocks(net: Network, scaler: FeatureScaler, windows: Mapping[str, np.ndarray],
                omitted: Sequence[str] = ()) -> StockRanking:
    """Predict next-quarter EBIT/EV from each company's latest raw window and rank.

    ``windows`` holds EV-normalized, unscaled windows keyed by company.
    """
    ids = sorted(windows)
    if ids:
        X = scaler.transform(np.stack([windows[c] for c in ids]))
        preds = predict(net, X)
    else:
        preds = []
    entries = order_predictions({c: float(p) for c, p in zip(ids, preds)})
    return StockRanking(entries, sorted(omitted))
