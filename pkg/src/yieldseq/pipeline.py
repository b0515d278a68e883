"""End-to-end workflow: ingest, filter, window, split, scale, train, score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from yieldseq import datapipe as dp
from yieldseq.config import RunConfig
from yieldseq.evaluation import EvaluationReport, mape
from yieldseq.models.engine import predict
from yieldseq.models.network import ModelKind, Network
from yieldseq.numcore import SeededRng
from yieldseq.training import TrainingHistory, split, train


@dataclass
class PreparedData:
    ingest: dp.IngestResult
    records: list[dp.QuarterlyRecord]
    train: list[dp.SequenceSample]
    test: list[dp.SequenceSample]
    scaler: dp.FeatureScaler | None
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray


def prepare(cfg: RunConfig) -> PreparedData:
    """Everything up to model-ready arrays.

    The scaler only ever sees the training windows.
    """
    ingest = dp.ingest_csv(cfg.input)
    records = dp.filter_universe(ingest.records, cfg.top_n, cfg.excluded_sectors)
    samples = dp.build_windows(records)
    if len(samples) < 2:
        empty = np.zeros((0, dp.WINDOW_LEN, len(dp.FEATURES)))
        return PreparedData(ingest, records, samples, [], None, empty, np.zeros(0), empty, np.zeros(0))
    train_s, test_s = split(samples, cfg.split_ratio, SeededRng(cfg.seed))
    scaler = dp.zscore_fit(train_s)
    X_tr, y_tr = dp.stack_samples(dp.zscore_apply(scaler, train_s))
    X_te, y_te = dp.stack_samples(dp.zscore_apply(scaler, test_s))
    return PreparedData(ingest, records, train_s, test_s, scaler, X_tr, y_tr, X_te, y_te)


def fit_and_score(kind: ModelKind, data: PreparedData, cfg: RunConfig
                  ) -> tuple[Network, TrainingHistory, EvaluationReport]:
    if len(data.X_train) == 0:
        raise ValueError("no training windows: every company needs at least 9 consecutive quarters")
    net, hist = train(kind, data.X_train, data.y_train, cfg.hp)
    report = mape(predict(net, data.X_test), data.y_test, model=ModelKind(kind).value)
    hist.test_mape = report.mape
    return net, hist, report
