"""Mini-batch MAE training with Adam, train/test split, grid search."""

from __future__ import annotations

import dataclasses
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from yieldseq.evaluation import mape
from yieldseq.models.engine import mae_batch, predict
from yieldseq.models.network import ModelKind, Network, init_network
from yieldseq.numcore import ActivationKind, SeededRng

log = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class Hyperparameters:
    hidden_neurons: int = 76
    hidden_layers: int = 2
    learning_rate: float = 0.001
    epochs: int = 200
    batch_size: int = 12
    activation: ActivationKind = ActivationKind.RELU
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "activation", ActivationKind(self.activation))
        if self.hidden_neurons < 1 or self.hidden_layers < 1 or self.batch_size < 1:
            raise ValueError("hidden_neurons, hidden_layers and batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")

    def replace(self, **changes) -> "Hyperparameters":
        return dataclasses.replace(self, **changes)


@dataclass
class TrainingHistory:
    epoch_losses: list[float] = field(default_factory=list)
    test_mape: float | None = None


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def for_network(cls, net: Network) -> "AdamState":
        return cls(net.zeros_like(), net.zeros_like())


def mae_loss(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.ndim != 1:
        raise ValueError(f"pred and target must be equal-length sequences, got {pred.shape} and {target.shape}")
    if pred.size == 0:
        raise ValueError("mae_loss needs at least one value")
    return float(np.mean(np.abs(pred - target)))


def optimizer_step(net: Network, grads: dict[str, np.ndarray], state: AdamState,
                   lr: float) -> tuple[Network, AdamState]:
    """One Adam update, applied to ``net`` in place."""
    state.step += 1
    c1 = 1.0 - ADAM_BETA1 ** state.step
    c2 = 1.0 - ADAM_BETA2 ** state.step
    for name, p in net.params.items():
        g = grads[name]
        m, v = state.m[name], state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)
    return net, state


def split_indices(n: int, ratio: float, rng: SeededRng) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must lie strictly between 0 and 1, got {ratio}")
    if n < 2:
        raise ValueError(f"need at least 2 samples to split, got {n}")
    perm = rng.permutation(n)
    cut = int(np.floor(ratio * n))
    return perm[:cut], perm[cut:]


def split(samples: Sequence, ratio: float, rng: SeededRng) -> tuple[list, list]:
    """Random train/test partition; the first floor(ratio*n) of a permutation train."""
    tr, te = split_indices(len(samples), ratio, rng)
    return [samples[i] for i in tr], [samples[i] for i in te]


def input_width(kind: ModelKind, X: np.ndarray) -> int:
    return X.shape[1] * X.shape[2] if ModelKind(kind) is ModelKind.FNN else X.shape[2]


def train(kind: ModelKind | str, X, y, hp: Hyperparameters,
          X_test=None, y_test=None) -> tuple[Network, TrainingHistory]:
    """Train one network on windows ``X`` (n, T, F) and raw targets ``y``.

    The seed fixes both initialisation and the per-epoch shuffles. The last
    batch of an epoch may be short; it is still used.
    """
    kind = ModelKind(kind)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if n == 0:
        raise ValueError("training set is empty")
    rng = SeededRng(hp.seed)
    net = init_network(kind, input_width(kind, X), hp.hidden_neurons, rng,
                       hp.hidden_layers, hp.activation)
    state = AdamState.for_network(net)
    history = TrainingHistory()
    for epoch in range(hp.epochs):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, hp.batch_size):
            idx = order[s:s + hp.batch_size]
            loss, grads, _ = mae_batch(net, X[idx], y[idx])
            total += loss * idx.size
            optimizer_step(net, grads, state, hp.learning_rate)
        history.epoch_losses.append(total / n)
        log.debug("%s epoch %d loss %.6g", kind.value, epoch + 1, history.epoch_losses[-1])
    if X_test is not None and len(X_test):
        history.test_mape = mape(predict(net, X_test), y_test).mape
    return net, history


@dataclass(frozen=True)
class GridSpace:
    """Named axes of candidate values, searched as a cartesian product."""

    axes: dict[str, tuple[Any, ...]]

    def __post_init__(self):
        known = {f.name for f in dataclasses.fields(Hyperparameters)}
        if not self.axes:
            raise ValueError("grid space has no axes")
        for name, values in self.axes.items():
            if name not in known:
                raise ValueError(f"unknown hyperparameter axis {name!r}")
            if len(values) == 0:
                raise ValueError(f"axis {name!r} is empty")
        object.__setattr__(self, "axes", {k: tuple(v) for k, v in self.axes.items()})

    def __len__(self) -> int:
        return int(np.prod([len(v) for v in self.axes.values()]))

    def combinations(self) -> list[dict[str, Any]]:
        names = list(self.axes)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.axes.values())]


@dataclass(frozen=True)
class GridResult:
    params: dict[str, Any]
    mape: float
    final_loss: float


def _evaluate(args) -> GridResult:
    kind, combo, hp, X_tr, y_tr, X_te, y_te = args
    net, hist = train(kind, X_tr, y_tr, hp, X_te, y_te)
    final = hist.epoch_losses[-1] if hist.epoch_losses else float("nan")
    return GridResult(combo, hist.test_mape, final)


def grid_search(kind: ModelKind | str, space: GridSpace, X_train, y_train, X_test, y_test,
                base_hp: Hyperparameters = Hyperparameters(),
                workers: int = 1) -> tuple[Hyperparameters, list[GridResult]]:
    """Train every combination and keep the lowest test MAPE.

    Ties go to the earliest combination in axis order.
    """
    combos = space.combinations()
    jobs = [(kind, c, base_hp.replace(**c), X_train, y_train, X_test, y_test) for c in combos]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate, jobs))
    else:
        results = [_evaluate(j) for j in jobs]
    best = min(range(len(results)), key=lambda i: (results[i].mape, i))
    return base_hp.replace(**results[best].params), results
