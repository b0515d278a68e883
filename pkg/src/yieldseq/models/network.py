"""Parameter containers and construction for the three network kinds."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from yieldseq.numcore import ActivationKind, SeededRng, ShapeError, glorot_uniform

LSTM_GATES = ("f", "i", "k", "o")
GRU_GATES = ("r", "u", "h")


class ModelKind(str, enum.Enum):
    FNN = "fnn"
    LSTM = "lstm"
    GRU = "gru"


@dataclass(frozen=True)
class LSTMParams:
    W_f: np.ndarray
    W_i: np.ndarray
    W_k: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_k: np.ndarray
    b_o: np.ndarray

    def __post_init__(self):
        shapes = {w.shape for w in (self.W_f, self.W_i, self.W_k, self.W_o)}
        if len(shapes) != 1:
            raise ShapeError(f"LSTM gate weights differ in shape: {sorted(shapes)}")
        hidden = self.W_f.shape[0]
        for b in (self.b_f, self.b_i, self.b_k, self.b_o):
            if b.shape != (hidden,):
                raise ShapeError(f"LSTM bias shape {b.shape} does not match hidden size {hidden}")

    @property
    def hidden(self) -> int:
        return self.W_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_f.shape[1] - self.hidden


@dataclass(frozen=True)
class GRUParams:
    W_r: np.ndarray
    W_u: np.ndarray
    W_h: np.ndarray
    b_r: np.ndarray
    b_u: np.ndarray
    b_h: np.ndarray

    def __post_init__(self):
        shapes = {w.shape for w in (self.W_r, self.W_u, self.W_h)}
        if len(shapes) != 1:
            raise ShapeError(f"GRU gate weights differ in shape: {sorted(shapes)}")
        hidden = self.W_r.shape[0]
        for b in (self.b_r, self.b_u, self.b_h):
            if b.shape != (hidden,):
                raise ShapeError(f"GRU bias shape {b.shape} does not match hidden size {hidden}")

    @property
    def hidden(self) -> int:
        return self.W_r.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_r.shape[1] - self.hidden


@dataclass
class Network:
    """A regression network: first layer, ReLU dense stack, linear output.

    ``input_size`` is the per-timestep feature count for recurrent kinds and
    the flattened window width for the FNN. ``hidden_layers`` counts the
    first layer (recurrent or dense) plus the dense layers after it, so the
    default of 2 gives recurrent -> dense -> output.
    """

    kind: ModelKind
    input_size: int
    hidden: int
    hidden_layers: int = 2
    activation: ActivationKind = ActivationKind.RELU
    params: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_dense(self) -> int:
        """Dense layers after the first layer."""
        return self.hidden_layers - 1

    def lstm_params(self) -> LSTMParams:
        return LSTMParams(**{f"W_{g}": self.params[f"W_{g}"] for g in LSTM_GATES},
                          **{f"b_{g}": self.params[f"b_{g}"] for g in LSTM_GATES})

    def gru_params(self) -> GRUParams:
        return GRUParams(**{f"W_{g}": self.params[f"W_{g}"] for g in GRU_GATES},
                         **{f"b_{g}": self.params[f"b_{g}"] for g in GRU_GATES})

    def n_params(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def copy(self) -> "Network":
        return Network(self.kind, self.input_size, self.hidden, self.hidden_layers,
                       self.activation, {k: v.copy() for k, v in self.params.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.params.items()}


def expected_param_count(kind: ModelKind, input_size: int, hidden: int, hidden_layers: int) -> int:
    kind = ModelKind(kind)
    if kind is ModelKind.FNN:
        first = hidden * input_size + hidden
    else:
        gates = 4 if kind is ModelKind.LSTM else 3
        first = gates * hidden * (hidden + input_size) + gates * hidden
    dense = (hidden_layers - 1) * (hidden * hidden + hidden)
    return first + dense + hidden + 1


def param_shapes(kind: ModelKind, input_size: int, hidden: int,
                 hidden_layers: int) -> dict[str, tuple[int, ...]]:
    """Ordered parameter names and shapes; this order is used everywhere."""
    kind = ModelKind(kind)
    shapes: dict[str, tuple[int, ...]] = {}
    if kind is ModelKind.FNN:
        shapes["W_in"] = (hidden, input_size)
        shapes["b_in"] = (hidden,)
    else:
        gates = LSTM_GATES if kind is ModelKind.LSTM else GRU_GATES
        for g in gates:
            shapes[f"W_{g}"] = (hidden, hidden + input_size)
        for g in gates:
            shapes[f"b_{g}"] = (hidden,)
    for d in range(1, hidden_layers):
        shapes[f"W_d{d}"] = (hidden, hidden)
        shapes[f"b_d{d}"] = (hidden,)
    shapes["W_out"] = (1, hidden)
    shapes["b_out"] = (1,)
    return shapes


def init_network(kind: ModelKind | str, input_size: int, hidden: int, rng: SeededRng,
                 hidden_layers: int = 2,
                 activation: ActivationKind | str = ActivationKind.RELU) -> Network:
    """Glorot-uniform weights, zero biases."""
    kind = ModelKind(kind)
    if input_size < 1 or hidden < 1 or hidden_layers < 1:
        raise ValueError("input_size, hidden and hidden_layers must all be >= 1")
    params = {}
    for name, shape in param_shapes(kind, input_size, hidden, hidden_layers).items():
        if name.startswith("W_"):
            params[name] = glorot_uniform(shape[1], shape[0], rng)
        else:
            params[name] = np.zeros(shape)
    net = Network(kind, input_size, hidden, hidden_layers, ActivationKind(activation), params)
    assert net.n_params() == expected_param_count(kind, input_size, hidden, hidden_layers)
    return net


def zero_network(kind: ModelKind | str, input_size: int, hidden: int, hidden_layers: int = 2,
                 activation: ActivationKind | str = ActivationKind.RELU) -> Network:
    kind = ModelKind(kind)
    params = {name: np.zeros(shape) for name, shape
              in param_shapes(kind, input_size, hidden, hidden_layers).items()}
    return Network(kind, input_size, hidden, hidden_layers, ActivationKind(activation), params)
