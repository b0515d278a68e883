"""Single-timestep LSTM and GRU cells on one sample.

These follow the gate equations term by term and keep every intermediate
in a trace. Training goes through the batched engine instead; the two are
checked against each other in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from yieldseq.numcore import ShapeError, as_vector, concat, sigmoid
from yieldseq.models.network import GRUParams, LSTMParams


@dataclass(frozen=True)
class CellState:
    H: np.ndarray
    C: np.ndarray | None = None

    @classmethod
    def zeros(cls, hidden: int, with_cell: bool = True) -> "CellState":
        return cls(np.zeros(hidden), np.zeros(hidden) if with_cell else None)


@dataclass(frozen=True)
class LSTMTrace:
    f: np.ndarray
    i: np.ndarray
    k: np.ndarray
    o: np.ndarray
    C: np.ndarray
    H: np.ndarray


@dataclass(frozen=True)
class GRUTrace:
    r: np.ndarray
    u: np.ndarray
    h: np.ndarray
    H: np.ndarray


def _check(hidden: int, input_size: int, x: np.ndarray, H: np.ndarray) -> None:
    if x.shape != (input_size,):
        raise ShapeError(f"input has length {x.shape[0]}, cell expects {input_size}")
    if H.shape != (hidden,):
        raise ShapeError(f"hidden state has length {H.shape[0]}, cell expects {hidden}")


def lstm_cell_forward(p: LSTMParams, x, prev: CellState) -> tuple[CellState, LSTMTrace]:
    x = as_vector(x)
    H_prev = as_vector(prev.H)
    _check(p.hidden, p.input_size, x, H_prev)
    C_prev = np.zeros(p.hidden) if prev.C is None else as_vector(prev.C)
    if C_prev.shape != H_prev.shape:
        raise ShapeError(f"cell state length {C_prev.shape[0]} != hidden length {H_prev.shape[0]}")

    z = concat(H_prev, x)
    f = sigmoid(p.W_f @ z + p.b_f)
    k = np.tanh(p.W_k @ z + p.b_k)
    i = sigmoid(p.W_i @ z + p.b_i)
    C = f * C_prev + i * k
    o = sigmoid(p.W_o @ z + p.b_o)
    H = o * np.tanh(C)
    return CellState(H, C), LSTMTrace(f, i, k, o, C, H)


def gru_cell_forward(p: GRUParams, x, prev_H) -> tuple[np.ndarray, GRUTrace]:
    x = as_vector(x)
    H_prev = as_vector(prev_H)
    _check(p.hidden, p.input_size, x, H_prev)

    z = concat(H_prev, x)
    r = sigmoid(p.W_r @ z + p.b_r)
    u = sigmoid(p.W_u @ z + p.b_u)
    h = np.tanh(p.W_h @ concat(r * H_prev, x) + p.b_h)
    H = (1.0 - u) * H_prev + u * h
    return H, GRUTrace(r, u, h, H)
