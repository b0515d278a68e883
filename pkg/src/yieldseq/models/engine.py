"""Batched forward pass and backpropagation through time.

All three kinds share the same head: the first layer's output (final
hidden state for LSTM/GRU, first dense layer for the FNN) runs through
the dense stack and a linear output neuron. Inputs are windows of shape
(batch, timesteps, features); the FNN flattens each window timestep-major.
The recurrent state starts at zero for every window.
"""

from __future__ import annotations

import numpy as np

from yieldseq.numcore import DTYPE, ShapeError, activation_grad, apply_activation, sigmoid
from yieldseq.models.network import GRU_GATES, LSTM_GATES, ModelKind, Network


def _as_batch(net: Network, windows) -> np.ndarray:
    X = np.asarray(windows, dtype=DTYPE)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3:
        raise ShapeError(f"windows must be (batch, timesteps, features), got shape {X.shape}")
    if net.kind is ModelKind.FNN:
        width = X.shape[1] * X.shape[2]
        if width != net.input_size:
            raise ShapeError(f"flattened window has {width} values, FNN expects {net.input_size}")
    elif X.shape[2] != net.input_size:
        raise ShapeError(f"window has {X.shape[2]} features per step, network expects {net.input_size}")
    return X


def _lstm_forward(P, X):
    B, T, _ = X.shape
    n = P["W_f"].shape[0]
    W = np.concatenate([P[f"W_{g}"] for g in LSTM_GATES])
    b = np.concatenate([P[f"b_{g}"] for g in LSTM_GATES])
    Wh, Wx = W[:, :n], W[:, n:]
    XW = X @ Wx.T + b
    H = np.zeros((B, n))
    C = np.zeros((B, n))
    Hs = np.empty((T, B, n))
    Cs = np.empty((T, B, n))
    G = np.empty((T, B, 4 * n))
    TC = np.empty((T, B, n))
    for t in range(T):
        Hs[t] = H
        Cs[t] = C
        a = XW[:, t] + H @ Wh.T
        g = G[t]
        g[:, :2 * n] = sigmoid(a[:, :2 * n])
        g[:, 2 * n:3 * n] = np.tanh(a[:, 2 * n:3 * n])
        g[:, 3 * n:] = sigmoid(a[:, 3 * n:])
        f, i, k, o = g[:, :n], g[:, n:2 * n], g[:, 2 * n:3 * n], g[:, 3 * n:]
        C = f * C + i * k
        TC[t] = np.tanh(C)
        H = o * TC[t]
    return H, (X, Wh, Hs, Cs, G, TC)


def _lstm_backward(cache, dH, grads):
    X, Wh, Hs, Cs, G, TC = cache
    T, B, n = Hs.shape
    dA = np.empty((T, B, 4 * n))
    dC = np.zeros((B, n))
    for t in range(T - 1, -1, -1):
        g = G[t]
        f, i, k, o = g[:, :n], g[:, n:2 * n], g[:, 2 * n:3 * n], g[:, 3 * n:]
        tc = TC[t]
        dC = dC + dH * o * (1.0 - tc * tc)
        da = dA[t]
        da[:, :n] = dC * Cs[t] * f * (1.0 - f)
        da[:, n:2 * n] = dC * k * i * (1.0 - i)
        da[:, 2 * n:3 * n] = dC * i * (1.0 - k * k)
        da[:, 3 * n:] = dH * tc * o * (1.0 - o)
        dC = dC * f
        dH = da @ Wh
    _gate_grads(dA, Hs, X, LSTM_GATES, n, grads)


def _gate_grads(dA, Hs, X, gates, n, grads):
    T, B, m = dA.shape
    dA2 = dA.reshape(T * B, m)
    Xt = X.transpose(1, 0, 2).reshape(T * B, -1)
    dWh = dA2.T @ Hs.reshape(T * B, n)
    dWx = dA2.T @ Xt
    db = dA2.sum(axis=0)
    for j, g in enumerate(gates):
        rows = slice(j * n, (j + 1) * n)
        grads[f"W_{g}"] = np.concatenate([dWh[rows], dWx[rows]], axis=1)
        grads[f"b_{g}"] = db[rows]


def _gru_forward(P, X):
    B, T, _ = X.shape
    n = P["W_r"].shape[0]
    Wru = np.concatenate([P["W_r"], P["W_u"]])
    bru = np.concatenate([P["b_r"], P["b_u"]])
    Wru_h, Wru_x = Wru[:, :n], Wru[:, n:]
    Wc_h, Wc_x = P["W_h"][:, :n], P["W_h"][:, n:]
    XRU = X @ Wru_x.T + bru
    XC = X @ Wc_x.T + P["b_h"]
    H = np.zeros((B, n))
    Hs = np.empty((T, B, n))
    RU = np.empty((T, B, 2 * n))
    Cand = np.empty((T, B, n))
    RH = np.empty((T, B, n))
    for t in range(T):
        Hs[t] = H
        ru = RU[t]
        ru[:] = sigmoid(XRU[:, t] + H @ Wru_h.T)
        r, u = ru[:, :n], ru[:, n:]
        RH[t] = r * H
        Cand[t] = np.tanh(XC[:, t] + RH[t] @ Wc_h.T)
        H = H + u * (Cand[t] - H)
    return H, (X, Wru_h, Wc_h, Hs, RU, Cand, RH)


def _gru_backward(cache, dH, grads):
    X, Wru_h, Wc_h, Hs, RU, Cand, RH = cache
    T, B, n = Hs.shape
    dRU = np.empty((T, B, 2 * n))
    dAC = np.empty((T, B, n))
    for t in range(T - 1, -1, -1):
        r, u = RU[t][:, :n], RU[t][:, n:]
        H, c = Hs[t], Cand[t]
        dac = dH * u * (1.0 - c * c)
        dAC[t] = dac
        drh = dac @ Wc_h
        dRU[t][:, :n] = drh * H * r * (1.0 - r)
        dRU[t][:, n:] = dH * (c - H) * u * (1.0 - u)
        dH = dH * (1.0 - u) + drh * r + dRU[t] @ Wru_h
    _gate_grads(dRU, Hs, X, ("r", "u"), n, grads)
    tmp: dict[str, np.ndarray] = {}
    _gate_grads(dAC, RH, X, ("h",), n, tmp)
    grads.update(tmp)


def forward_batch(net: Network, windows):
    """Predictions of shape (batch,) plus the cache needed by backward_batch."""
    X = _as_batch(net, windows)
    P = net.params
    if net.kind is ModelKind.FNN:
        Xf = X.reshape(X.shape[0], -1)
        pre = Xf @ P["W_in"].T + P["b_in"]
        A = apply_activation(net.activation, pre)
        first = (Xf, pre, A)
    elif net.kind is ModelKind.LSTM:
        A, first = _lstm_forward(P, X)
    else:
        A, first = _gru_forward(P, X)
    head = []
    for d in range(1, net.hidden_layers):
        pre = A @ P[f"W_d{d}"].T + P[f"b_d{d}"]
        out = apply_activation(net.activation, pre)
        head.append((A, pre, out))
        A = out
    pred = (A @ P["W_out"].T)[:, 0] + P["b_out"][0]
    return pred, (first, head, A)


def backward_batch(net: Network, cache, dpred) -> dict[str, np.ndarray]:
    """Gradients of a loss with respect to every parameter given dloss/dpred."""
    first, head, A = cache
    P = net.params
    dpred = np.asarray(dpred, dtype=DTYPE)
    grads: dict[str, np.ndarray] = {}
    grads["W_out"] = (dpred @ A)[None, :]
    grads["b_out"] = np.array([dpred.sum()])
    dA = dpred[:, None] * P["W_out"]
    for d in range(net.hidden_layers - 1, 0, -1):
        A_in, pre, out = head[d - 1]
        dpre = dA * activation_grad(net.activation, pre, out)
        grads[f"W_d{d}"] = dpre.T @ A_in
        grads[f"b_d{d}"] = dpre.sum(axis=0)
        dA = dpre @ P[f"W_d{d}"]
    if net.kind is ModelKind.FNN:
        Xf, pre, out = first
        dpre = dA * activation_grad(net.activation, pre, out)
        grads["W_in"] = dpre.T @ Xf
        grads["b_in"] = dpre.sum(axis=0)
    elif net.kind is ModelKind.LSTM:
        _lstm_backward(first, dA, grads)
    else:
        _gru_backward(first, dA, grads)
    return {k: grads[k] for k in P}


def mae_batch(net: Network, windows, targets) -> tuple[float, dict[str, np.ndarray], np.ndarray]:
    """Mean absolute error over a batch, its gradient, and the predictions.

    The subgradient at an exact fit is 0.
    """
    y = np.asarray(targets, dtype=DTYPE)
    pred, cache = forward_batch(net, windows)
    diff = pred - y
    loss = float(np.mean(np.abs(diff)))
    grads = backward_batch(net, cache, np.sign(diff) / diff.shape[0])
    return loss, grads, pred


def predict(net: Network, windows, chunk: int = 4096) -> np.ndarray:
    X = np.asarray(windows, dtype=DTYPE)
    out = [forward_batch(net, X[s:s + chunk])[0] for s in range(0, X.shape[0], chunk)]
    return np.concatenate(out) if out else np.zeros(0)


def sequence_forward(net: Network, window) -> float:
    """Predicted next-quarter value for one (timesteps, features) window."""
    W = np.asarray(window, dtype=DTYPE)
    if W.ndim != 2:
        raise ShapeError(f"window must be (timesteps, features), got shape {W.shape}")
    return float(forward_batch(net, W[None])[0][0])


def backward(net: Network, window, target: float) -> tuple[float, dict[str, np.ndarray]]:
    """Absolute error of one window and its exact gradient."""
    W = np.asarray(window, dtype=DTYPE)
    if W.ndim != 2:
        raise ShapeError(f"window must be (timesteps, features), got shape {W.shape}")
    loss, grads, _ = mae_batch(net, W[None], [target])
    return loss, grads


def fnn_forward(net: Network, x) -> float:
    """FNN output for one already-flattened input vector."""
    if net.kind is not ModelKind.FNN:
        raise ValueError(f"fnn_forward needs an FNN, got {net.kind.value}")
    x = np.asarray(x, dtype=DTYPE)
    if x.shape != (net.input_size,):
        raise ShapeError(f"input has {x.size} values, FNN expects {net.input_size}")
    return float(forward_batch(net, x.reshape(1, 1, -1))[0][0])
