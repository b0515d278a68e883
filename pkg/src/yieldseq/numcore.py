"""Dense numeric helpers shared by every network.

Matrices and vectors are plain float64 numpy arrays stored row-major
(C order). The functions here add the shape checks and the fixed
initialisation/activation rules the models rely on.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy.special import expit

DTYPE = np.float64


class ShapeError(ValueError):
    """Raised when operand shapes do not conform."""


class ActivationKind(str, enum.Enum):
    SIGMOID = "sigmoid"
    TANH = "tanh"
    RELU = "relu"
    IDENTITY = "identity"


class SeededRng:
    """Deterministic random source.

    Backed by numpy's PCG64 bit generator (O'Neill's permuted congruential
    generator, 128-bit state, 64-bit output), whose stream for a given seed
    is fixed across platforms and numpy releases. Single owner only: every
    draw advances the state.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def uniform(self, low: float, high: float, shape=None):
        return self._gen.uniform(low, high, size=shape)

    def normal(self, loc: float = 0.0, scale: float = 1.0, shape=None):
        return self._gen.normal(loc, scale, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, low: int, high: int, shape=None) -> np.ndarray:
        return self._gen.integers(low, high, size=shape)

    def spawn_seed(self) -> int:
        """Draw a fresh 63-bit seed for a child generator."""
        return int(self._gen.integers(0, 2**63))


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=DTYPE)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def as_vector(v) -> np.ndarray:
    x = np.asarray(v, dtype=DTYPE)
    if x.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {x.shape}")
    return x


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def sigmoid(x) -> np.ndarray:
    # expit does not overflow for large |x|.
    return expit(np.asarray(x, dtype=DTYPE))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def apply_activation(kind: ActivationKind | str, v) -> np.ndarray:
    """Elementwise activation. Accepts arrays of any rank."""
    kind = ActivationKind(kind)
    x = np.asarray(v, dtype=DTYPE)
    if kind is ActivationKind.SIGMOID:
        return sigmoid(x)
    if kind is ActivationKind.TANH:
        return np.tanh(x)
    if kind is ActivationKind.RELU:
        return relu(x)
    return x.copy()


def activation_grad(kind: ActivationKind | str, pre: np.ndarray, out: np.ndarray) -> np.ndarray:
    """Derivative of the activation at ``pre`` given its output ``out``.

    ReLU uses 0 at the kink.
    """
    kind = ActivationKind(kind)
    if kind is ActivationKind.SIGMOID:
        return out * (1.0 - out)
    if kind is ActivationKind.TANH:
        return 1.0 - out * out
    if kind is ActivationKind.RELU:
        return (pre > 0).astype(DTYPE)
    return np.ones_like(pre)


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def glorot_uniform(fan_in: int, fan_out: int, rng: SeededRng) -> np.ndarray:
    """fan_out x fan_in matrix drawn uniformly on [-L, L], L = sqrt(6/(fan_in+fan_out))."""
    if fan_in < 1 or fan_out < 1:
        raise ValueError(f"fan_in and fan_out must be >= 1, got {fan_in}, {fan_out}")
    bound = glorot_bound(fan_in, fan_out)
    return rng.uniform(-bound, bound, (fan_out, fan_in))


def concat(h, x) -> np.ndarray:
    """[h, x]: hidden state first, then input."""
    return np.concatenate([as_vector(h), as_vector(x)])
