"""Plain-text model files.

Layout::

    yieldseq-model 1 kind=lstm input_size=14 hidden=76 hidden_layers=2 activation=relu
    W_f 76 90
    <one line per row, values in %.17g>
    ...
    b_out 1 1
    <value>
    end

Vectors are written as single-row blocks. 17 significant digits make
the float64 round trip exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from yieldseq.models.network import ModelKind, Network, param_shapes
from yieldseq.numcore import ActivationKind

MAGIC = "yieldseq-model"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _fmt(v: float) -> str:
    return "%.17g" % v


def dumps(net: Network) -> str:
    lines = [f"{MAGIC} {FORMAT_VERSION} kind={net.kind.value} input_size={net.input_size} "
             f"hidden={net.hidden} hidden_layers={net.hidden_layers} activation={net.activation.value}"]
    for name, p in net.params.items():
        m = p.reshape(1, -1) if p.ndim == 1 else p
        lines.append(f"{name} {m.shape[0]} {m.shape[1]}")
        lines.extend(" ".join(_fmt(v) for v in row) for row in m)
    lines.append("end")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Network:
    lines = text.splitlines()
    if not lines:
        raise ModelFormatError("empty model file")
    head = lines[0].split()
    if len(head) < 2 or head[0] != MAGIC:
        raise ModelFormatError(f"line 1: not a {MAGIC} file")
    if head[1] != str(FORMAT_VERSION):
        raise ModelFormatError(f"line 1: unsupported format version {head[1]}")
    try:
        meta = dict(item.split("=", 1) for item in head[2:])
        kind = ModelKind(meta["kind"])
        input_size, hidden = int(meta["input_size"]), int(meta["hidden"])
        layers = int(meta["hidden_layers"])
        activation = ActivationKind(meta["activation"])
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"line 1: bad header ({exc})") from exc

    expected = param_shapes(kind, input_size, hidden, layers)
    params: dict[str, np.ndarray] = {}
    pos = 1
    for name, shape in expected.items():
        rows, cols = (1, shape[0]) if len(shape) == 1 else shape
        if pos >= len(lines) or lines[pos].split() != [name, str(rows), str(cols)]:
            raise ModelFormatError(f"line {pos + 1}: expected block header '{name} {rows} {cols}'")
        block = lines[pos + 1:pos + 1 + rows]
        try:
            data = np.array([[float(v) for v in ln.split()] for ln in block])
        except ValueError as exc:
            raise ModelFormatError(f"block {name}: {exc}") from exc
        if data.shape != (rows, cols):
            raise ModelFormatError(f"block {name}: expected {rows}x{cols} values")
        params[name] = data.reshape(shape)
        pos += 1 + rows
    if pos >= len(lines) or lines[pos].strip() != "end":
        raise ModelFormatError(f"line {pos + 1}: expected 'end'")
    return Network(kind, input_size, hidden, layers, activation, params)


def save_model(net: Network, path) -> None:
    Path(path).write_text(dumps(net), encoding="utf-8")


def load_model(path) -> Network:
    return loads(Path(path).read_text(encoding="utf-8"))
