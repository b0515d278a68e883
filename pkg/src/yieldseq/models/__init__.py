from yieldseq.models.cells import CellState, GRUTrace, LSTMTrace, gru_cell_forward, lstm_cell_forward
from yieldseq.models.engine import backward, backward_batch, fnn_forward, forward_batch, mae_batch, predict, sequence_forward
from yieldseq.models.gradcheck import gradient_check
from yieldseq.models.io import load_model, save_model
from yieldseq.models.network import (GRUParams, LSTMParams, ModelKind, Network, expected_param_count,
                                     init_network, zero_network)

__all__ = [
    "CellState", "GRUTrace", "LSTMTrace", "gru_cell_forward", "lstm_cell_forward",
    "backward", "backward_batch", "fnn_forward", "forward_batch", "mae_batch", "predict", "sequence_forward",
    "gradient_check", "load_model", "save_model",
    "GRUParams", "LSTMParams", "ModelKind", "Network", "expected_param_count", "init_network",
    "zero_network",
]
