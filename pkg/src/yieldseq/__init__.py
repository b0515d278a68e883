"""Earning-yield forecasting with from-scratch FNN, LSTM and GRU networks."""

__version__ = "0.1.0"
