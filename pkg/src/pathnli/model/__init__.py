"""Hierarchical recurrent path-entailment model: parameters, kernels,
network math, and training."""

from .kernels import BACKEND, get_backends, lstm_backward, lstm_forward
from .network import (Trace, backward, canonical_premise, embed_tokens,
                      forward, instance_loss, loss_from_trace, predict)
from .params import (LSTMParams, ModelParams, init_lstm, init_model,
                     load_checkpoint, save_checkpoint, zero_like_tensors)
from .training import Adam, TrainResult, train_model

__all__ = [
    "BACKEND", "get_backends", "lstm_backward", "lstm_forward",
    "Trace", "backward", "canonical_premise", "embed_tokens", "forward",
    "instance_loss", "loss_from_trace", "predict",
    "LSTMParams", "ModelParams", "init_lstm", "init_model",
    "load_checkpoint", "save_checkpoint", "zero_like_tensors",
    "Adam", "TrainResult", "train_model",
]
