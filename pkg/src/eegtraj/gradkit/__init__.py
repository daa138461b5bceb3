"""Minimal reverse-mode autodiff over numpy arrays.

tensor:     the Tensor node type, elementwise/matrix primitives, no_grad
layers:     neural layers whose heavy ops call the accel kernels
optim:      Adam with bias correction
checks:     finite-difference gradient verification
checkpoint: single-file save/load of a network plus metadata
"""
from .tensor import Tensor, mse, no_grad
from .layers import (
    BatchNorm,
    Conv1d,
    Dense,
    Dropout,
    Lstm,
    MaxPool1d,
    Network,
    network_from_specs,
)
from .optim import Adam, adam_step
from .checks import grad_check
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Tensor", "mse", "no_grad",
    "BatchNorm", "Conv1d", "Dense", "Dropout", "Lstm", "MaxPool1d",
    "Network", "network_from_specs",
    "Adam", "adam_step",
    "grad_check",
    "load_checkpoint", "save_checkpoint",
]
