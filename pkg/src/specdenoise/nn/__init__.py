"""From-scratch neural-network core: layers, losses, Adam, gradient checking."""

from . import checkpoint
from .gradcheck import gradcheck
from .layers import (
    Conv2D,
    Layer,
    MaxPool2x2,
    ReLU,
    Sequential,
    Sigmoid,
    UpsampleNearest2x2,
)
from .losses import LOSSES, bce, get_loss, mse
from .optim import Adam

__all__ = [
    "Adam",
    "Conv2D",
    "LOSSES",
    "Layer",
    "MaxPool2x2",
    "ReLU",
    "Sequential",
    "Sigmoid",
    "UpsampleNearest2x2",
    "bce",
    "checkpoint",
    "get_loss",
    "gradcheck",
    "mse",
]
