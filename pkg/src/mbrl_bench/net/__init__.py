"""Minimal MLP with reverse-mode gradients and an Adam optimizer."""

from .autodiff import NonFiniteLossError, Tensor, concat, value_and_grad
from .mlp import MlpParams, forward, grad, init_mlp, load_params, save_params
from .optim import OptimizerState, opt_step

__all__ = [
    "Tensor", "concat", "value_and_grad", "NonFiniteLossError",
    "MlpParams", "init_mlp", "forward", "grad", "save_params", "load_params",
    "OptimizerState", "opt_step",
]
