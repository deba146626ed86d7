"""Learned dynamics: datasets, normalization, ensembles and propagation."""

from .dataset import Normalizer, TransitionDataset, fit_normalizer
from .ensemble import (
    DynamicsConfig,
    DynamicsEnsemble,
    load_ensemble,
    multistep_loss,
    new_ensemble,
    predict,
    save_ensemble,
    single_step_loss,
    train,
    train_deterministic,
    train_multistep,
    train_probabilistic,
)
from .propagate import MODES, PropagationMode, draw_noise, propagate, propagate_batch

__all__ = [
    "TransitionDataset", "Normalizer", "fit_normalizer",
    "DynamicsConfig", "DynamicsEnsemble", "new_ensemble", "predict",
    "train", "train_deterministic", "train_probabilistic", "train_multistep",
    "single_step_loss", "multistep_loss", "save_ensemble", "load_ensemble",
    "PropagationMode", "MODES", "propagate", "propagate_batch", "draw_noise",
]
