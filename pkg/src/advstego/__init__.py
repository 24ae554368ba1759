"""FGSM adversarial perturbation and LSB payload injection against a
desk-scale dense image classifier."""

__version__ = "0.1.0"

from .attack import AttackConfig, fgsm, linf_distance
from .checkpoint import load_checkpoint, save_checkpoint
from .diffnet import (
    Layer,
    Network,
    Prediction,
    TrainConfig,
    forward,
    grad_input,
    grad_params,
    init_network,
    loss,
    predict,
    train,
)
from .image import Image8
from .pipeline import ExperimentReport, confidence_increase_fraction, run_experiment, summarize
from .stego import StegoConfig, capacity, extract, inject

__all__ = [
    "AttackConfig", "ExperimentReport", "Image8", "Layer", "Network", "Prediction",
    "StegoConfig", "TrainConfig", "capacity", "confidence_increase_fraction", "extract",
    "fgsm", "forward", "grad_input", "grad_params", "init_network", "inject",
    "linf_distance", "load_checkpoint", "loss", "predict", "run_experiment",
    "save_checkpoint", "summarize", "train",
]
