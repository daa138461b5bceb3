"""Experiment harness: metrics, training loop, synthetic data, sweeps."""
from .metrics import (
    EvalResult,
    evaluate_model,
    export_trajectories,
    mean_std,
    pcc,
    per_axis_pcc,
)
from .training import EarlyStopper, TrainConfig, TrainResult, train
from .synth import SynthSpec, linear_preset, nonlinear_preset, synth_generate, write_synth_bundle
from .experiment import CellData, prepare_cell, run_experiment
from .reference import REFERENCE_AVERAGE_PCC

__all__ = [
    "mean_std", "pcc", "per_axis_pcc", "evaluate_model", "EvalResult",
    "export_trajectories",
    "EarlyStopper", "TrainConfig", "TrainResult", "train",
    "SynthSpec", "linear_preset", "nonlinear_preset", "synth_generate",
    "write_synth_bundle",
    "CellData", "prepare_cell", "run_experiment",
    "REFERENCE_AVERAGE_PCC",
]
