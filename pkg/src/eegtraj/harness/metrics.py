"""Correlation metrics, model evaluation, and trajectory export."""
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ShapeError, UndefinedCorrelation

VAR_FLOOR = 1e-15


def pcc(x, y) -> float:
    """Pearson correlation, computed as cov / sqrt(varx * vary).

    The single square root over the variance product keeps exactly
    representable ratios exact. Population (1/n) moments throughout.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ShapeError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise UndefinedCorrelation("need at least two samples")
    dx = x - x.mean()
    dy = y - y.mean()
    varx = np.mean(dx * dx)
    vary = np.mean(dy * dy)
    if varx <= VAR_FLOOR * max(1.0, np.mean(x * x)) or \
       vary <= VAR_FLOOR * max(1.0, np.mean(y * y)):
        raise UndefinedCorrelation("constant input has no defined correlation")
    return float(np.mean(dx * dy) / np.sqrt(varx * vary))


def per_axis_pcc(pred: np.ndarray, true: np.ndarray) -> np.ndarray:
    """Column-wise correlation between prediction and target matrices."""
    pred = np.asarray(pred, dtype=np.float64)
    true = np.asarray(true, dtype=np.float64)
    if pred.shape != true.shape or pred.ndim != 2:
        raise ShapeError(f"matching 2-D arrays required: {pred.shape} vs {true.shape}")
    return np.array([pcc(pred[:, a], true[:, a]) for a in range(pred.shape[1])])


def mean_std(values) -> tuple:
    """Mean and population standard deviation of a flat collection."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise UndefinedCorrelation("no values to aggregate")
    return float(arr.mean()), float(arr.std())


@dataclass
class TrialTrajectory:
    trial_id: int
    measured: np.ndarray   # [rows, 3]
    predicted: np.ndarray  # [rows, 3]


@dataclass
class EvalResult:
    r: np.ndarray                # per axis, over concatenated test rows
    trials: list                 # TrialTrajectory per test trial
    r_per_trial_mean: np.ndarray | None = None


def evaluate_model(predict, pairs, per_trial: bool = False) -> EvalResult:
    """Score a row-wise predictor on epoched trial pairs.

    The reported r concatenates all test rows per axis; `per_trial`
    additionally averages the per-trial correlations.
    """
    if not pairs:
        raise ShapeError("no test trials to evaluate")
    trials = [TrialTrajectory(p.trial_id, np.asarray(p.Y, dtype=np.float64),
                              np.asarray(predict(p.X), dtype=np.float64))
              for p in pairs]
    pred = np.concatenate([t.predicted for t in trials], axis=0)
    meas = np.concatenate([t.measured for t in trials], axis=0)
    r = per_axis_pcc(pred, meas)
    r_mean = None
    if per_trial:
        per = np.stack([per_axis_pcc(t.predicted, t.measured) for t in trials])
        r_mean = per.mean(axis=0)
    return EvalResult(r=r, trials=trials, r_per_trial_mean=r_mean)


def export_trajectories(result: EvalResult, out_dir,
                        sample_rate_hz: float) -> list:
    """One measured-vs-predicted CSV per test trial; returns the paths.

    Measured values pass through unchanged (shortest-roundtrip decimal),
    so the exported column parses back to the input targets exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for trial in result.trials:
        meas, pred = trial.measured, trial.predicted
        if meas.shape != pred.shape or meas.ndim != 2 or meas.shape[1] != 3:
            raise ShapeError(
                f"matching [rows, 3] arrays required: {meas.shape} vs {pred.shape}")
        buf = io.StringIO()
        buf.write("t_s,x_meas,y_meas,z_meas,x_pred,y_pred,z_pred\n")
        for i in range(meas.shape[0]):
            row = [i / sample_rate_hz, *meas[i], *pred[i]]
            buf.write(",".join(str(float(v)) for v in row) + "\n")
        path = out / f"trial_{trial.trial_id:04d}.csv"
        path.write_text(buf.getvalue())
        paths.append(path)
    return paths
