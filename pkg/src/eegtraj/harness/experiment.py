"""Participant x model x lag sweeps with per-cell seeding and reports.

Each grid cell is fully determined by (participant, model, lag_ms,
base_seed): the cell seed is a hash of exactly that tuple, so adding or
removing other cells never shifts anyone's randomness. Cell failures are
recorded in the report instead of aborting the sweep.

Normalization never sees validation or test data: trials that survive the
lag cutoff are split first, channel statistics come from the training
trials' windows only, and the target scaling comes from the training
trials' rows only (--fit-on-all relaxes this deliberately).
"""
import concurrent.futures
import csv
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dataio import load_bundle
from ..decoders import MlrModel, build_decoder, net_predict
from ..epoching import epoch_trials, events_to_indices, split_trials, survivors_for_lag
from ..errors import ConfigError, ToolkitError
from ..sigproc import EegRecording, minmax_apply, minmax_fit, zscore_apply, zscore_fit
from .metrics import mean_std, per_axis_pcc
from .training import TrainConfig, train

MODEL_KINDS = ("mlr", "mlp", "cnnlstm")
AXES = ("x", "y", "z")


def lag_ms_to_samples(lag_ms: float, sample_rate_hz: float) -> int:
    lag = int(round(lag_ms / 1000.0 * sample_rate_hz))
    if lag < 1:
        raise ConfigError(
            f"lag {lag_ms} ms is under one sample at {sample_rate_hz} Hz")
    return lag


def cell_seed(participant: str, model: str, lag_ms: float, base_seed: int) -> int:
    digest = hashlib.sha256(
        f"{participant}|{model}|{lag_ms}|{base_seed}".encode()).hexdigest()
    return int(digest[:16], 16)


@dataclass
class CellData:
    lag: int
    split: object
    eeg_stats: object
    minmax_params: np.ndarray
    train: tuple
    val: tuple
    test: tuple
    test_pairs: list             # per-trial (X, Y) kept for trajectory export
    dropped_trial_ids: list


def prepare_cell(bundle, lag: int, n_val: int = 30, n_test: int = 30,
                 seed: int = 0, fit_on_all: bool = False) -> CellData:
    """Split, normalize, and epoch one participant for one lag."""
    rec = bundle.recording
    track = bundle.kinematics
    kept, _ = survivors_for_lag(bundle.events, rec.sample_rate_hz, lag)
    split = split_trials(kept, n_val, n_test, seed)
    index = {tid: (onset, rest)
             for tid, onset, rest in events_to_indices(bundle.events, rec.sample_rate_hz)}

    if fit_on_all:
        stats = zscore_fit(rec.data)
    else:
        cols = np.concatenate(
            [rec.data[:, index[t][0] - lag + 1:index[t][1] + 1] for t in split.train_ids],
            axis=1)
        stats = zscore_fit(cols)
    standardized = EegRecording(rec.sample_rate_hz, list(rec.channel_names),
                                zscore_apply(rec.data, stats))

    train_rows = np.concatenate(
        [track.data[index[t][0]:index[t][1] + 1] for t in split.train_ids], axis=0)
    params = minmax_fit(train_rows)
    scaled = track.__class__(track.sample_rate_hz,
                             minmax_apply(track.data, params), params)

    result = epoch_trials(standardized, scaled, bundle.events, lag)
    test_set = result.subset(split.test_ids)
    return CellData(
        lag=lag,
        split=split,
        eeg_stats=stats,
        minmax_params=params,
        train=result.subset(split.train_ids).pooled(),
        val=result.subset(split.val_ids).pooled(),
        test=test_set.pooled(),
        test_pairs=test_set.pairs,
        dropped_trial_ids=result.dropped_trial_ids,
    )


def fit_cell_model(model: str, cell: CellData, seed: int, ridge: float = 0.0,
                   train_overrides: dict | None = None):
    """Returns (predict_fn over rows, detail dict, fitted model object)."""
    Xtr, Ytr = cell.train
    if model == "mlr":
        fitted = MlrModel.fit(Xtr, Ytr, ridge=ridge)
        return fitted.predict, {"kind": "mlr", "ridge": ridge}, fitted
    if model not in MODEL_KINDS:
        raise ConfigError(f"unknown model {model!r}; pick one of {MODEL_KINDS}")
    n_channels = Xtr.shape[1] // cell.lag
    net = build_decoder(model, cell.lag, n_channels, seed)
    cfg = TrainConfig(seed=seed, **(train_overrides or {}))
    Xv, Yv = cell.val
    result = train(net, Xtr, Ytr, Xv, Yv, cfg, cell.lag)
    detail = {"kind": model, "epochs": result.stopped_epoch,
              "best_epoch": result.best_epoch,
              "best_val_loss": result.best_val_loss}
    return (lambda X: net_predict(net, X, cell.lag)), detail, net


def _run_cell(task: dict) -> dict:
    out = {k: task[k] for k in ("participant", "model", "lag_ms")}
    out["seed"] = cell_seed(task["participant"], task["model"],
                            task["lag_ms"], task["base_seed"])
    try:
        bundle = load_bundle(task["bundle_dir"])
        lag = lag_ms_to_samples(task["lag_ms"], bundle.recording.sample_rate_hz)
        cell = prepare_cell(bundle, lag, n_val=task["n_val"], n_test=task["n_test"],
                            seed=out["seed"], fit_on_all=task["fit_on_all"])
        predict, detail, _ = fit_cell_model(task["model"], cell, out["seed"],
                                            ridge=task["ridge"],
                                            train_overrides=task["train_overrides"])
        Xte, Yte = cell.test
        r = per_axis_pcc(predict(Xte), Yte)
        out["r"] = {axis: float(v) for axis, v in zip(AXES, r)}
        out["detail"] = detail
    except ToolkitError as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def run_experiment(bundle_dirs, models, lags_ms, out_dir, base_seed: int = 0,
                   n_val: int = 30, n_test: int = 30, fit_on_all: bool = False,
                   ridge: float = 0.0, train_overrides: dict | None = None,
                   jobs: int = 1) -> dict:
    """Full sweep; writes report.csv and report.json under out_dir."""
    for m in models:
        if m not in MODEL_KINDS:
            raise ConfigError(f"unknown model {m!r}; pick one of {MODEL_KINDS}")
    participants = []
    for d in bundle_dirs:
        manifest = json.loads((Path(d) / "manifest.json").read_text())
        participants.append((manifest["participant_id"], str(d)))

    tasks = [
        {"participant": pid, "bundle_dir": d, "model": model, "lag_ms": lag_ms,
         "base_seed": base_seed, "n_val": n_val, "n_test": n_test,
         "fit_on_all": fit_on_all, "ridge": ridge,
         "train_overrides": train_overrides}
        for pid, d in participants
        for model in models
        for lag_ms in lags_ms
    ]

    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell, tasks))
    else:
        cells = [_run_cell(t) for t in tasks]
    cells.sort(key=lambda c: (c["participant"], c["model"], c["lag_ms"]))

    aggregates = {}
    for model in sorted(set(models)):
        aggregates[model] = {}
        for lag_ms in sorted(set(lags_ms)):
            per_axis = {}
            for axis in AXES:
                vals = [c["r"][axis] for c in cells
                        if c["model"] == model and c["lag_ms"] == lag_ms and "r" in c]
                if vals:
                    m, s = mean_std(vals)
                    per_axis[axis] = {"mean": m, "std": s, "n": len(vals)}
            aggregates[model][str(lag_ms)] = per_axis

    report = {
        "config": {
            "bundles": [d for _, d in participants],
            "participants": [p for p, _ in participants],
            "models": list(models),
            "lags_ms": list(lags_ms),
            "base_seed": base_seed,
            "n_val": n_val,
            "n_test": n_test,
            "fit_on_all": fit_on_all,
            "ridge": ridge,
            "train_overrides": train_overrides or {},
        },
        "cells": cells,
        "aggregates": aggregates,
        "failures": [c for c in cells if "error" in c],
    }

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["participant", "model", "lag_ms", "axis", "r"])
    for c in cells:
        if "r" not in c:
            continue
        for axis in AXES:
            writer.writerow([c["participant"], c["model"], c["lag_ms"],
                             axis, "%.6f" % c["r"][axis]])
    (out / "report.csv").write_text(buf.getvalue())
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return report
