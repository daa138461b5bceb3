"""Command-line front end.

Commands: check, preprocess, synth, train, evaluate, sweep, report.
Every run directory gets an effective_config.json with all defaults
resolved, so a finished run can be re-scored (`evaluate`) or reproduced
from its artifacts alone. Output files never embed wall-clock time;
timestamps appear only in auto-generated run directory names.

Exit codes: 0 success, 2 config error, 3 data error, 4 training diverged.
"""
import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from .dataio import load_bundle, write_bundle
from .decoders import MlrModel, net_predict
from .epoching import MOTOR_LAYOUT_21, select_channels
from .errors import ConfigError, DivergedTraining, StageAlreadyApplied, ToolkitError
from .gradkit import load_checkpoint, save_checkpoint
from .harness.experiment import (
    MODEL_KINDS,
    fit_cell_model,
    lag_ms_to_samples,
    prepare_cell,
    run_experiment,
)
from .harness.metrics import evaluate_model, export_trajectories
from .harness.synth import SynthSpec, linear_preset, nonlinear_preset, write_synth_bundle
from .sigproc import (
    FirDesign,
    design_fir,
    downsample_recording,
    downsample_track,
    filter_recording,
    filter_track,
    rereference_average,
    taps_for_transition,
)

CONFIG_DEFAULTS = {
    "bundles": [],
    "model": "mlp",
    "lag_ms": 250,
    "models": ["mlr", "mlp", "cnnlstm"],
    "lags_ms": [150, 200, 250, 300, 350],
    "seed": 0,
    "jobs": 1,
    "n_val": 30,
    "n_test": 30,
    "fit_on_all": False,
    "ridge": 0.0,
    "train": {"lr": 1e-3, "batch_size": 64, "max_epochs": 200, "patience": 10},
    "filters": {
        "bandpass_hz": [0.1, 40.0],
        "bandpass_transition_hz": 0.5,
        "delta_hz": [0.5, 3.0],
        "delta_transition_hz": 0.25,
        "kin_lowpass_hz": 2.0,
        "kin_transition_hz": 0.5,
        "target_rate_hz": 100.0,
        "channels": list(MOTOR_LAYOUT_21),
    },
    "synth": {},   # SynthSpec field overrides
}


def load_config(path) -> dict:
    """Config file merged over defaults; unknown keys are fatal."""
    cfg = json.loads(json.dumps(CONFIG_DEFAULTS))
    if path is None:
        return cfg
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {p} not found")
    try:
        user = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(user) - set(cfg)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, val in user.items():
        if isinstance(cfg[key], dict) and key != "synth":
            if not isinstance(val, dict):
                raise ConfigError(f"config key {key!r} must be an object")
            bad = set(val) - set(cfg[key])
            if bad:
                raise ConfigError(f"unknown keys under {key!r}: {sorted(bad)}")
            cfg[key].update(val)
        else:
            cfg[key] = val
    if cfg["synth"] and not isinstance(cfg["synth"], dict):
        raise ConfigError("config key 'synth' must be an object")
    return cfg


def _config_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:8]


def resolve_out_dir(out, command: str, cfg: dict) -> Path:
    if out is not None:
        p = Path(out)
    else:
        stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
        p = Path("runs") / f"{stamp}-{command}-{_config_hash(cfg)}"
    p.mkdir(parents=True, exist_ok=True)
    return p


def write_effective_config(out_dir: Path, command: str, cfg: dict) -> None:
    payload = {"command": command, "config": cfg}
    (out_dir / "effective_config.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_check(args, cfg) -> int:
    for d in args.bundle:
        b = load_bundle(d)
        print(f"ok {b.participant_id}: {b.recording.n_channels} ch @ "
              f"{b.recording.sample_rate_hz:g} Hz, {b.recording.n_samples} samples, "
              f"{len(b.events)} trials")
    return 0


def _downsample_factor(rate: float, target: float) -> int:
    factor = int(round(rate / target))
    if factor < 1 or abs(rate / target - factor) > 1e-9:
        raise ConfigError(
            f"cannot resample {rate:g} Hz to {target:g} Hz by an integer factor")
    return factor


def cmd_preprocess(args, cfg) -> int:
    bundle = load_bundle(args.in_dir)
    f = cfg["filters"]
    done = {entry.get("step") for entry in bundle.recording.preprocessing_log}
    for step in ("eeg_bandpass", "delta_band", "select_channels"):
        if step in done:
            raise StageAlreadyApplied(f"input bundle already ran step {step!r}")

    rec = bundle.recording
    rate = rec.sample_rate_hz
    bp = design_fir(FirDesign("bandpass", tuple(f["bandpass_hz"]), rate,
                              taps_for_transition(f["bandpass_transition_hz"], rate)))
    rec = filter_recording(rec, bp, "eeg_bandpass")
    rec = rereference_average(rec)
    factor = _downsample_factor(rate, f["target_rate_hz"])
    if factor > 1:
        rec = downsample_recording(rec, factor)
    delta = design_fir(FirDesign("bandpass", tuple(f["delta_hz"]), rec.sample_rate_hz,
                                 taps_for_transition(f["delta_transition_hz"],
                                                     rec.sample_rate_hz)))
    rec = filter_recording(rec, delta, "delta_band")
    rec = select_channels(rec, f["channels"])

    track = bundle.kinematics
    kin_rate = track.sample_rate_hz
    kin = design_fir(FirDesign("lowpass", (f["kin_lowpass_hz"],), kin_rate,
                               taps_for_transition(f["kin_transition_hz"], kin_rate)))
    track = filter_track(track, kin)
    rec = rec.with_data(rec.data, {"step": "kin_lowpass",
                                   "cutoffs_hz": [f["kin_lowpass_hz"]],
                                   "num_taps": kin.design.num_taps})
    kin_factor = _downsample_factor(kin_rate, f["target_rate_hz"])
    if kin_factor > 1:
        track = downsample_track(track, kin_factor)
        rec = rec.with_data(rec.data, {"step": "kin_downsample", "factor": kin_factor})

    out_bundle = bundle.__class__(
        participant_id=bundle.participant_id,
        recording=rec,
        kinematics=track,
        events=list(bundle.events),
        ica_cleaned=bundle.ica_cleaned,
        source=bundle.source,
        extras=dict(bundle.extras),
    ).validate()
    out = resolve_out_dir(args.out, "preprocess", cfg)
    write_bundle(out_bundle, out)
    write_effective_config(out, "preprocess", cfg)
    print(f"preprocessed {bundle.participant_id} -> {out} "
          f"({rec.n_channels} ch @ {rec.sample_rate_hz:g} Hz)")
    return 0


def cmd_synth(args, cfg) -> int:
    if args.preset == "linear":
        spec = linear_preset()
    elif args.preset == "nonlinear":
        spec = nonlinear_preset()
    else:
        spec = SynthSpec()
    known = set(spec.__dataclass_fields__)
    overrides = dict(cfg["synth"])
    bad = set(overrides) - known
    if bad:
        raise ConfigError(f"unknown synth spec fields: {sorted(bad)}")
    for key, val in overrides.items():
        setattr(spec, key, val)
    if args.seed is not None:
        spec.seed = args.seed
    cfg["synth"] = {k: getattr(spec, k) for k in known}
    cfg["seed"] = spec.seed
    out = resolve_out_dir(args.out, "synth", cfg)
    write_synth_bundle(spec, out)
    write_effective_config(out, "synth", cfg)
    print(f"wrote synthetic bundle {spec.participant_id} ({spec.kind}) -> {out}")
    return 0


def _resolve_train_inputs(args, cfg):
    if args.bundle:
        cfg["bundles"] = list(args.bundle)
    if not cfg["bundles"]:
        raise ConfigError("no bundle given; pass --bundle or set 'bundles' in config")
    if args.model:
        cfg["model"] = args.model
    if args.lag_ms is not None:
        cfg["lag_ms"] = int(args.lag_ms) if args.lag_ms == int(args.lag_ms) else args.lag_ms
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.fit_on_all:
        cfg["fit_on_all"] = True
    if args.ridge is not None:
        cfg["ridge"] = args.ridge
    if cfg["model"] not in MODEL_KINDS:
        raise ConfigError(f"unknown model {cfg['model']!r}; pick one of {MODEL_KINDS}")


def _train_once(cfg, out: Path):
    bundle = load_bundle(cfg["bundles"][0])
    lag = lag_ms_to_samples(cfg["lag_ms"], bundle.recording.sample_rate_hz)
    cell = prepare_cell(bundle, lag, n_val=cfg["n_val"], n_test=cfg["n_test"],
                        seed=cfg["seed"], fit_on_all=cfg["fit_on_all"])
    predict, detail, model = fit_cell_model(cfg["model"], cell, cfg["seed"],
                                            ridge=cfg["ridge"],
                                            train_overrides=cfg["train"])
    scored = evaluate_model(predict, cell.test_pairs)

    if cfg["model"] == "mlr":
        model_path = out / "model.json"
        model.save(model_path)
    else:
        model_path = out / "model.ckpt"
        save_checkpoint(model_path, model,
                        meta={"model": cfg["model"], "lag": lag,
                              "lag_ms": cfg["lag_ms"], "seed": cfg["seed"]})
    report = {
        "participant": bundle.participant_id,
        "model": cfg["model"],
        "lag_ms": cfg["lag_ms"],
        "lag_samples": lag,
        "seed": cfg["seed"],
        "detail": detail,
        "r": {axis: float(v) for axis, v in zip("xyz", scored.r)},
        "rows": {"train": len(cell.train[0]), "val": len(cell.val[0]),
                 "test": len(cell.test[0])},
        "dropped_trial_ids": cell.dropped_trial_ids,
        "model_file": model_path.name,
    }
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    export_trajectories(scored, out / "trajectories",
                        bundle.recording.sample_rate_hz)
    return report


def cmd_train(args, cfg) -> int:
    _resolve_train_inputs(args, cfg)
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    out = resolve_out_dir(args.out, "train", cfg)
    write_effective_config(out, "train", cfg)
    report = _train_once(cfg, out)
    r = report["r"]
    print(f"trained {report['model']} lag={report['lag_ms']} ms on "
          f"{report['participant']}: r_x={r['x']:.4f} r_y={r['y']:.4f} "
          f"r_z={r['z']:.4f} -> {out}")
    return 0


def cmd_evaluate(args, cfg) -> int:
    run = Path(args.run)
    cfg_path = run / "effective_config.json"
    if not cfg_path.is_file():
        raise ConfigError(f"{cfg_path} not found; point --run at a train run directory")
    saved = json.loads(cfg_path.read_text())
    if saved.get("command") != "train":
        raise ConfigError(f"{run} is a {saved.get('command')!r} run, expected train")
    rcfg = saved["config"]
    if args.bundle:
        rcfg["bundles"] = list(args.bundle)

    bundle = load_bundle(rcfg["bundles"][0])
    lag = lag_ms_to_samples(rcfg["lag_ms"], bundle.recording.sample_rate_hz)
    cell = prepare_cell(bundle, lag, n_val=rcfg["n_val"], n_test=rcfg["n_test"],
                        seed=rcfg["seed"], fit_on_all=rcfg["fit_on_all"])
    if (run / "model.ckpt").is_file():
        net, meta = load_checkpoint(run / "model.ckpt")
        predict = lambda X: net_predict(net, X, meta["lag"])
    else:
        predict = MlrModel.load(run / "model.json").predict
    scored = evaluate_model(predict, cell.test_pairs, per_trial=args.per_trial)

    out = Path(args.out) if args.out else run
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "participant": bundle.participant_id,
        "model": rcfg["model"],
        "lag_ms": rcfg["lag_ms"],
        "seed": rcfg["seed"],
        "r": {axis: float(v) for axis, v in zip("xyz", scored.r)},
        "rows": {"test": len(cell.test[0])},
    }
    if scored.r_per_trial_mean is not None:
        payload["r_per_trial_mean"] = {
            axis: float(v) for axis, v in zip("xyz", scored.r_per_trial_mean)}
    (out / "evaluation.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    export_trajectories(scored, out / "trajectories",
                        bundle.recording.sample_rate_hz)
    print(f"evaluated {payload['model']} on {payload['participant']}: "
          f"r_x={payload['r']['x']:.4f} r_y={payload['r']['y']:.4f} "
          f"r_z={payload['r']['z']:.4f} -> {out}")
    return 0


def _parse_lags(text: str):
    out = []
    for tok in text.split(","):
        v = float(tok)
        out.append(int(v) if v == int(v) else v)
    return out


def cmd_sweep(args, cfg) -> int:
    if args.bundle:
        cfg["bundles"] = list(args.bundle)
    if not cfg["bundles"]:
        raise ConfigError("no bundles given; pass --bundle or set 'bundles' in config")
    if args.models:
        cfg["models"] = args.models.split(",")
    if args.lags:
        cfg["lags_ms"] = _parse_lags(args.lags)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if args.fit_on_all:
        cfg["fit_on_all"] = True
    if args.ridge is not None:
        cfg["ridge"] = args.ridge
    out = resolve_out_dir(args.out, "sweep", cfg)
    write_effective_config(out, "sweep", cfg)
    report = run_experiment(cfg["bundles"], cfg["models"], cfg["lags_ms"], out,
                            base_seed=cfg["seed"], n_val=cfg["n_val"],
                            n_test=cfg["n_test"], fit_on_all=cfg["fit_on_all"],
                            ridge=cfg["ridge"], train_overrides=cfg["train"],
                            jobs=cfg["jobs"])
    n_ok = sum(1 for c in report["cells"] if "r" in c)
    print(f"swept {len(report['cells'])} cells ({n_ok} ok, "
          f"{len(report['failures'])} failed) -> {out}")
    for cell in report["failures"]:
        print(f"  failed {cell['participant']}/{cell['model']}/{cell['lag_ms']}: "
              f"{cell['error']}", file=sys.stderr)
    return 0


def cmd_report(args, cfg) -> int:
    path = Path(args.run) / "report.json"
    if not path.is_file():
        raise ConfigError(f"{path} not found; point --run at a sweep directory")
    report = json.loads(path.read_text())
    print(f"{'model':<8} {'lag_ms':>6} {'axis':<4} {'mean r':>8} {'std':>8} {'n':>3}")
    for model in sorted(report["aggregates"]):
        for lag_ms in sorted(report["aggregates"][model], key=float):
            for axis in ("x", "y", "z"):
                agg = report["aggregates"][model][lag_ms].get(axis)
                if agg:
                    print(f"{model:<8} {lag_ms:>6} {axis:<4} "
                          f"{agg['mean']:>8.4f} {agg['std']:>8.4f} {agg['n']:>3}")
    if report["failures"]:
        print(f"{len(report['failures'])} cell(s) failed; see report.json")
    return 0


# --------------------------------------------------------------------------
# argument wiring
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eegtraj",
        description="Decode 3-D hand trajectories from pre-movement EEG.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, jobs=False):
        p.add_argument("--config", help="JSON run config; unknown keys rejected")
        p.add_argument("--seed", type=int, help="base random seed")
        p.add_argument("--out", help="output directory (default: runs/<stamp>-<hash>)")
        if jobs:
            p.add_argument("--jobs", type=int, help="parallel workers")

    p = sub.add_parser("check", help="validate bundle directories")
    p.add_argument("bundle", nargs="+", help="bundle directory")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("preprocess", help="filter, re-reference, downsample a raw bundle")
    common(p)
    p.add_argument("--in", dest="in_dir", required=True, help="raw bundle directory")
    p.set_defaults(fn=cmd_preprocess)

    p = sub.add_parser("synth", help="write a synthetic bundle with known coupling")
    common(p)
    p.add_argument("--preset", choices=["linear", "nonlinear"],
                   help="start from a named preset instead of bare defaults")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("train", help="fit one decoder, save checkpoint and report")
    common(p, jobs=True)
    p.add_argument("--bundle", action="append", help="bundle directory")
    p.add_argument("--model", choices=list(MODEL_KINDS), help="decoder kind")
    p.add_argument("--lag-ms", type=float, help="input window length in ms")
    p.add_argument("--fit-on-all", action="store_true",
                   help="fit channel statistics on the whole recording")
    p.add_argument("--ridge", type=float, help="ridge strength for mlr")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("evaluate", help="re-score a finished training run")
    common(p)
    p.add_argument("--run", required=True, help="train run directory")
    p.add_argument("--bundle", action="append",
                   help="override the bundle recorded in the run config")
    p.add_argument("--per-trial", action="store_true",
                   help="also report correlations averaged over test trials")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("sweep", help="participant x model x lag grid")
    common(p, jobs=True)
    p.add_argument("--bundle", action="append", help="bundle directory (repeatable)")
    p.add_argument("--models", help="comma-separated decoder kinds")
    p.add_argument("--lags", help="comma-separated lags in ms")
    p.add_argument("--fit-on-all", action="store_true",
                   help="fit channel statistics on the whole recording")
    p.add_argument("--ridge", type=float, help="ridge strength for mlr")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("report", help="print the aggregate table of a sweep")
    p.add_argument("--run", required=True, help="sweep run directory")
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(getattr(args, "config", None))
        return args.fn(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DivergedTraining as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 4
    except ToolkitError as exc:
        print(f"data error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
