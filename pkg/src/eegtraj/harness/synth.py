"""Synthetic participant bundles with known EEG-to-trajectory coupling.

The EEG is filtered white noise (so it has realistic temporal structure
but a well-conditioned covariance), cast to float32 before the targets
are computed. Bundles store EEG as float32, so a decoder fit on a loaded
bundle sees exactly the samples the targets came from and a linear
coupling is recoverable to float precision.

Couplings over the most recent `lag` samples of every channel:

    linear:     y = beta @ window + alpha
    nonlinear:  a = w1 @ window
                y = w2_linear @ a + w2_magnitude @ (|a| - E|a|) + alpha

w1 rows are temporally smooth and each touches only a few channels, so
the map stays learnable from delta-band-like inputs. The nonlinear family
couples the targets to the magnitude of the latent drives as well as to
their signed value, the way limb speed tracks the envelope of a cortical
rhythm rather than its phase. For zero-mean Gaussian inputs E[|a| g] = 0
for every linear functional g, so the magnitude term is invisible to a
linear readout: its best possible correlation is 1/sqrt(1 + mix^2) where
`magnitude_mix` sets the magnitude-to-linear amplitude ratio. A rectifier
network represents |a| exactly (relu(a) + relu(-a)), so the same term is
cheap for the neural decoders.
"""
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .. import accel
from ..dataio import ParticipantBundle, TrialEvent, write_bundle
from ..epoching import MOTOR_LAYOUT_21
from ..errors import ConfigError
from ..sigproc import EegRecording, FirDesign, KinematicsTrack, design_fir, filtfilt

SYNTH_KINDS = ("linear", "nonlinear")


@dataclass
class SynthSpec:
    kind: str = "linear"
    participant_id: str = "SYN1"
    n_channels: int = 21
    sample_rate_hz: float = 100.0
    n_trials: int = 200
    trial_s: float = 0.8
    gap_s: float = 1.0
    lead_in_s: float = 2.0
    lag: int = 25                      # coupling depth in samples
    hidden: int = 16                   # nonlinear only
    magnitude_mix: float = 0.95        # nonlinear only, magnitude/linear ratio
    target_noise: float = 0.0          # std of additive noise on the targets
    eeg_snr_db: Optional[float] = None # None = noise-free observations
    color_cutoff_hz: float = 30.0      # lowpass shaping of the source noise
    seed: int = 0

    def validate(self):
        if self.kind not in SYNTH_KINDS:
            raise ConfigError(f"kind must be one of {SYNTH_KINDS}, got {self.kind!r}")
        if self.n_trials < 3 or self.n_channels < 1 or self.lag < 1:
            raise ConfigError("need at least 3 trials, 1 channel, lag >= 1")
        if self.trial_s <= 0 or self.gap_s <= 0:
            raise ConfigError("trial and gap durations must be positive")
        if self.hidden < 1 or self.magnitude_mix < 0:
            raise ConfigError("hidden must be >= 1 and magnitude_mix >= 0")
        if self.lead_in_s * self.sample_rate_hz < self.lag:
            raise ConfigError("lead-in must cover at least one full lag window")
        return self


def linear_preset(seed: int = 0, n_channels: int = 3, lag: int = 5,
                  n_trials: int = 40) -> SynthSpec:
    """Small well-conditioned bundle for exact-recovery checks."""
    return SynthSpec(kind="linear", n_channels=n_channels, lag=lag,
                     n_trials=n_trials, seed=seed)


def nonlinear_preset(seed: int = 0) -> SynthSpec:
    """Full-size bundle where magnitude coupling caps any linear readout."""
    return SynthSpec(kind="nonlinear", n_channels=21, lag=25, n_trials=200,
                     trial_s=1.0, hidden=8, magnitude_mix=0.95,
                     target_noise=0.05, seed=seed)


def _channel_names(n: int) -> list:
    if n <= len(MOTOR_LAYOUT_21):
        return MOTOR_LAYOUT_21[:n]
    return MOTOR_LAYOUT_21 + [f"X{i}" for i in range(n - len(MOTOR_LAYOUT_21))]


def _colored_noise(rng, n_channels, n_samples, cutoff_hz, fs):
    white = rng.standard_normal((n_channels, n_samples + 600))
    filt = design_fir(FirDesign("lowpass", (min(cutoff_hz, 0.98 * fs / 2),), fs, 61))
    colored = filtfilt(filt, white)[:, 300:300 + n_samples]
    colored -= colored.mean(axis=1, keepdims=True)
    colored /= colored.std(axis=1, keepdims=True)
    return colored


def _smooth_sparse_w1(rng, hidden, n_channels, lag):
    """Each unit reads 2-3 channels through a smooth temporal bump."""
    w1 = np.zeros((hidden, n_channels * lag))
    taper = np.hanning(lag + 2)[1:-1]
    for h in range(hidden):
        for ch in rng.choice(n_channels, size=min(3, n_channels), replace=False):
            center = rng.integers(0, lag)
            profile = np.roll(taper, center - lag // 2)
            w1[h, ch * lag:(ch + 1) * lag] = rng.uniform(0.5, 1.5) * rng.choice([-1, 1]) * profile
    norms = np.linalg.norm(w1, axis=1, keepdims=True)
    return w1 / norms


def _full_lag_matrix(v: np.ndarray, lag: int) -> np.ndarray:
    """Lag-embedded rows for every sample, zero-padded before the start."""
    n_ch, n = v.shape
    padded = np.concatenate([np.zeros((n_ch, lag - 1)), v], axis=1)
    return accel.lag_embed(np.ascontiguousarray(padded), lag - 1, n + lag - 2, lag)


def synth_generate(spec: SynthSpec):
    """Returns (bundle, ground_truth dict); deterministic in the spec."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    fs = spec.sample_rate_hz
    period = spec.gap_s + spec.trial_s
    total_s = spec.lead_in_s + spec.n_trials * period + 1.0
    n = int(round(total_s * fs))

    source = _colored_noise(rng, spec.n_channels, n, spec.color_cutoff_hz, fs)
    source32 = source.astype(np.float32).astype(np.float64)

    X = _full_lag_matrix(source32, spec.lag)
    alpha = rng.uniform(-50.0, 50.0, 3)
    truth = {"kind": spec.kind, "lag": spec.lag, "alpha": alpha.tolist(),
             "spec": {k: v for k, v in asdict(spec).items()}}
    if spec.kind == "linear":
        beta = rng.uniform(-1.0, 1.0, (spec.n_channels * spec.lag, 3))
        beta *= 10.0 / np.sqrt(spec.n_channels * spec.lag)
        Y = X @ beta + alpha
        truth["beta"] = beta.tolist()
    else:
        w1 = _smooth_sparse_w1(rng, spec.hidden, spec.n_channels, spec.lag)
        acts = X @ w1.T
        act_std = acts.std(axis=0)
        acts /= act_std
        centered_abs = np.abs(acts) - np.abs(acts).mean(axis=0)
        # normalize both paths per axis so magnitude_mix is an exact
        # amplitude ratio, then scale into a mm-like range
        w2_lin = rng.uniform(-1.0, 1.0, (spec.hidden, 3))
        w2_mag = rng.uniform(-1.0, 1.0, (spec.hidden, 3))
        w2_lin *= 30.0 / (acts @ w2_lin).std(axis=0)
        w2_mag *= 30.0 * spec.magnitude_mix / (centered_abs @ w2_mag).std(axis=0)
        Y = acts @ w2_lin + centered_abs @ w2_mag + alpha
        truth["w1"] = w1.tolist()
        truth["act_std"] = act_std.tolist()
        truth["abs_mean"] = (np.abs(acts).mean(axis=0)).tolist()
        truth["w2_linear"] = w2_lin.tolist()
        truth["w2_magnitude"] = w2_mag.tolist()
        truth["magnitude_mix"] = spec.magnitude_mix
    if spec.target_noise > 0:
        Y = Y + spec.target_noise * Y.std(axis=0) * rng.standard_normal(Y.shape)

    observed = source32
    if spec.eeg_snr_db is not None:
        noise_std = 10.0 ** (-spec.eeg_snr_db / 20.0)   # source has unit variance
        observed = source32 + noise_std * rng.standard_normal(source32.shape)

    events = []
    jitter = rng.uniform(0.0, 0.3, spec.n_trials)
    for i in range(spec.n_trials):
        onset = spec.lead_in_s + i * period + jitter[i]
        events.append(TrialEvent(i + 1, round(onset, 6), round(onset + spec.trial_s, 6)))

    rec = EegRecording(fs, _channel_names(spec.n_channels), observed,
                       preprocessing_log=[{"step": "synthetic_source",
                                           "kind": spec.kind, "seed": spec.seed}])
    track = KinematicsTrack(fs, Y)
    bundle = ParticipantBundle(
        participant_id=spec.participant_id,
        recording=rec,
        kinematics=track,
        events=events,
        ica_cleaned=True,
        source="synthetic",
        extras={"ground_truth.json": truth},
    )
    return bundle.validate(), truth


def write_synth_bundle(spec: SynthSpec, out_dir) -> Path:
    bundle, _ = synth_generate(spec)
    out = Path(out_dir)
    write_bundle(bundle, out)
    return out
