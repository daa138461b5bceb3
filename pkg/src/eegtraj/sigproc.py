"""FIR design, zero-phase filtering, resampling, and the two normalizations.

All filters are type-I linear-phase FIR (odd tap count, symmetric taps)
designed by windowed sinc with a Hamming window. Zero-phase filtering runs
the filter forward and backward over a reflection-padded signal, so the
effective magnitude response is the square of the single-pass response.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from .errors import (
    DegenerateRange,
    InvalidCutoff,
    InvalidFactor,
    InvalidTaps,
    NeedsMultipleChannels,
    ShapeError,
    SignalTooShort,
    ZeroVariance,
)

EPS_VARIANCE = 1e-12


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass
class FirDesign:
    """Parameters of a windowed-sinc FIR filter.

    kind: 'lowpass', 'highpass', or 'bandpass'
    cutoffs_hz: one cutoff for low/highpass, two (increasing) for bandpass
    """
    kind: str
    cutoffs_hz: tuple
    sample_rate_hz: float
    num_taps: int
    window: str = "hamming"


@dataclass
class FirFilter:
    coefficients: np.ndarray
    design: FirDesign

    @property
    def num_taps(self) -> int:
        return len(self.coefficients)


@dataclass
class EegRecording:
    """Multichannel sampled signal, channels along rows."""
    sample_rate_hz: float
    channel_names: list
    data: np.ndarray                       # [channels, samples]
    preprocessing_log: list = field(default_factory=list)

    def validate(self):
        if self.sample_rate_hz <= 0:
            raise ShapeError("sample rate must be positive")
        if self.data.ndim != 2 or self.data.shape[0] != len(self.channel_names):
            raise ShapeError(
                f"data has {self.data.shape[0]} rows for "
                f"{len(self.channel_names)} channel names"
            )
        if len(set(self.channel_names)) != len(self.channel_names):
            raise ShapeError("channel names must be unique")
        return self

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def with_data(self, data, log_entry=None, sample_rate_hz=None):
        """Copy with replaced samples and an appended log entry."""
        log = list(self.preprocessing_log)
        if log_entry is not None:
            log.append(dict(log_entry))
        return EegRecording(
            sample_rate_hz=sample_rate_hz or self.sample_rate_hz,
            channel_names=list(self.channel_names),
            data=data,
            preprocessing_log=log,
        ).validate()


@dataclass
class KinematicsTrack:
    """3-D hand positions, one (x, y, z) row per sample."""
    sample_rate_hz: float
    data: np.ndarray                       # [samples, 3]
    normalization_params: Optional[np.ndarray] = None   # [3, 2] of (min, max)

    def validate(self):
        if self.sample_rate_hz <= 0:
            raise ShapeError("sample rate must be positive")
        if self.data.ndim != 2 or self.data.shape[1] != 3:
            raise ShapeError("kinematics must have exactly 3 columns")
        if self.normalization_params is not None:
            p = np.asarray(self.normalization_params, dtype=float)
            if p.shape != (3, 2) or not np.all(p[:, 0] < p[:, 1]):
                raise DegenerateRange("stored min must be < max per axis")
        return self

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]


# --------------------------------------------------------------------------
# FIR design
# --------------------------------------------------------------------------

def taps_for_transition(transition_hz: float, sample_rate_hz: float) -> int:
    """Hamming design rule: ~3.3 / normalized transition width, rounded up to odd."""
    n = int(np.ceil(3.3 / (transition_hz / sample_rate_hz)))
    return n if n % 2 == 1 else n + 1


def _windowed_sinc_lowpass(cutoff_hz, sample_rate_hz, num_taps):
    mid = (num_taps - 1) // 2
    m = np.abs(np.arange(num_taps) - mid).astype(float)
    fc = 2.0 * cutoff_hz / sample_rate_hz
    ideal = fc * np.sinc(fc * m)
    if num_taps == 1:
        window = np.ones(1)
    else:
        window = 0.54 + 0.46 * np.cos(np.pi * m / mid)
    return ideal * window


def amplitude_response(taps: np.ndarray, freqs_hz, sample_rate_hz: float) -> np.ndarray:
    """Real-valued amplitude A(f) of a symmetric FIR (phase removed)."""
    taps = np.asarray(taps, dtype=float)
    mid = (len(taps) - 1) / 2.0
    m = np.arange(len(taps)) - mid
    f = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
    ang = 2.0 * np.pi * np.outer(f, m) / sample_rate_hz
    return np.cos(ang) @ taps


def design_fir(design: FirDesign) -> FirFilter:
    """Windowed-sinc taps, symmetric, unit gain at the passband center."""
    n = design.num_taps
    if not isinstance(n, (int, np.integer)) or n < 1 or n % 2 == 0:
        raise InvalidTaps(f"num_taps must be a positive odd integer, got {n!r}")
    fs = design.sample_rate_hz
    nyq = fs / 2.0
    cuts = tuple(float(c) for c in np.atleast_1d(design.cutoffs_hz))
    for c in cuts:
        if not 0.0 < c < nyq:
            raise InvalidCutoff(f"cutoff {c} Hz outside (0, {nyq}) at fs={fs}")
    if design.window != "hamming":
        raise InvalidTaps(f"unsupported window {design.window!r}")

    if design.kind == "lowpass":
        if len(cuts) != 1:
            raise InvalidCutoff("lowpass takes exactly one cutoff")
        taps = _windowed_sinc_lowpass(cuts[0], fs, n)
        center = 0.0
    elif design.kind == "highpass":
        if len(cuts) != 1:
            raise InvalidCutoff("highpass takes exactly one cutoff")
        taps = -_windowed_sinc_lowpass(cuts[0], fs, n)
        taps[(n - 1) // 2] += 1.0
        center = nyq * (1.0 - 1e-9)
    elif design.kind == "bandpass":
        if len(cuts) != 2 or not cuts[0] < cuts[1]:
            raise InvalidCutoff("bandpass takes two strictly increasing cutoffs")
        taps = (_windowed_sinc_lowpass(cuts[1], fs, n)
                - _windowed_sinc_lowpass(cuts[0], fs, n))
        center = 0.5 * (cuts[0] + cuts[1])
    else:
        raise InvalidCutoff(f"unknown filter kind {design.kind!r}")

    gain = amplitude_response(taps, center, fs)[0]
    taps = taps / gain
    return FirFilter(coefficients=taps, design=FirDesign(design.kind, cuts, fs, n, design.window))


# Defaults used by the preprocessing chain; tap counts follow the transition
# rule at each design's sample rate. All overridable from the CLI.
DEFAULT_DESIGNS = {
    "eeg_bandpass": FirDesign("bandpass", (0.1, 40.0), 500.0, taps_for_transition(0.5, 500.0)),
    "delta_band": FirDesign("bandpass", (0.5, 3.0), 100.0, taps_for_transition(0.25, 100.0)),
    "kin_lowpass": FirDesign("lowpass", (2.0,), 100.0, taps_for_transition(0.5, 100.0)),
}


# --------------------------------------------------------------------------
# filtering / resampling
# --------------------------------------------------------------------------

def _conv_same(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    if len(taps) < 32:
        return np.convolve(x, taps, mode="same")
    return fftconvolve(x, taps, mode="same")


def filtfilt(filt: FirFilter, signal: np.ndarray) -> np.ndarray:
    """Zero-phase filtering: forward pass, reverse, forward pass, reverse.

    The signal is reflection-padded by 3x the tap count on each side and
    the padding is stripped from the output, so output length equals input
    length and edge transients stay out of the result.
    """
    signal = np.asarray(signal, dtype=float)
    squeeze = signal.ndim == 1
    x = np.atleast_2d(signal)
    pad = 3 * filt.num_taps
    if x.shape[1] <= pad:
        raise SignalTooShort(
            f"need more than {pad} samples for {filt.num_taps} taps, got {x.shape[1]}"
        )
    taps = filt.coefficients
    out = np.empty_like(x)
    for ch in range(x.shape[0]):
        y = np.pad(x[ch], pad, mode="reflect")
        y = _conv_same(y, taps)[::-1]
        y = _conv_same(y, taps)[::-1]
        out[ch] = y[pad:-pad]
    return out[0] if squeeze else out


def downsample(signal_matrix: np.ndarray, factor: int) -> np.ndarray:
    """Pure decimation: keep every factor-th sample along the last axis."""
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise InvalidFactor(f"factor must be a positive integer, got {factor!r}")
    return np.asarray(signal_matrix)[..., ::factor]


def rereference_average(rec: EegRecording) -> EegRecording:
    """Subtract the cross-channel mean from every sample column."""
    if rec.n_channels < 2:
        raise NeedsMultipleChannels("average reference needs at least 2 channels")
    data = rec.data - rec.data.mean(axis=0, keepdims=True)
    return rec.with_data(data, {"step": "rereference_average"})


# --------------------------------------------------------------------------
# normalization
# --------------------------------------------------------------------------

@dataclass
class ChannelStats:
    mean: np.ndarray     # [channels]
    std: np.ndarray      # [channels], population standard deviation


def zscore_fit(data: np.ndarray) -> ChannelStats:
    """Per-channel mean and population std of a channel-major matrix."""
    data = np.asarray(data, dtype=float)
    mean = data.mean(axis=1)
    std = data.std(axis=1)          # ddof=0
    bad = std <= EPS_VARIANCE * np.maximum(1.0, np.abs(mean))
    if np.any(bad):
        raise ZeroVariance(f"zero-variance channel(s) at rows {np.flatnonzero(bad).tolist()}")
    return ChannelStats(mean=mean, std=std)


def zscore_apply(data: np.ndarray, stats: ChannelStats) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.shape[0] != len(stats.mean):
        raise ShapeError(f"stats cover {len(stats.mean)} channels, data has {data.shape[0]}")
    return (data - stats.mean[:, None]) / stats.std[:, None]


def zscore_invert(data: np.ndarray, stats: ChannelStats) -> np.ndarray:
    return np.asarray(data, dtype=float) * stats.std[:, None] + stats.mean[:, None]


def minmax_fit(data: np.ndarray) -> np.ndarray:
    """Per-axis (min, max) of a sample-major matrix; returns [axes, 2]."""
    data = np.asarray(data, dtype=float)
    lo = data.min(axis=0)
    hi = data.max(axis=0)
    bad = (hi - lo) <= EPS_VARIANCE * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    if np.any(bad):
        raise DegenerateRange(f"max == min on axis/axes {np.flatnonzero(bad).tolist()}")
    return np.stack([lo, hi], axis=1)


def minmax_apply(data: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Affine map taking the fitted range onto [0, 1]; no clamping outside it."""
    data = np.asarray(data, dtype=float)
    lo, hi = params[:, 0], params[:, 1]
    return (data - lo) / (hi - lo)


def minmax_invert(data: np.ndarray, params: np.ndarray) -> np.ndarray:
    lo, hi = params[:, 0], params[:, 1]
    return np.asarray(data, dtype=float) * (hi - lo) + lo


# --------------------------------------------------------------------------
# pipeline steps on the domain types
# --------------------------------------------------------------------------

def filter_recording(rec: EegRecording, filt: FirFilter, stage: str) -> EegRecording:
    d = filt.design
    entry = {
        "step": stage,
        "kind": d.kind,
        "cutoffs_hz": list(d.cutoffs_hz),
        "num_taps": d.num_taps,
        "sample_rate_hz": d.sample_rate_hz,
    }
    return rec.with_data(filtfilt(filt, rec.data), entry)


def downsample_recording(rec: EegRecording, factor: int) -> EegRecording:
    entry = {"step": "downsample", "factor": int(factor)}
    return rec.with_data(
        downsample(rec.data, factor),
        entry,
        sample_rate_hz=rec.sample_rate_hz / factor,
    )


def filter_track(track: KinematicsTrack, filt: FirFilter) -> KinematicsTrack:
    smoothed = filtfilt(filt, track.data.T).T
    return KinematicsTrack(track.sample_rate_hz, smoothed, track.normalization_params).validate()


def downsample_track(track: KinematicsTrack, factor: int) -> KinematicsTrack:
    data = downsample(track.data.T, factor).T
    return KinematicsTrack(track.sample_rate_hz / factor, np.ascontiguousarray(data),
                           track.normalization_params).validate()
