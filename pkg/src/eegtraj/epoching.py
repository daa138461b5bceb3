"""Channel selection, lag-embedded design matrices, and trial splitting.

A design-matrix row for time index t stacks, channel by channel, the lag
most recent EEG samples ending at t: feature ``n * lag + l`` holds channel
n at time ``t - l``, so l = 0 is the current sample and larger l reaches
further into the past. A trial only produces rows if its onset index is at
least ``lag - 1``; earlier trials are dropped, not zero-padded.
"""
from dataclasses import dataclass

import numpy as np

from . import accel
from .dataio import validate_events
from .errors import (
    ChannelNotFound,
    EmptyEpochSet,
    InvalidEvents,
    InvalidTaps,
    NotEnoughTrials,
    ShapeError,
)
from .sigproc import EegRecording, KinematicsTrack

# Motor-strip montage used by the decoding pipeline, in design-matrix order.
MOTOR_LAYOUT_21 = [
    "F3", "Fz", "F4",
    "FC5", "FC1", "FC2", "FC6",
    "C3", "Cz", "C4",
    "CP5", "CP1", "CP2", "CP6",
    "P7", "P3", "Pz", "P4",
    "O1", "Oz", "O2",
]


def select_channels(rec: EegRecording, names) -> EegRecording:
    """Reorder/subset channels to exactly `names`, in that order."""
    index = {name: i for i, name in enumerate(rec.channel_names)}
    missing = [n for n in names if n not in index]
    if missing:
        raise ChannelNotFound(f"channel(s) {missing} not in recording")
    rows = [index[n] for n in names]
    out = EegRecording(
        sample_rate_hz=rec.sample_rate_hz,
        channel_names=list(names),
        data=rec.data[rows],
        preprocessing_log=list(rec.preprocessing_log)
        + [{"step": "select_channels", "channels": list(names)}],
    )
    return out.validate()


def events_to_indices(events, sample_rate_hz: float):
    """Round event times to sample indices: [(trial_id, onset_idx, rest_idx)]."""
    validate_events(events)
    out = []
    for ev in events:
        onset = int(round(ev.onset_s * sample_rate_hz))
        rest = int(round(ev.rest_s * sample_rate_hz))
        if rest <= onset:
            raise InvalidEvents(
                f"trial {ev.trial_id} spans no samples at {sample_rate_hz} Hz"
            )
        out.append((ev.trial_id, onset, rest))
    return out


def survivors_for_lag(events, sample_rate_hz: float, lag: int):
    """Trial ids that can produce rows (onset_idx >= lag-1) and the dropped rest."""
    kept, dropped = [], []
    for trial_id, onset, _ in events_to_indices(events, sample_rate_hz):
        (kept if onset >= lag - 1 else dropped).append(trial_id)
    return kept, dropped


@dataclass
class TrialTensorPair:
    trial_id: int
    X: np.ndarray                # [rows, channels * lag]
    Y: np.ndarray                # [rows, 3]


@dataclass
class EpochResult:
    pairs: list
    dropped_trial_ids: list
    lag: int
    n_channels: int

    def pooled(self):
        """All rows stacked across trials, trial order preserved."""
        X = np.concatenate([p.X for p in self.pairs], axis=0)
        Y = np.concatenate([p.Y for p in self.pairs], axis=0)
        return X, Y

    def subset(self, trial_ids):
        wanted = set(trial_ids)
        pairs = [p for p in self.pairs if p.trial_id in wanted]
        if not pairs:
            raise EmptyEpochSet(f"no epoched trials among ids {sorted(wanted)}")
        return EpochResult(pairs, list(self.dropped_trial_ids), self.lag, self.n_channels)


def epoch_trials(rec: EegRecording, track: KinematicsTrack, events,
                 lag: int) -> EpochResult:
    """One (X, Y) pair per trial, rows covering onset..rest inclusive."""
    if not isinstance(lag, (int, np.integer)) or lag < 1:
        raise InvalidTaps(f"lag must be a positive integer, got {lag!r}")
    if rec.sample_rate_hz != track.sample_rate_hz:
        raise ShapeError(
            f"EEG at {rec.sample_rate_hz} Hz but kinematics at "
            f"{track.sample_rate_hz} Hz; resample before epoching"
        )
    limit = min(rec.n_samples, track.n_samples)
    data = np.ascontiguousarray(rec.data, dtype=np.float64)

    pairs, dropped = [], []
    for trial_id, onset, rest in events_to_indices(events, rec.sample_rate_hz):
        if rest >= limit:
            raise InvalidEvents(
                f"trial {trial_id} needs sample {rest} but only {limit} are available"
            )
        if onset < lag - 1:
            dropped.append(trial_id)
            continue
        X = accel.lag_embed(data, onset, rest, lag)
        Y = track.data[onset:rest + 1].copy()
        pairs.append(TrialTensorPair(trial_id, X, Y))
    if not pairs:
        raise EmptyEpochSet(f"no trial has onset index >= {lag - 1}")
    return EpochResult(pairs, dropped, int(lag), rec.n_channels)


@dataclass
class TrialSplit:
    train_ids: list
    val_ids: list
    test_ids: list


def split_trials(trial_ids, n_val: int, n_test: int, seed: int) -> TrialSplit:
    """Disjoint train/val/test partition of whole trials, deterministic in seed."""
    ids = sorted(set(trial_ids))
    if len(ids) != len(list(trial_ids)):
        raise InvalidEvents("trial ids must be unique")
    if n_val < 0 or n_test < 0 or n_val + n_test >= len(ids):
        raise NotEnoughTrials(
            f"cannot carve val={n_val} and test={n_test} out of {len(ids)} trials"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ids))
    shuffled = [ids[i] for i in perm]
    val = sorted(shuffled[:n_val])
    test = sorted(shuffled[n_val:n_val + n_test])
    train = sorted(shuffled[n_val + n_test:])
    return TrialSplit(train, val, test)
