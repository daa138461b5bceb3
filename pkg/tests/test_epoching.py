"""Design-matrix construction and trial splitting, checked against
hand-enumerated layouts before any property loops."""
import numpy as np
import pytest

from eegtraj.dataio import TrialEvent
from eegtraj.epoching import (
    MOTOR_LAYOUT_21,
    epoch_trials,
    events_to_indices,
    select_channels,
    split_trials,
    survivors_for_lag,
)
from eegtraj.errors import (
    ChannelNotFound,
    EmptyEpochSet,
    InvalidEvents,
    NotEnoughTrials,
    ShapeError,
)
from eegtraj.sigproc import EegRecording, KinematicsTrack


def rec_of(data, fs=100.0):
    data = np.asarray(data, dtype=float)
    return EegRecording(fs, [f"c{i}" for i in range(data.shape[0])], data)


def track_of(n, fs=100.0):
    data = np.arange(n * 3, dtype=float).reshape(n, 3)
    return KinematicsTrack(fs, data)


# --------------------------------------------------------------------------
# lag embedding
# --------------------------------------------------------------------------

def test_two_channel_two_lag_hand_oracle():
    rec = rec_of([[10, 11, 12, 13], [20, 21, 22, 23]])
    events = [TrialEvent(5, 0.01, 0.03)]       # onset idx 1, rest idx 3
    result = epoch_trials(rec, track_of(4), events, lag=2)
    assert result.dropped_trial_ids == []
    pair = result.pairs[0]
    assert pair.trial_id == 5
    want = np.array([
        [11, 10, 21, 20],
        [12, 11, 22, 21],
        [13, 12, 23, 22],
    ], dtype=float)
    assert np.array_equal(pair.X, want)
    assert np.array_equal(pair.Y, np.arange(12, dtype=float).reshape(4, 3)[1:4])


def test_row_covers_most_recent_lag_samples():
    # at 100 Hz a lag of 15 reaches 140 ms back: samples t-14 .. t
    rng = np.random.default_rng(0)
    v = rng.standard_normal((1, 100))
    rec = rec_of(v)
    events = [TrialEvent(1, 0.30, 0.30 + 0.01)]
    pair = epoch_trials(rec, track_of(100), events, lag=15).pairs[0]
    assert np.array_equal(pair.X[0], v[0, 30 - 14:31][::-1])


def test_feature_index_reconstruction_property():
    rng = np.random.default_rng(42)
    for _ in range(10):
        n_ch = int(rng.integers(1, 6))
        lag = int(rng.integers(1, 8))
        n = int(rng.integers(lag + 10, lag + 40))
        v = rng.standard_normal((n_ch, n))
        onset = int(rng.integers(lag - 1, n - 5))
        rest = int(rng.integers(onset + 1, n - 1))
        fs = 100.0
        events = [TrialEvent(1, onset / fs, rest / fs)]
        pair = epoch_trials(rec_of(v), track_of(n), events, lag).pairs[0]
        assert pair.X.shape == (rest - onset + 1, n_ch * lag)
        for row, t in enumerate(range(onset, rest + 1)):
            for ch in range(n_ch):
                for l in range(lag):
                    assert pair.X[row, ch * lag + l] == v[ch, t - l]


def test_trials_too_close_to_start_are_dropped_not_padded():
    rec = rec_of(np.arange(40, dtype=float).reshape(1, 40))
    events = [TrialEvent(1, 0.02, 0.05), TrialEvent(2, 0.20, 0.30)]
    result = epoch_trials(rec, track_of(40), events, lag=10)
    assert result.dropped_trial_ids == [1]
    assert [p.trial_id for p in result.pairs] == [2]

    kept, dropped = survivors_for_lag(events, 100.0, 10)
    assert (kept, dropped) == ([2], [1])
    # onset index exactly lag-1 survives
    kept, _ = survivors_for_lag([TrialEvent(3, 0.09, 0.2)], 100.0, 10)
    assert kept == [3]


def test_all_trials_dropped_raises():
    rec = rec_of(np.zeros((1, 50)) + np.arange(50))
    with pytest.raises(EmptyEpochSet):
        epoch_trials(rec, track_of(50), [TrialEvent(1, 0.0, 0.1)], lag=30)


def test_rate_mismatch_and_overrun_raise():
    rec = rec_of(np.random.default_rng(1).standard_normal((2, 50)))
    with pytest.raises(ShapeError):
        epoch_trials(rec, track_of(50, fs=500.0), [TrialEvent(1, 0.1, 0.2)], lag=2)
    with pytest.raises(InvalidEvents):
        epoch_trials(rec, track_of(30), [TrialEvent(1, 0.1, 0.4)], lag=2)


def test_pooled_and_subset():
    rng = np.random.default_rng(2)
    rec = rec_of(rng.standard_normal((3, 200)))
    events = [TrialEvent(1, 0.10, 0.30), TrialEvent(2, 0.50, 0.80),
              TrialEvent(3, 1.00, 1.50)]
    result = epoch_trials(rec, track_of(200), events, lag=5)
    X, Y = result.pooled()
    assert X.shape == (21 + 31 + 51, 15)
    assert Y.shape == (103, 3)
    sub = result.subset([2])
    assert [p.trial_id for p in sub.pairs] == [2]
    with pytest.raises(EmptyEpochSet):
        result.subset([99])


# --------------------------------------------------------------------------
# events and channels
# --------------------------------------------------------------------------

def test_events_to_indices_rounds_to_nearest_sample():
    events = [TrialEvent(1, 0.1, 0.254)]
    assert events_to_indices(events, 100.0) == [(1, 10, 25)]
    with pytest.raises(InvalidEvents):
        events_to_indices([TrialEvent(1, 0.101, 0.104)], 100.0)   # both round to 10


def test_motor_layout_is_the_documented_21():
    assert MOTOR_LAYOUT_21 == [
        "F3", "Fz", "F4", "FC5", "FC1", "FC2", "FC6", "C3", "Cz", "C4",
        "CP5", "CP1", "CP2", "CP6", "P7", "P3", "Pz", "P4", "O1", "Oz", "O2",
    ]
    assert len(set(MOTOR_LAYOUT_21)) == 21


def test_select_channels_reorders_and_logs():
    rng = np.random.default_rng(3)
    data = rng.standard_normal((4, 30))
    rec = EegRecording(100.0, ["Cz", "F3", "Pz", "Fz"], data)
    out = select_channels(rec, ["F3", "Fz", "Cz"])
    assert out.channel_names == ["F3", "Fz", "Cz"]
    assert np.array_equal(out.data, data[[1, 3, 0]])
    assert out.preprocessing_log[-1]["step"] == "select_channels"
    with pytest.raises(ChannelNotFound):
        select_channels(rec, ["F3", "Oz"])


# --------------------------------------------------------------------------
# splitting
# --------------------------------------------------------------------------

def test_split_is_deterministic_disjoint_and_sized():
    ids = list(range(1, 295))
    a = split_trials(ids, n_val=30, n_test=30, seed=7)
    b = split_trials(ids, n_val=30, n_test=30, seed=7)
    assert (a.train_ids, a.val_ids, a.test_ids) == (b.train_ids, b.val_ids, b.test_ids)
    assert len(a.train_ids) == 234 and len(a.val_ids) == 30 and len(a.test_ids) == 30
    assert set(a.train_ids) | set(a.val_ids) | set(a.test_ids) == set(ids)
    assert set(a.train_ids) & set(a.val_ids) == set()
    assert set(a.val_ids) & set(a.test_ids) == set()

    c = split_trials(ids, n_val=30, n_test=30, seed=8)
    assert (a.val_ids, a.test_ids) != (c.val_ids, c.test_ids)


def test_split_rejects_impossible_requests():
    with pytest.raises(NotEnoughTrials):
        split_trials(list(range(10)), n_val=5, n_test=5, seed=0)
    with pytest.raises(NotEnoughTrials):
        split_trials(list(range(10)), n_val=-1, n_test=2, seed=0)
    with pytest.raises(InvalidEvents):
        split_trials([1, 1, 2], n_val=1, n_test=1, seed=0)
