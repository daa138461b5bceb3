"""Synthetic source trees for testing the converter without the real data.

write_fixture lays down HS_*.mat series files plus the AllLifts trial table
with known contents and returns exactly what a correct conversion should
produce, so tests can compare the written bundle against ground truth.
"""
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import savemat

EEG_NAMES = ["Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "FC5", "FC1", "FC2",
             "FC6", "T7", "C3", "Cz", "C4", "T8", "TP9", "CP5", "CP1", "CP2",
             "CP6", "TP10", "P7", "P3", "Pz", "P4", "P8", "PO9", "O1", "Oz",
             "O2", "PO10"]
KIN_NAMES = ["Px1", "Py1", "Pz1", "Px2", "Py2", "Pz2"]
COL_NAMES = ["Part", "Run", "Lift", "StartTime", "LEDOn", "tHandStart",
             "tFirstDigitTouch", "tHandStop", "Dur"]


@dataclass
class FixtureTruth:
    participant: str
    channel_names: list
    eeg_rate: float
    kin_rate: float
    eeg: np.ndarray   # [channels, total samples], series concatenated in order
    kin: np.ndarray   # [total samples, 3], the Px1/Py1/Pz1 columns
    events: list      # (onset_s, rest_s) on the concatenated timeline, sorted
    n_dropped: int


def _channel_names(n: int) -> list:
    names = list(EEG_NAMES[:n])
    names += [f"EX{i}" for i in range(len(names), n)]
    return names


def write_fixture(source_dir, participant: str = "P1", n_channels: int = 4,
                  n_series: int = 2, trials_per_series: int = 3,
                  samples_per_series: int = 4000, rate: float = 500.0,
                  seed: int = 0, missing=()) -> FixtureTruth:
    """`missing` lists (series, lift) pairs whose movement onset becomes NaN."""
    root = Path(source_dir)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    names = _channel_names(n_channels)
    part_num = int(re.sub(r"\D", "", participant) or 1)
    dur_s = samples_per_series / rate
    slot = dur_s / trials_per_series
    missing = set(missing)

    eeg_parts = []
    kin_parts = []
    rows = []
    events = []
    dropped = 0
    for series in range(1, n_series + 1):
        eeg = rng.standard_normal((samples_per_series, n_channels)) * 20.0
        kin = rng.standard_normal((samples_per_series, len(KIN_NAMES))) * 40.0
        savemat(root / f"HS_{participant}_S{series}.mat", {"hs": {
            "eeg": {"sig": eeg, "names": np.array(names, dtype=object),
                    "samplingrate": float(rate)},
            "kin": {"sig": kin, "names": np.array(KIN_NAMES, dtype=object),
                    "samplingrate": float(rate)},
        }})
        eeg_parts.append(eeg)
        kin_parts.append(kin[:, :3])

        offset = (series - 1) * dur_s
        for lift in range(1, trials_per_series + 1):
            start = (lift - 1) * slot + 0.05 * slot
            t_on = 0.1 * slot + rng.uniform(0, 0.05 * slot)
            t_off = t_on + 0.4 * slot + rng.uniform(0, 0.1 * slot)
            if (series, lift) in missing:
                rows.append([part_num, series, lift, start, 0.02 * slot,
                             np.nan, np.nan, t_off, dur_s])
                dropped += 1
            else:
                rows.append([part_num, series, lift, start, 0.02 * slot,
                             t_on, t_on + 0.02 * slot, t_off, dur_s])
                events.append((offset + start + t_on, offset + start + t_off))

    table = np.array(rows, dtype=np.float64)
    table = table[rng.permutation(len(table))]  # converter must not rely on row order
    savemat(root / f"{participant}_AllLifts.mat",
            {"P": table, "ColNames": np.array(COL_NAMES, dtype=object)})
    return FixtureTruth(participant=participant, channel_names=names,
                        eeg_rate=rate, kin_rate=rate,
                        eeg=np.concatenate(eeg_parts, axis=0).T,
                        kin=np.concatenate(kin_parts, axis=0),
                        events=sorted(events), n_dropped=dropped)
