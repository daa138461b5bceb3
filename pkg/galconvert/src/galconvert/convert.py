"""Converts one participant's grasp-and-lift recordings into a bundle directory.

All series for the participant are concatenated in series order into a single
continuous recording; lift timing fields, which the source stores relative to
each lift's own start, are rebased onto the concatenated timeline.
"""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bundle import write_bundle
from .errors import ConvertError, SourceParseError
from .sources import column, list_series, load_lift_table, load_series

DEFAULT_KIN_FIELDS = ("Px1", "Py1", "Pz1")


@dataclass
class ConvertSummary:
    participant: str
    out_dir: Path
    n_series: int
    n_trials: int
    n_dropped: int
    dropped: list = field(default_factory=list)  # (series_id, lift_number, reason)
    channel_names: list = field(default_factory=list)


def _subset_channels(eeg: np.ndarray, names: list, whitelist) -> tuple:
    if whitelist is None:
        return eeg, list(names)
    index = {n: i for i, n in enumerate(names)}
    missing = [n for n in whitelist if n not in index]
    if missing:
        raise SourceParseError(f"channels {missing} not present in recording "
                               f"(has {sorted(index)})")
    order = [index[n] for n in whitelist]
    return eeg[:, order], list(whitelist)


def convert_participant(source_dir, out_dir, participant: str,
                        channel_whitelist=None,
                        onset_field: str = "tHandStart",
                        rest_field: str = "tHandStop",
                        kin_fields=DEFAULT_KIN_FIELDS) -> ConvertSummary:
    source_dir = Path(source_dir)
    paths = list_series(source_dir, participant)

    lift_path = source_dir / f"{participant}_AllLifts.mat"
    table, col_names = load_lift_table(source_dir, participant)
    runs = column(table, col_names, "Run", lift_path).astype(int)
    lifts = column(table, col_names, "Lift", lift_path).astype(int)
    start = column(table, col_names, "StartTime", lift_path)
    onset_rel = column(table, col_names, onset_field, lift_path)
    rest_rel = column(table, col_names, rest_field, lift_path)

    eeg_parts = []
    kin_parts = []
    events = []
    dropped = []
    names = None
    eeg_rate = kin_rate = None
    offset_s = 0.0
    for path in paths:
        series = load_series(path, int(path.stem.rsplit("_S", 1)[1]))
        eeg, series_names = _subset_channels(series.eeg, series.eeg_names,
                                             channel_whitelist)
        if names is None:
            names, eeg_rate, kin_rate = series_names, series.eeg_rate, series.kin_rate
        elif series_names != names:
            raise SourceParseError(f"{path}: channel names differ from series 1")
        elif (series.eeg_rate, series.kin_rate) != (eeg_rate, kin_rate):
            raise SourceParseError(f"{path}: sample rates differ from series 1")

        kin_idx = {n: i for i, n in enumerate(series.kin_names)}
        missing = [f for f in kin_fields if f not in kin_idx]
        if missing:
            raise SourceParseError(f"{path}: kinematic fields {missing} not found "
                                   f"(has {series.kin_names})")
        eeg_parts.append(eeg)
        kin_parts.append(series.kin[:, [kin_idx[f] for f in kin_fields]])

        mask = runs == series.series_id
        for lift, t0, t_on, t_off in zip(lifts[mask], start[mask],
                                         onset_rel[mask], rest_rel[mask]):
            if not np.isfinite([t0, t_on, t_off]).all():
                dropped.append((series.series_id, int(lift), "missing timing"))
                continue
            onset = offset_s + float(t0) + float(t_on)
            rest = offset_s + float(t0) + float(t_off)
            if rest <= onset:
                dropped.append((series.series_id, int(lift),
                                "rest precedes movement onset"))
                continue
            events.append((onset, rest))
        offset_s += series.duration_s

    if not events:
        raise ConvertError(f"{participant}: no usable lifts in {lift_path}")
    events.sort()
    numbered = [(i, onset, rest) for i, (onset, rest) in enumerate(events)]

    root = write_bundle(
        out_dir, participant, names,
        np.concatenate(eeg_parts, axis=0).T, eeg_rate,
        np.concatenate(kin_parts, axis=0), kin_rate,
        numbered, source="WAY-EEG-GAL", ica_cleaned=False)
    return ConvertSummary(participant=participant, out_dir=root,
                          n_series=len(paths), n_trials=len(numbered),
                          n_dropped=len(dropped), dropped=dropped,
                          channel_names=names)
