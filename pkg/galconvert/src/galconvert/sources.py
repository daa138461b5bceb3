"""Readers for the WAY-EEG-GAL MATLAB files.

One participant is stored as a set of series recordings plus one trial
table:

    HS_<participant>_S<k>.mat   struct `hs` with `eeg.sig` [samples, ch],
                                `eeg.names`, `eeg.samplingrate`, and a
                                parallel `kin` block for the motion capture
    <participant>_AllLifts.mat  matrix `P` [lifts, cols] with `ColNames`;
                                `Run`/`Lift` locate a trial, `StartTime` is
                                seconds from the start of its series, and
                                the `t*` event fields are seconds from
                                `StartTime`

Missing event values are NaN in `P`; the converter drops those trials.
"""
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import loadmat
from scipy.io.matlab import MatReadError

from .errors import MissingSeries, SourceParseError

SERIES_PATTERN = "HS_{participant}_S{series}.mat"


def _names_list(raw) -> list:
    return [str(n) for n in np.atleast_1d(raw)]


def _load_mat(path: Path) -> dict:
    try:
        return loadmat(path, struct_as_record=False, squeeze_me=True)
    except OSError as exc:
        raise SourceParseError(f"cannot read {path}: {exc}") from exc
    except (MatReadError, ValueError, NotImplementedError, TypeError) as exc:
        raise SourceParseError(f"{path} is not a readable MAT-file: {exc}") from exc


@dataclass
class SourceSeries:
    series_id: int
    eeg: np.ndarray          # [samples, channels]
    eeg_names: list
    eeg_rate: float
    kin: np.ndarray          # [samples, channels]
    kin_names: list
    kin_rate: float

    @property
    def duration_s(self) -> float:
        return self.eeg.shape[0] / self.eeg_rate


def _block(hs, field, path):
    try:
        block = getattr(hs, field)
        sig = np.atleast_2d(np.asarray(block.sig, dtype=np.float64))
        names = _names_list(block.names)
        rate = float(block.samplingrate)
    except AttributeError as exc:
        raise SourceParseError(f"{path} lacks hs.{field} fields: {exc}") from exc
    if sig.shape[1] != len(names):
        # a single-sample series squeezes down to one row; recover by names
        if sig.shape[0] == len(names):
            sig = sig.T
        else:
            raise SourceParseError(
                f"{path}: hs.{field}.sig has {sig.shape[1]} columns "
                f"but {len(names)} names")
    if rate <= 0:
        raise SourceParseError(f"{path}: hs.{field}.samplingrate must be positive")
    return sig, names, rate


def load_series(path, series_id: int) -> SourceSeries:
    path = Path(path)
    mat = _load_mat(path)
    if "hs" not in mat:
        raise SourceParseError(f"{path} has no 'hs' struct")
    hs = mat["hs"]
    eeg, eeg_names, eeg_rate = _block(hs, "eeg", path)
    kin, kin_names, kin_rate = _block(hs, "kin", path)
    if eeg.shape[0] / eeg_rate != kin.shape[0] / kin_rate:
        raise SourceParseError(
            f"{path}: eeg and kin cover different durations "
            f"({eeg.shape[0]}/{eeg_rate} vs {kin.shape[0]}/{kin_rate} samples)")
    return SourceSeries(series_id, eeg, eeg_names, eeg_rate,
                        kin, kin_names, kin_rate)


def list_series(source_dir, participant: str) -> list:
    """Paths of all series files, ordered and checked for gaps."""
    root = Path(source_dir)
    rx = re.compile(re.escape(f"HS_{participant}_S") + r"(\d+)\.mat$")
    found = {}
    for p in root.iterdir() if root.is_dir() else []:
        m = rx.match(p.name)
        if m:
            found[int(m.group(1))] = p
    if not found:
        raise MissingSeries(f"no HS_{participant}_S*.mat files under {root}")
    expected = set(range(1, max(found) + 1))
    gaps = sorted(expected - set(found))
    if gaps:
        raise MissingSeries(f"{participant} is missing series {gaps}")
    return [found[k] for k in sorted(found)]


def load_lift_table(source_dir, participant: str):
    """Returns (P matrix [lifts, cols], column names)."""
    path = Path(source_dir) / f"{participant}_AllLifts.mat"
    if not path.is_file():
        raise MissingSeries(f"{path} not found")
    mat = _load_mat(path)
    if "P" not in mat or "ColNames" not in mat:
        raise SourceParseError(f"{path} must contain 'P' and 'ColNames'")
    table = np.atleast_2d(np.asarray(mat["P"], dtype=np.float64))
    names = _names_list(mat["ColNames"])
    if table.shape[1] != len(names):
        raise SourceParseError(
            f"{path}: P has {table.shape[1]} columns, ColNames lists {len(names)}")
    return table, names


def column(table: np.ndarray, names: list, wanted: str, path="AllLifts") -> np.ndarray:
    try:
        return table[:, names.index(wanted)]
    except ValueError as exc:
        raise SourceParseError(f"{path} has no column {wanted!r}; "
                               f"available: {names}") from exc
