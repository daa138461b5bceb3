"""Standalone writer for the participant bundle directory format.

Implements the byte-level contract in the toolkit's docs/bundle_format.md:
manifest.json (closed 8-key schema, sorted keys, 2-space indent), eeg.f32
(little-endian float32, row-major channels x samples), kinematics.csv
(%.9g float32 text), events.csv (%.6f seconds). No code is shared with the
consumer; the directory layout is the entire interface.
"""
import io
import json
from pathlib import Path

import numpy as np

from .errors import ConvertError


def format_g9(value) -> str:
    return "%.9g" % np.float32(value)


def write_bundle(out_dir, participant_id: str, channel_names: list,
                 eeg: np.ndarray, eeg_rate: float,
                 kin: np.ndarray, kin_rate: float,
                 events: list, source: str, ica_cleaned: bool = False) -> Path:
    """Writes the four required files; `events` holds (trial_id, onset_s, rest_s)."""
    eeg = np.asarray(eeg, dtype=np.float64)
    kin = np.asarray(kin, dtype=np.float64)
    if eeg.ndim != 2 or eeg.shape[0] != len(channel_names):
        raise ConvertError(f"eeg must be [channels, samples], got {eeg.shape} "
                           f"for {len(channel_names)} channels")
    if kin.ndim != 2 or kin.shape[1] != 3:
        raise ConvertError(f"kinematics must be [samples, 3], got {kin.shape}")
    if not np.isfinite(eeg).all() or not np.isfinite(kin).all():
        raise ConvertError("non-finite sample values are not representable")
    length_s = eeg.shape[1] / eeg_rate
    ids = [int(t[0]) for t in events]
    if len(ids) != len(set(ids)):
        raise ConvertError("trial ids must be unique")
    prev_rest = None
    for trial_id, onset, rest in events:
        if not (0.0 <= onset < rest <= length_s):
            raise ConvertError(f"trial {trial_id} timing [{onset}, {rest}] does not "
                               f"fit a {length_s:.3f} s recording")
        if prev_rest is not None and onset < prev_rest:
            raise ConvertError(f"trial {trial_id} overlaps the previous trial")
        prev_rest = rest

    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)

    manifest = {
        "participant_id": participant_id,
        "eeg_sample_rate_hz": float(eeg_rate),
        "channel_names": [str(n) for n in channel_names],
        "eeg_samples": int(eeg.shape[1]),
        "kin_sample_rate_hz": float(kin_rate),
        "kin_samples": int(kin.shape[0]),
        "ica_cleaned": bool(ica_cleaned),
        "source": source,
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")

    (root / "eeg.f32").write_bytes(
        np.ascontiguousarray(eeg, dtype="<f4").tobytes())

    kin32 = kin.astype(np.float32)
    times = (np.arange(kin.shape[0]) / kin_rate).astype(np.float32)
    buf = io.StringIO()
    buf.write("t_s,x_mm,y_mm,z_mm\n")
    for i in range(kin.shape[0]):
        buf.write(format_g9(times[i]) + ","
                  + ",".join(format_g9(v) for v in kin32[i]) + "\n")
    (root / "kinematics.csv").write_text(buf.getvalue())

    buf = io.StringIO()
    buf.write("trial_id,onset_s,rest_s\n")
    for trial_id, onset, rest in events:
        buf.write(f"{int(trial_id)},{onset:.6f},{rest:.6f}\n")
    (root / "events.csv").write_text(buf.getvalue())
    return root
