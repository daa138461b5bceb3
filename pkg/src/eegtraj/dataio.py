"""Participant bundle directory format: load, validate, write.

A bundle is a directory holding one participant's continuous recording:

    manifest.json        closed schema, sorted keys, see MANIFEST_KEYS
    eeg.f32              little-endian float32, row-major [channels, samples]
    kinematics.csv       header ``t_s,x_mm,y_mm,z_mm``, one row per sample
    events.csv           header ``trial_id,onset_s,rest_s``, one row per trial
    preprocessing.json   optional sidecar, append-only list of applied steps

Kinematics values are written with %.9g so the float32 payload survives a
text round trip exactly; event times are written with .6f. Writers must be
deterministic: identical bundles produce identical bytes, and nothing in a
bundle encodes wall-clock time. Unknown sidecar files are permitted, but
unknown manifest keys are not. The full byte-level contract lives in
docs/bundle_format.md.
"""
import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CorruptBundle,
    InvalidEvents,
    IoError,
    MissingComponent,
    RejectedNonFinite,
    ShapeError,
)
from .sigproc import EegRecording, KinematicsTrack

MANIFEST_KEYS = {
    "participant_id": str,
    "eeg_sample_rate_hz": (int, float),
    "channel_names": list,
    "eeg_samples": int,
    "kin_sample_rate_hz": (int, float),
    "kin_samples": int,
    "ica_cleaned": bool,
    "source": str,
}

KIN_HEADER = ["t_s", "x_mm", "y_mm", "z_mm"]
EVENT_HEADER = ["trial_id", "onset_s", "rest_s"]


@dataclass
class TrialEvent:
    trial_id: int
    onset_s: float
    rest_s: float


@dataclass
class ParticipantBundle:
    participant_id: str
    recording: EegRecording
    kinematics: KinematicsTrack
    events: list
    ica_cleaned: bool = False
    source: str = ""
    extras: dict = field(default_factory=dict)   # sidecar payloads by filename

    def validate(self):
        self.recording.validate()
        self.kinematics.validate()
        validate_events(self.events)
        if not np.all(np.isfinite(self.recording.data)):
            raise RejectedNonFinite("EEG contains NaN or infinite samples")
        if not np.all(np.isfinite(self.kinematics.data)):
            raise RejectedNonFinite("kinematics contain NaN or infinite samples")
        eeg_end = self.recording.n_samples / self.recording.sample_rate_hz
        for ev in self.events:
            if ev.rest_s > eeg_end + 1e-9:
                raise InvalidEvents(
                    f"trial {ev.trial_id} ends at {ev.rest_s}s, recording ends at {eeg_end}s"
                )
        return self


def validate_events(events):
    seen = set()
    last_onset = -np.inf
    for ev in events:
        if ev.trial_id in seen:
            raise InvalidEvents(f"duplicate trial_id {ev.trial_id}")
        seen.add(ev.trial_id)
        if ev.onset_s < 0:
            raise InvalidEvents(f"trial {ev.trial_id} has negative onset {ev.onset_s}")
        if not ev.onset_s < ev.rest_s:
            raise InvalidEvents(
                f"trial {ev.trial_id} onset {ev.onset_s} not before rest {ev.rest_s}"
            )
        if ev.onset_s < last_onset:
            raise InvalidEvents("events must be sorted by onset time")
        last_onset = ev.onset_s


# --------------------------------------------------------------------------
# writing
# --------------------------------------------------------------------------

def _format_g9(value: np.float32) -> str:
    return "%.9g" % float(value)


def write_bundle(bundle: ParticipantBundle, path) -> None:
    bundle.validate()
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    rec, kin = bundle.recording, bundle.kinematics

    manifest = {
        "participant_id": bundle.participant_id,
        "eeg_sample_rate_hz": rec.sample_rate_hz,
        "channel_names": list(rec.channel_names),
        "eeg_samples": rec.n_samples,
        "kin_sample_rate_hz": kin.sample_rate_hz,
        "kin_samples": kin.n_samples,
        "ica_cleaned": bool(bundle.ica_cleaned),
        "source": bundle.source,
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )

    (root / "eeg.f32").write_bytes(
        np.ascontiguousarray(rec.data, dtype="<f4").tobytes()
    )

    kin32 = kin.data.astype(np.float32)
    times = (np.arange(kin.n_samples) / kin.sample_rate_hz).astype(np.float32)
    buf = io.StringIO()
    buf.write(",".join(KIN_HEADER) + "\n")
    for i in range(kin.n_samples):
        buf.write(_format_g9(times[i]) + ","
                  + ",".join(_format_g9(v) for v in kin32[i]) + "\n")
    (root / "kinematics.csv").write_text(buf.getvalue())

    buf = io.StringIO()
    buf.write(",".join(EVENT_HEADER) + "\n")
    for ev in bundle.events:
        buf.write(f"{ev.trial_id},{ev.onset_s:.6f},{ev.rest_s:.6f}\n")
    (root / "events.csv").write_text(buf.getvalue())

    if rec.preprocessing_log:
        (root / "preprocessing.json").write_text(
            json.dumps(rec.preprocessing_log, sort_keys=True, indent=2) + "\n"
        )
    for name, payload in sorted(bundle.extras.items()):
        (root / name).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------

def _read_manifest(root: Path) -> dict:
    p = root / "manifest.json"
    if not p.is_file():
        raise MissingComponent(f"{p} not found")
    try:
        manifest = json.loads(p.read_text())
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptBundle(f"{p} is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict):
        raise CorruptBundle("manifest must be a JSON object")
    unknown = set(manifest) - set(MANIFEST_KEYS)
    if unknown:
        raise CorruptBundle(f"unknown manifest keys: {sorted(unknown)}")
    missing = set(MANIFEST_KEYS) - set(manifest)
    if missing:
        raise CorruptBundle(f"manifest missing keys: {sorted(missing)}")
    for key, types in MANIFEST_KEYS.items():
        val = manifest[key]
        if isinstance(val, bool) and types is not bool:
            raise CorruptBundle(f"manifest key {key} has wrong type")
        if not isinstance(val, types):
            raise CorruptBundle(f"manifest key {key} has wrong type")
    if not all(isinstance(c, str) for c in manifest["channel_names"]):
        raise CorruptBundle("channel_names must all be strings")
    return manifest


def _read_csv(path: Path, header: list) -> list:
    if not path.is_file():
        raise MissingComponent(f"{path} not found")
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != header:
        raise CorruptBundle(f"{path.name} must start with header {','.join(header)}")
    body = [r for r in rows[1:] if r]
    for r in body:
        if len(r) != len(header):
            raise CorruptBundle(f"{path.name} row has {len(r)} fields, expected {len(header)}")
    return body


def load_bundle(path) -> ParticipantBundle:
    root = Path(path)
    if not root.is_dir():
        raise MissingComponent(f"bundle directory {root} not found")
    manifest = _read_manifest(root)
    n_ch = len(manifest["channel_names"])
    n_eeg = manifest["eeg_samples"]
    n_kin = manifest["kin_samples"]

    eeg_path = root / "eeg.f32"
    if not eeg_path.is_file():
        raise MissingComponent(f"{eeg_path} not found")
    raw = eeg_path.read_bytes()
    if len(raw) != 4 * n_ch * n_eeg:
        raise CorruptBundle(
            f"eeg.f32 holds {len(raw)} bytes, manifest implies {4 * n_ch * n_eeg}"
        )
    eeg = np.frombuffer(raw, dtype="<f4").reshape(n_ch, n_eeg).astype(np.float64)

    try:
        kin_rows = _read_csv(root / "kinematics.csv", KIN_HEADER)
        kin = np.array([[np.float32(v) for v in r[1:]] for r in kin_rows],
                       dtype=np.float32).astype(np.float64)
    except ValueError as exc:
        raise CorruptBundle(f"kinematics.csv has a non-numeric value: {exc}") from exc
    if len(kin_rows) != n_kin:
        raise CorruptBundle(
            f"kinematics.csv has {len(kin_rows)} rows, manifest says {n_kin}"
        )
    kin = kin.reshape(n_kin, 3) if n_kin else np.zeros((0, 3))

    try:
        ev_rows = _read_csv(root / "events.csv", EVENT_HEADER)
        events = [TrialEvent(int(r[0]), float(r[1]), float(r[2])) for r in ev_rows]
    except ValueError as exc:
        raise CorruptBundle(f"events.csv has a non-numeric value: {exc}") from exc

    log = []
    log_path = root / "preprocessing.json"
    if log_path.is_file():
        try:
            log = json.loads(log_path.read_text())
        except json.JSONDecodeError as exc:
            raise CorruptBundle(f"preprocessing.json is not valid JSON: {exc}") from exc
        if not isinstance(log, list):
            raise CorruptBundle("preprocessing.json must hold a JSON list")

    rec = EegRecording(
        sample_rate_hz=float(manifest["eeg_sample_rate_hz"]),
        channel_names=list(manifest["channel_names"]),
        data=eeg,
        preprocessing_log=log,
    )
    track = KinematicsTrack(float(manifest["kin_sample_rate_hz"]), kin)
    bundle = ParticipantBundle(
        participant_id=manifest["participant_id"],
        recording=rec,
        kinematics=track,
        events=events,
        ica_cleaned=manifest["ica_cleaned"],
        source=manifest["source"],
    )
    return bundle.validate()
