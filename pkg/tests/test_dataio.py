"""Bundle directory round-trip, byte determinism, and rejection paths."""
import json

import numpy as np
import pytest

from eegtraj.dataio import (
    ParticipantBundle,
    TrialEvent,
    load_bundle,
    validate_events,
    write_bundle,
)
from eegtraj.errors import (
    CorruptBundle,
    InvalidEvents,
    MissingComponent,
    RejectedNonFinite,
)
from eegtraj.sigproc import EegRecording, KinematicsTrack


def make_bundle(rng, n_ch=4, n_eeg=500, n_kin=100, log=None):
    rec = EegRecording(
        sample_rate_hz=500.0,
        channel_names=[f"ch{i}" for i in range(n_ch)],
        data=rng.standard_normal((n_ch, n_eeg)) * 40.0,
        preprocessing_log=list(log or []),
    )
    kin = KinematicsTrack(100.0, rng.uniform(-200, 200, size=(n_kin, 3)))
    events = [TrialEvent(1, 0.1, 0.5), TrialEvent(2, 0.55, 0.9)]
    return ParticipantBundle("P1", rec, kin, events, ica_cleaned=True, source="test rig")


def test_roundtrip_is_exact_at_float32(tmp_path):
    rng = np.random.default_rng(0)
    bundle = make_bundle(rng, log=[{"step": "rereference_average"}])
    write_bundle(bundle, tmp_path / "b")
    back = load_bundle(tmp_path / "b")

    assert back.participant_id == "P1"
    assert back.ica_cleaned is True
    assert back.source == "test rig"
    assert back.recording.sample_rate_hz == 500.0
    assert back.recording.channel_names == bundle.recording.channel_names
    assert np.array_equal(back.recording.data,
                          bundle.recording.data.astype(np.float32).astype(np.float64))
    assert np.array_equal(back.kinematics.data,
                          bundle.kinematics.data.astype(np.float32).astype(np.float64))
    assert back.recording.preprocessing_log == [{"step": "rereference_average"}]
    assert [(e.trial_id, e.onset_s, e.rest_s) for e in back.events] == \
           [(1, 0.1, 0.5), (2, 0.55, 0.9)]


def test_roundtrip_random_bundles_property(tmp_path):
    for seed in range(8):
        rng = np.random.default_rng(seed)
        n_ch = int(rng.integers(1, 33))
        n_eeg = int(rng.integers(50, 400))
        bundle = ParticipantBundle(
            f"P{seed}",
            EegRecording(float(rng.integers(100, 1000)),
                         [f"c{i}" for i in range(n_ch)],
                         rng.standard_normal((n_ch, n_eeg)) * 10 ** rng.uniform(-3, 3)),
            KinematicsTrack(100.0, rng.standard_normal((40, 3)) * 100),
            [TrialEvent(7, 0.01, 0.1)],
        )
        out = tmp_path / f"r{seed}"
        write_bundle(bundle, out)
        back = load_bundle(out)
        assert np.array_equal(
            back.recording.data, bundle.recording.data.astype(np.float32).astype(np.float64))
        assert np.array_equal(
            back.kinematics.data, bundle.kinematics.data.astype(np.float32).astype(np.float64))


def test_writes_are_byte_deterministic(tmp_path):
    rng = np.random.default_rng(1)
    bundle = make_bundle(rng, log=[{"step": "downsample", "factor": 5}])
    write_bundle(bundle, tmp_path / "a")
    write_bundle(bundle, tmp_path / "b")
    for name in ["manifest.json", "eeg.f32", "kinematics.csv", "events.csv",
                 "preprocessing.json"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_manifest_shape(tmp_path):
    write_bundle(make_bundle(np.random.default_rng(2)), tmp_path / "b")
    text = (tmp_path / "b" / "manifest.json").read_text()
    manifest = json.loads(text)
    assert list(manifest) == sorted(manifest)
    assert set(manifest) == {
        "participant_id", "eeg_sample_rate_hz", "channel_names", "eeg_samples",
        "kin_sample_rate_hz", "kin_samples", "ica_cleaned", "source",
    }
    assert manifest["eeg_samples"] == 500
    assert manifest["kin_samples"] == 100


def test_csv_headers_and_formats(tmp_path):
    write_bundle(make_bundle(np.random.default_rng(3)), tmp_path / "b")
    kin = (tmp_path / "b" / "kinematics.csv").read_text().splitlines()
    assert kin[0] == "t_s,x_mm,y_mm,z_mm"
    assert len(kin) == 101
    ev = (tmp_path / "b" / "events.csv").read_text().splitlines()
    assert ev[0] == "trial_id,onset_s,rest_s"
    assert ev[1] == "1,0.100000,0.500000"


def test_extra_sidecar_files_are_tolerated(tmp_path):
    bundle = make_bundle(np.random.default_rng(4))
    bundle.extras["ground_truth.json"] = {"kind": "linear"}
    write_bundle(bundle, tmp_path / "b")
    assert (tmp_path / "b" / "ground_truth.json").is_file()
    load_bundle(tmp_path / "b")     # unknown sidecars must not break loading


def test_missing_pieces(tmp_path):
    with pytest.raises(MissingComponent):
        load_bundle(tmp_path / "nope")
    bundle = make_bundle(np.random.default_rng(5))
    for victim in ["manifest.json", "eeg.f32", "kinematics.csv", "events.csv"]:
        out = tmp_path / f"v_{victim}"
        write_bundle(bundle, out)
        (out / victim).unlink()
        with pytest.raises(MissingComponent):
            load_bundle(out)


def test_corrupt_manifest_variants(tmp_path):
    bundle = make_bundle(np.random.default_rng(6))
    out = tmp_path / "b"
    write_bundle(bundle, out)
    path = out / "manifest.json"
    good = json.loads(path.read_text())

    path.write_text("{not json")
    with pytest.raises(CorruptBundle):
        load_bundle(out)

    bad = dict(good, extra_key=1)
    path.write_text(json.dumps(bad))
    with pytest.raises(CorruptBundle, match="unknown"):
        load_bundle(out)

    bad = {k: v for k, v in good.items() if k != "source"}
    path.write_text(json.dumps(bad))
    with pytest.raises(CorruptBundle, match="missing"):
        load_bundle(out)

    bad = dict(good, eeg_samples="500")
    path.write_text(json.dumps(bad))
    with pytest.raises(CorruptBundle, match="wrong type"):
        load_bundle(out)

    bad = dict(good, ica_cleaned=1)
    path.write_text(json.dumps(bad))
    with pytest.raises(CorruptBundle, match="wrong type"):
        load_bundle(out)


def test_eeg_byte_count_must_match_manifest(tmp_path):
    out = tmp_path / "b"
    write_bundle(make_bundle(np.random.default_rng(7)), out)
    raw = (out / "eeg.f32").read_bytes()
    (out / "eeg.f32").write_bytes(raw[:-4])
    with pytest.raises(CorruptBundle, match="bytes"):
        load_bundle(out)


def test_csv_corruption(tmp_path):
    out = tmp_path / "b"
    write_bundle(make_bundle(np.random.default_rng(8)), out)

    kin_path = out / "kinematics.csv"
    good = kin_path.read_text()
    kin_path.write_text("wrong,header,x,y\n" + "\n".join(good.splitlines()[1:]))
    with pytest.raises(CorruptBundle, match="header"):
        load_bundle(out)
    lines = good.splitlines()
    lines[3] = "0.02,1.0,oops,3.0"
    kin_path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptBundle, match="non-numeric"):
        load_bundle(out)
    kin_path.write_text("\n".join(good.splitlines()[:-5]) + "\n")
    with pytest.raises(CorruptBundle, match="rows"):
        load_bundle(out)


def test_event_validation():
    validate_events([TrialEvent(1, 0.0, 1.0), TrialEvent(2, 1.5, 2.0)])
    with pytest.raises(InvalidEvents, match="duplicate"):
        validate_events([TrialEvent(1, 0.0, 1.0), TrialEvent(1, 2.0, 3.0)])
    with pytest.raises(InvalidEvents, match="not before"):
        validate_events([TrialEvent(1, 1.0, 1.0)])
    with pytest.raises(InvalidEvents, match="negative"):
        validate_events([TrialEvent(1, -0.5, 1.0)])
    with pytest.raises(InvalidEvents, match="sorted"):
        validate_events([TrialEvent(1, 2.0, 3.0), TrialEvent(2, 0.5, 1.0)])


def test_events_beyond_recording_end_rejected(tmp_path):
    bundle = make_bundle(np.random.default_rng(9))
    bundle.events.append(TrialEvent(3, 0.95, 5.0))    # recording is 1 s long
    with pytest.raises(InvalidEvents, match="ends"):
        write_bundle(bundle, tmp_path / "b")


def test_non_finite_samples_rejected(tmp_path):
    bundle = make_bundle(np.random.default_rng(10))
    bundle.recording.data[2, 17] = np.nan
    with pytest.raises(RejectedNonFinite):
        write_bundle(bundle, tmp_path / "b")

    bundle = make_bundle(np.random.default_rng(11))
    bundle.kinematics.data[5, 1] = np.inf
    with pytest.raises(RejectedNonFinite):
        write_bundle(bundle, tmp_path / "b")

    good = make_bundle(np.random.default_rng(12))
    out = tmp_path / "c"
    write_bundle(good, out)
    blob = np.frombuffer((out / "eeg.f32").read_bytes(), dtype="<f4").copy()
    blob[7] = np.nan
    (out / "eeg.f32").write_bytes(blob.tobytes())
    with pytest.raises(RejectedNonFinite):
        load_bundle(out)
